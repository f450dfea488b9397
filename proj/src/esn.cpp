#include "photorc/esn.hpp"

#include <cmath>
#include <sstream>

namespace prc {

double activate(Activation kind, double z) {
    switch (kind) {
    case Activation::tanh:
        return std::tanh(z);
    case Activation::identity:
        return z;
    case Activation::sin2: {
        const double s = std::sin(z);
        return s * s;
    }
    }
    return z;
}

Vector activate(Activation kind, const Vector& z) {
    switch (kind) {
    case Activation::tanh:
        return z.array().tanh().matrix();
    case Activation::identity:
        return z;
    case Activation::sin2:
        return z.array().sin().square().matrix();
    }
    return z;
}

std::string_view to_string(Activation kind) {
    switch (kind) {
    case Activation::tanh:
        return "tanh";
    case Activation::identity:
        return "identity";
    case Activation::sin2:
        return "sin2";
    }
    return "?";
}

Activation parse_activation(std::string_view name) {
    if (name == "tanh") return Activation::tanh;
    if (name == "identity" || name == "linear") return Activation::identity;
    if (name == "sin2" || name == "sin^2") return Activation::sin2;
    throw ParameterError("unknown activation '" + std::string(name) + "'");
}

void EsnParams::validate() const {
    if (n_nodes < 1) throw ParameterError("EsnParams: n_nodes must be >= 1");
    if (input_dim < 1) throw ParameterError("EsnParams: input_dim must be >= 1");
    auto check = [](double v, const char* name) {
        if (!std::isfinite(v) || v < 0.0)
            throw ParameterError(std::string("EsnParams: ") + name + " must be finite and >= 0");
    };
    check(spectral_radius_target, "spectral_radius_target");
    check(input_scaling, "input_scaling");
    check(bias_scale, "bias_scale");
}

EsnReservoir build_esn(const EsnParams& params, RandomSource& rng) {
    params.validate();
    const long n = params.n_nodes;
    const long k = params.input_dim;

    EsnReservoir r;
    r.activation = params.activation;
    r.w_int = draw_uniform_matrix(rng, -1.0, 1.0, n, n);
    r.w_inj = draw_uniform_matrix(rng, -1.0, 1.0, n, k) * params.input_scaling;
    r.bias = draw_uniform(rng, -1.0, 1.0, n) * params.bias_scale;

    if (params.spectral_radius_target == 0.0) {
        r.w_int.setZero();
    } else {
        SpectralRadiusOptions opts;
        opts.dense_fallback = true;
        const double rho = spectral_radius(r.w_int, opts);
        if (!(rho > 0.0)) {
            std::ostringstream os;
            os << "build_esn: drawn W_int has spectral radius " << rho
               << ", cannot rescale to " << params.spectral_radius_target;
            throw ConstructionError(os.str());
        }
        r.w_int *= params.spectral_radius_target / rho;
    }
    return r;
}

Vector esn_step(const EsnReservoir& r, const Vector& x, const Vector& u) {
    if (x.size() != r.n_nodes() || u.size() != r.input_dim()) {
        std::ostringstream os;
        os << "esn_step: expected state width " << r.n_nodes() << " and input width "
           << r.input_dim() << ", got " << x.size() << " and " << u.size();
        throw ShapeError(os.str());
    }
    return activate(r.activation, r.w_int * x + r.w_inj * u + r.bias);
}

StateMatrix esn_run(const EsnReservoir& r, const TimeSeries& input, const Vector& x0,
                    long washout) {
    const long length = input.length();
    if (washout < 0 || washout >= length) {
        std::ostringstream os;
        os << "esn_run: washout " << washout << " must lie in [0, " << length << ")";
        throw ParameterError(os.str());
    }
    if (input.width() != r.input_dim())
        throw ShapeError("esn_run: input width does not match W_inj");
    if (x0.size() != r.n_nodes()) throw ShapeError("esn_run: x0 width does not match reservoir");

    Matrix out(length - washout, r.n_nodes());
    Vector x = x0;
    for (long t = 0; t < length; ++t) {
        const Vector u = input.values().row(t).transpose();
        x = esn_step(r, x, u);
        if (t >= washout) out.row(t - washout) = x.transpose();
    }
    return StateMatrix(std::move(out));
}

StateMatrix esn_run(const EsnReservoir& r, const TimeSeries& input, long washout) {
    return esn_run(r, input, Vector::Zero(r.n_nodes()), washout);
}

}  // namespace prc
