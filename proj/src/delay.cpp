#include "photorc/delay.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace prc {

namespace {

/// Integer ratio a / b if it is integral to relative precision 1e-9.
bool integral_ratio(double a, double b, long& out) {
    const double r = a / b;
    const double rounded = std::round(r);
    if (rounded < 1.0 || std::abs(r - rounded) > 1e-9 * rounded) return false;
    out = static_cast<long>(rounded);
    return true;
}

}  // namespace

MaskKind parse_mask_kind(std::string_view name) {
    if (name == "binary") return MaskKind::binary;
    if (name == "uniform") return MaskKind::uniform;
    throw ParameterError("unknown mask kind '" + std::string(name) + "'");
}

std::string_view to_string(MaskKind kind) {
    return kind == MaskKind::binary ? "binary" : "uniform";
}

DelayRegime parse_delay_regime(std::string_view name) {
    if (name == "map" || name == "settled-map") return DelayRegime::map;
    if (name == "dde") return DelayRegime::dde;
    throw ParameterError("unknown delay regime '" + std::string(name) + "'");
}

std::string_view to_string(DelayRegime regime) {
    return regime == DelayRegime::map ? "map" : "dde";
}

Mask::Mask(Vector amps, double theta) : amplitudes(std::move(amps)), node_separation(theta) {
    if (amplitudes.size() < 1) throw ParameterError("Mask: needs at least one amplitude");
    if (!amplitudes.allFinite()) throw ParameterError("Mask: amplitudes must be finite");
    if (!(theta > 0.0) || !std::isfinite(theta))
        throw ParameterError("Mask: node separation must be positive");
}

Mask make_mask(long n, MaskKind kind, RandomSource& rng, double node_separation) {
    if (n < 1) throw ParameterError("make_mask: n must be >= 1");
    if (!(node_separation > 0.0)) throw ParameterError("make_mask: theta must be > 0");
    Vector amps(n);
    for (long i = 0; i < n; ++i) {
        if (kind == MaskKind::binary)
            amps[i] = (rng.next_u64() >> 63) != 0 ? 1.0 : -1.0;
        else
            amps[i] = rng.uniform(-1.0, 1.0);
    }
    return Mask(std::move(amps), node_separation);
}

void DelayParams::validate() const {
    auto fail = [](const std::string& msg) { throw ParameterError("DelayParams: " + msg); };
    if (!(response_time > 0.0) || !std::isfinite(response_time)) fail("response_time must be > 0");
    if (!(node_separation > 0.0) || !std::isfinite(node_separation))
        fail("node_separation must be > 0");
    if (n_virtual < 1) fail("n_virtual must be >= 1");
    if (desync_shift < 0) fail("desync_shift must be >= 0");
    if (!std::isfinite(feedback_gain) || !std::isfinite(input_gain) || !std::isfinite(phase_offset))
        fail("gains and phase offset must be finite");
}

DriveSignal multiplex(const TimeSeries& input, const Mask& mask, double input_gain,
                      long oversample) {
    if (input.width() != 1) throw ShapeError("multiplex: input must have width 1");
    if (oversample < 1) throw ParameterError("multiplex: oversample must be >= 1");
    const long n = mask.size();
    const long per_input = n * oversample;
    Vector j(input.length() * per_input);
    for (long k = 0; k < input.length(); ++k) {
        const double s = input(k);
        for (long i = 0; i < n; ++i) {
            const double v = input_gain * mask.amplitudes[i] * s;
            j.segment(k * per_input + i * oversample, oversample).setConstant(v);
        }
    }
    const double h = mask.node_separation / static_cast<double>(oversample);
    return DriveSignal{TimeSeries::scalar(j, h), oversample};
}

namespace {

/// Heun integration core shared by the stored and streaming paths. `drive_at(n)`
/// gives J on step n and `emit(n, x)` receives x(n h) for n = 1..steps. Past
/// states live in a ring buffer spanning the delay.
template <typename Rhs, typename DriveAt, typename Emit>
void heun_delayed(const Rhs& rhs, double delay, double step, long steps, const DriveAt& drive_at,
                  double history, const Emit& emit) {
    if (!(step > 0.0)) throw ParameterError("integrate_delayed: step must be > 0");
    if (!(delay >= step)) throw ParameterError("integrate_delayed: delay must be >= step");

    long delay_steps = 0;
    const bool on_grid = integral_ratio(delay, step, delay_steps);
    const double delay_ratio = delay / step;

    const long span = static_cast<long>(std::ceil(delay_ratio)) + 3;
    std::vector<double> ring(static_cast<std::size_t>(span), history);
    auto at = [&](long j) -> double { return ring[static_cast<std::size_t>(j % span)]; };

    auto delayed = [&](long n) -> double {
        if (on_grid) {
            const long j = n - delay_steps;
            return j >= 0 ? at(j) : history;
        }
        const double t = static_cast<double>(n) - delay_ratio;
        if (t <= 0.0) return history;
        const long j = static_cast<long>(std::floor(t));
        const double f = t - static_cast<double>(j);
        return f == 0.0 ? at(j) : (1.0 - f) * at(j) + f * at(j + 1);
    };

    double x = history;
    for (long n = 0; n < steps; ++n) {
        const double j = drive_at(n);
        const double k1 = rhs(x, delayed(n), j);
        const double predictor = x + step * k1;
        const double k2 = rhs(predictor, delayed(n + 1), j);
        const double next = x + 0.5 * step * (k1 + k2);
        if (!std::isfinite(next)) {
            std::ostringstream os;
            os << "integrate_delayed: state became non-finite at t = "
               << static_cast<double>(n + 1) * step;
            throw DivergenceError(os.str(), n + 1);
        }
        x = next;
        ring[static_cast<std::size_t>((n + 1) % span)] = x;
        emit(n + 1, x);
    }
}

struct Sin2Node {
    double inv_eps, beta, phi0;
    double operator()(double x, double xd, double j) const {
        const double s = std::sin(xd + j + phi0);
        return inv_eps * (-x + beta * s * s);
    }
};

void check_dde_step(const DelayParams& p, double h) {
    if (h > p.node_separation / 10.0 * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "integrate_dde: drive step " << h << " exceeds theta/10 = " << p.node_separation / 10.0;
        throw ParameterError(os.str());
    }
    if (h > p.response_time / 2.0 * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "integrate_dde: step " << h << " exceeds eps/2 = " << p.response_time / 2.0
           << "; increase oversampling";
        throw StabilityError(os.str());
    }
}

}  // namespace

Vector integrate_delayed(const DelayedRhs& rhs, double delay, double step, const Vector& drive,
                         double history) {
    Vector x(drive.size() + 1);
    x[0] = history;
    heun_delayed(
        rhs, delay, step, drive.size(), [&](long n) { return drive[n]; }, history,
        [&](long n, double v) { x[n] = v; });
    return x;
}

TimeSeries integrate_dde(const DelayParams& p, const DriveSignal& drive, double history) {
    p.validate();
    if (drive.signal.width() != 1) throw ShapeError("integrate_dde: drive must have width 1");
    const double h = drive.step();
    check_dde_step(p, h);

    const Sin2Node rhs{1.0 / p.response_time, p.feedback_gain, p.phase_offset};
    const auto& j = drive.signal.values();
    Vector x(j.rows() + 1);
    x[0] = history;
    heun_delayed(
        rhs, p.delay_time(), h, j.rows(), [&](long n) { return j(n, 0); }, history,
        [&](long n, double v) { x[n] = v; });
    return TimeSeries::scalar(x, h);
}

StateMatrix sample_nodes(const TimeSeries& trajectory, double period, double node_separation,
                         long n_inputs) {
    if (n_inputs < 1) throw ParameterError("sample_nodes: n_inputs must be >= 1");
    long n_nodes = 0, per_node = 0;
    if (!integral_ratio(period, node_separation, n_nodes))
        throw ParameterError("sample_nodes: theta must divide T");
    if (!integral_ratio(node_separation, trajectory.dt(), per_node))
        throw ParameterError("sample_nodes: trajectory dt must divide theta");

    const long per_input = n_nodes * per_node;
    const long last = n_inputs * per_input;
    if (last > trajectory.length() - 1) {
        std::ostringstream os;
        os << "sample_nodes: trajectory covers " << (trajectory.length() - 1) * trajectory.dt()
           << " time units, need " << static_cast<double>(n_inputs) * period;
        throw ParameterError(os.str());
    }
    Matrix out(n_inputs, n_nodes);
    for (long k = 0; k < n_inputs; ++k)
        for (long i = 0; i < n_nodes; ++i) out(k, i) = trajectory(k * per_input + (i + 1) * per_node);
    return StateMatrix(std::move(out));
}

StateMatrix run_discrete_map(const DelayParams& p, const TimeSeries& input, const Mask& mask,
                             double history) {
    p.validate();
    if (input.width() != 1) throw ShapeError("run_discrete_map: input must have width 1");
    const long n = p.n_virtual;
    if (mask.size() != n) throw ShapeError("run_discrete_map: mask length differs from n_virtual");

    const long lag = n + p.desync_shift;
    const long length = input.length();
    Matrix out(length, n);
    // Row-major slot view of `out`: slot g lives at (g / n, g % n).
    auto slot = [&](long g) -> double { return g < 0 ? history : out(g / n, g % n); };
    for (long k = 0; k < length; ++k) {
        const double s = p.input_gain * input(k);
        for (long i = 0; i < n; ++i) {
            const long g = k * n + i;
            const double arg = slot(g - lag) + s * mask.amplitudes[i] + p.phase_offset;
            const double sn = std::sin(arg);
            out(k, i) = p.feedback_gain * sn * sn;
        }
    }
    return StateMatrix(std::move(out));
}

// ---------------------------------------------------------------------------

DelayReservoir build_delay(const DelayParams& params, MaskKind mask_kind, RandomSource& rng,
                           DelayRegime regime, long oversample) {
    params.validate();
    if (oversample < 1) throw ParameterError("build_delay: oversample must be >= 1");
    DelayReservoir r;
    r.params = params;
    r.mask = make_mask(params.n_virtual, mask_kind, rng, params.node_separation);
    r.regime = regime;
    r.oversample = oversample;
    return r;
}

TimeSeries delay_trajectory(const DelayReservoir& r, const TimeSeries& input) {
    const DriveSignal drive = multiplex(input, r.mask, r.params.input_gain, r.oversample);
    return integrate_dde(r.params, drive, r.history);
}

StateMatrix run_delay(const DelayReservoir& r, const TimeSeries& input, long washout) {
    if (washout < 0 || washout >= input.length()) {
        std::ostringstream os;
        os << "run_delay: washout " << washout << " must lie in [0, " << input.length() << ")";
        throw ParameterError(os.str());
    }
    if (r.regime == DelayRegime::map) {
        StateMatrix all = run_discrete_map(r.params, input, r.mask, r.history);
        return all.slice(washout, all.rows() - washout);
    }

    // Streams the DDE and keeps only slot-end samples; identical arithmetic to
    // sample_nodes(integrate_dde(multiplex(...))).
    const DelayParams& p = r.params;
    p.validate();
    if (input.width() != 1) throw ShapeError("run_delay: input must have width 1");
    if (r.mask.size() != p.n_virtual) throw ShapeError("run_delay: mask length differs from N");
    const long n = p.n_virtual;
    const long os = r.oversample;
    const double h = r.mask.node_separation / static_cast<double>(os);
    check_dde_step(p, h);

    const long per_input = n * os;
    const Sin2Node rhs{1.0 / p.response_time, p.feedback_gain, p.phase_offset};
    Matrix out(input.length() - washout, n);
    auto drive_at = [&](long step) {
        const long k = step / per_input;
        const long i = (step % per_input) / os;
        return p.input_gain * r.mask.amplitudes[i] * input(k);
    };
    auto emit = [&](long step, double v) {
        if (step % os != 0) return;
        const long slot = step / os - 1;
        const long k = slot / n;
        if (k >= washout) out(k - washout, slot % n) = v;
    };
    heun_delayed(rhs, p.delay_time(), h, input.length() * per_input, drive_at, r.history, emit);
    return StateMatrix(std::move(out));
}

}  // namespace prc
