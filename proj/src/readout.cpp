#include "photorc/readout.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace prc {

namespace {

void check_rows(const StateMatrix& states, const TimeSeries& targets, const char* who) {
    if (states.rows() != targets.length()) {
        std::ostringstream os;
        os << who << ": " << states.rows() << " state rows but " << targets.length() << " targets";
        throw ShapeError(os.str());
    }
}

Matrix augmented(const StateMatrix& states) {
    Matrix a(states.rows(), states.nodes() + 1);
    a.leftCols(states.nodes()) = states.values();
    a.col(states.nodes()).setOnes();
    return a;
}

double population_variance(const Vector& v) {
    const double mean = v.mean();
    return (v.array() - mean).square().mean();
}

}  // namespace

ReadoutWeights train_ridge(const StateMatrix& states, const TimeSeries& targets,
                           const RidgeConfig& cfg) {
    check_rows(states, targets, "train_ridge");
    if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda))
        throw ParameterError("train_ridge: lambda must be finite and >= 0");

    const long n = states.nodes();
    const long rows = states.rows();
    const long cols = cfg.fit_bias ? n + 1 : n;
    const long extra = cfg.lambda > 0.0 ? n : 0;

    Matrix a = Matrix::Zero(rows + extra, cols);
    Matrix b = Matrix::Zero(rows + extra, targets.width());
    if (cfg.fit_bias)
        a.topRows(rows) = augmented(states);
    else
        a.topRows(rows) = states.values();
    b.topRows(rows) = targets.values();
    if (extra > 0)
        a.block(rows, 0, n, n).diagonal().setConstant(std::sqrt(cfg.lambda));

    Eigen::ColPivHouseholderQR<Matrix> qr(a);
    if (qr.rank() < cols) {
        std::ostringstream os;
        os << "train_ridge: system is rank deficient (rank " << qr.rank() << " of " << cols
           << ")";
        if (cfg.lambda == 0.0) os << "; use lambda > 0";
        throw ConditioningError(os.str());
    }
    const Matrix solution = qr.solve(b);  // cols x M

    ReadoutWeights w;
    w.kind = WeightKind::real;
    w.w_out = Matrix::Zero(targets.width(), n + 1);
    w.w_out.leftCols(cols) = solution.transpose();
    return w;
}

TimeSeries predict(const ReadoutWeights& w, const StateMatrix& states) {
    if (w.nodes() != states.nodes()) {
        std::ostringstream os;
        os << "predict: weights expect " << w.nodes() << " nodes, states have " << states.nodes();
        throw ShapeError(os.str());
    }
    Matrix y = states.values() * w.w_out.leftCols(w.nodes()).transpose();
    y.rowwise() += w.w_out.col(w.nodes()).transpose();
    return TimeSeries(std::move(y));
}

ReadoutWeights train_online_lms(const StateMatrix& states, const TimeSeries& targets,
                                const LmsConfig& cfg) {
    check_rows(states, targets, "train_online_lms");
    if (!(cfg.rate > 0.0)) throw ParameterError("train_online_lms: rate must be > 0");
    if (cfg.passes < 1) throw ParameterError("train_online_lms: passes must be >= 1");

    const long n = states.nodes();
    Matrix w = Matrix::Zero(targets.width(), n + 1);
    Vector a(n + 1);
    a[n] = 1.0;
    for (long epoch = 0; epoch < cfg.passes; ++epoch) {
        for (long k = 0; k < states.rows(); ++k) {
            a.head(n) = states.values().row(k).transpose();
            const Vector err = targets.values().row(k).transpose() - w * a;
            w.noalias() += cfg.rate * err * a.transpose();
            const double norm = w.norm();
            if (!(norm <= cfg.divergence_norm)) {
                std::ostringstream os;
                os << "train_online_lms: weights diverged (norm " << norm << ") at epoch " << epoch
                   << ", sample " << k;
                throw DivergenceError(os.str(), epoch * states.rows() + k);
            }
        }
    }
    return ReadoutWeights{std::move(w), WeightKind::real};
}

BooleanFit train_boolean_reinforce(const StateMatrix& states, const TimeSeries& targets,
                                   const BooleanSearchConfig& cfg, RandomSource& rng) {
    check_rows(states, targets, "train_boolean_reinforce");
    if (cfg.iterations < 1) throw ParameterError("train_boolean_reinforce: iterations must be >= 1");
    if (cfg.restarts < 1) throw ParameterError("train_boolean_reinforce: restarts must be >= 1");

    const long n = states.nodes();
    const Matrix& s = states.values();
    const bool pm = cfg.alphabet == BooleanAlphabet::plus_minus;
    const double lo = pm ? -1.0 : 0.0;
    const double hi = 1.0;

    BooleanFit fit;
    fit.weights.kind = WeightKind::boolean;
    fit.weights.w_out = Matrix::Zero(targets.width(), n + 1);
    fit.errors = Vector::Zero(targets.width());

    for (long m = 0; m < targets.width(); ++m) {
        const Vector y = targets.values().col(m);
        double best_error = std::numeric_limits<double>::infinity();
        Vector best_w;
        std::vector<double> best_trace;

        for (long restart = 0; restart < cfg.restarts; ++restart) {
            Vector w(n);
            for (long i = 0; i < n; ++i) w[i] = (rng.next_u64() >> 63) != 0 ? hi : lo;
            Vector residual = y - s * w;
            double error = population_variance(residual);
            std::vector<double> trace;
            if (m == 0) {
                trace.reserve(static_cast<std::size_t>(cfg.iterations) + 1);
                trace.push_back(error);
            }
            for (long it = 0; it < cfg.iterations; ++it) {
                const long j = static_cast<long>(rng.below(static_cast<std::uint64_t>(n)));
                const double flipped = w[j] == hi ? lo : hi;
                const Vector candidate = residual - (flipped - w[j]) * s.col(j);
                const double cand_error = population_variance(candidate);
                if (cand_error <= error) {
                    w[j] = flipped;
                    residual = candidate;
                    error = cand_error;
                }
                if (m == 0) trace.push_back(error);
            }
            if (error < best_error) {
                best_error = error;
                best_w = w;
                best_trace = std::move(trace);
            }
        }

        fit.weights.w_out.row(m).head(n) = best_w.transpose();
        fit.weights.w_out(m, n) = (y - s * best_w).mean();
        fit.errors[m] = best_error;
        if (m == 0) fit.trace = std::move(best_trace);
    }
    return fit;
}

double mse(const TimeSeries& pred, const TimeSeries& target) {
    if (pred.length() != target.length() || pred.width() != target.width())
        throw ShapeError("mse: prediction and target shapes differ");
    return (pred.values() - target.values()).array().square().mean();
}

double nmse(const TimeSeries& pred, const TimeSeries& target) {
    if (pred.length() != target.length() || pred.width() != target.width())
        throw ShapeError("nmse: prediction and target shapes differ");
    double total = 0.0;
    for (long c = 0; c < target.width(); ++c) {
        const Vector t = target.values().col(c);
        const double var = population_variance(t);
        if (!(var > 0.0)) throw MetricError("nmse: target column has zero variance");
        total += (pred.values().col(c) - t).array().square().mean() / var;
    }
    return total / static_cast<double>(target.width());
}

}  // namespace prc
