#pragma once

// Linear readout y(k) = W_out [x(k); 1] and the ways of training it.

#include "photorc/core.hpp"

#include <vector>

namespace prc {

enum class WeightKind { real, boolean };

/// Symbols a Boolean weight may take on the node columns.
enum class BooleanAlphabet {
    zero_one,   ///< {0, 1}
    plus_minus, ///< {-1, +1}
};

struct ReadoutWeights {
    /// M x (N + 1); the last column is the output bias.
    Matrix w_out;
    WeightKind kind = WeightKind::real;

    long outputs() const noexcept { return w_out.rows(); }
    long nodes() const noexcept { return w_out.cols() - 1; }
};

struct RidgeConfig {
    double lambda = 1e-6;
    /// When false the bias column is pinned at zero.
    bool fit_bias = true;
};

/// Ridge regression on the bias-augmented states. The penalty lambda applies to
/// the node weights only; the bias is unpenalised, so heavy regularisation
/// drives the node weights to zero and the bias to the target mean.
///
/// Solved as the stacked least-squares problem [S; sqrt(lambda) D] W = [Y; 0]
/// with column-pivoted Householder QR, which has the same solution as
/// (S^T S + lambda D) W = S^T Y without squaring the condition number. A
/// rank-deficient system throws ConditioningError.
ReadoutWeights train_ridge(const StateMatrix& states, const TimeSeries& targets,
                           const RidgeConfig& cfg = {});

/// Row k of the output is W_out [x(k); 1]. The result uses dt = 1.
TimeSeries predict(const ReadoutWeights& w, const StateMatrix& states);

struct LmsConfig {
    double rate = 1e-3;
    long passes = 1;
    /// Weight norm beyond which training is declared divergent.
    double divergence_norm = 1e12;
};

/// Online least-mean-squares from zero weights: for each sample in time order,
/// w += rate * (y - w [x; 1]) [x; 1]^T, repeated for `passes` epochs.
ReadoutWeights train_online_lms(const StateMatrix& states, const TimeSeries& targets,
                                const LmsConfig& cfg);

struct BooleanSearchConfig {
    long iterations = 1000;
    /// Independent random starts; the best result is kept.
    long restarts = 1;
    BooleanAlphabet alphabet = BooleanAlphabet::zero_one;
};

struct BooleanFit {
    ReadoutWeights weights;
    /// Final mean-squared training error per output.
    Vector errors;
    /// Error of the kept restart after each iteration, first output only,
    /// starting with the initial error.
    std::vector<double> trace;
};

/// Greedy random-flip search over Boolean node weights. Each iteration flips
/// one uniformly chosen weight and keeps the flip iff the mean-squared error,
/// with the bias refitted in closed form, does not increase.
BooleanFit train_boolean_reinforce(const StateMatrix& states, const TimeSeries& targets,
                                   const BooleanSearchConfig& cfg, RandomSource& rng);

/// Mean-squared error divided by the population variance of the target,
/// averaged over columns. Throws MetricError if any target column is constant.
double nmse(const TimeSeries& pred, const TimeSeries& target);

/// Plain mean-squared error.
double mse(const TimeSeries& pred, const TimeSeries& target);

}  // namespace prc
