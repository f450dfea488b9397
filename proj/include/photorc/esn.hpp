#pragma once

// Discrete-time echo-state reservoir:
//   x(t+1) = f(W_int x(t) + W_inj u(t+1) + b)
// The input applied at a step is the sample for the step being computed.

#include "photorc/core.hpp"

#include <string>
#include <string_view>

namespace prc {

enum class Activation { tanh, identity, sin2 };

/// Elementwise activation; sin2 is sin(z)^2.
double activate(Activation kind, double z);
Vector activate(Activation kind, const Vector& z);

std::string_view to_string(Activation kind);
/// Accepts "tanh", "identity", "sin2" (also "sin^2"). Throws ParameterError.
Activation parse_activation(std::string_view name);

struct EsnParams {
    long n_nodes = 100;
    double spectral_radius_target = 0.9;
    double input_scaling = 1.0;
    double bias_scale = 0.0;
    long input_dim = 1;
    Activation activation = Activation::tanh;

    /// Throws ParameterError on non-positive sizes or negative/non-finite scales.
    void validate() const;
};

struct EsnReservoir {
    Matrix w_int;  ///< N x N
    Matrix w_inj;  ///< N x K
    Vector bias;   ///< N
    Activation activation = Activation::tanh;

    long n_nodes() const noexcept { return w_int.rows(); }
    long input_dim() const noexcept { return w_inj.cols(); }
};

/// Draws W_int, W_inj and b uniformly in [-1, 1], rescales W_int to the target
/// spectral radius, and scales W_inj and b by input_scaling and bias_scale.
/// Draw order (one stream): W_int row-major, W_inj row-major, bias.
///
/// A drawn W_int with zero spectral radius and a positive target throws
/// ConstructionError; no silent redraw.
EsnReservoir build_esn(const EsnParams& params, RandomSource& rng);

/// One application of the recurrence.
Vector esn_step(const EsnReservoir& r, const Vector& x, const Vector& u);

inline constexpr long kDefaultWashout = 100;

/// Iterates esn_step over every input row starting from x0 and keeps the states
/// after the first `washout` steps. Row j of the result is the state produced
/// by input row washout + j.
StateMatrix esn_run(const EsnReservoir& r, const TimeSeries& input, const Vector& x0,
                    long washout = kDefaultWashout);

/// Same with the all-zero initial state.
StateMatrix esn_run(const EsnReservoir& r, const TimeSeries& input, long washout = kDefaultWashout);

}  // namespace prc
