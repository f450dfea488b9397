#pragma once

// Delay-based reservoir with time-multiplexed virtual nodes.
//
// Each input sample s(k) is held for one period T = N * theta and multiplied by
// a T-periodic step mask, giving the drive J(t) = gamma * m(t mod T) * s(k).
// A single nonlinear node with delayed feedback,
//
//   eps * dx/dt = -x(t) + beta * sin^2( x(t - tau) + J(t) + phi0 ),
//
// is integrated, and the trajectory is sampled once per node separation theta.
// The delay is tau = T + d * theta, where d is the desynchronisation shift in
// whole theta slots.
//
// Time conventions (0-based): input k occupies [k T, (k+1) T); virtual node i of
// input k is the sample at the end of its slot, x(k T + (i+1) theta).

#include "photorc/core.hpp"

#include <functional>
#include <numbers>
#include <string_view>

namespace prc {

enum class MaskKind { binary, uniform };

MaskKind parse_mask_kind(std::string_view name);
std::string_view to_string(MaskKind kind);

struct Mask {
    Vector amplitudes;
    double node_separation = 1.0;

    Mask() = default;
    /// Throws ParameterError for an empty or non-finite mask or theta <= 0.
    Mask(Vector amplitudes, double node_separation);

    long size() const noexcept { return amplitudes.size(); }
    double period() const noexcept { return static_cast<double>(size()) * node_separation; }
};

/// binary: amplitudes in {-1, +1} with equal probability; uniform: in [-1, 1).
Mask make_mask(long n, MaskKind kind, RandomSource& rng, double node_separation);

/// pi/4 - beta/2 for the default beta: the unforced fixed point x* = beta/2
/// then sits at sin^2 argument pi/4, the steepest point of the nonlinearity.
inline constexpr double kDefaultPhaseOffset = std::numbers::pi / 4.0 - 0.45;

struct DelayParams {
    double response_time = 0.004;  ///< eps
    double feedback_gain = 0.9;    ///< beta
    double input_gain = 0.5;       ///< gamma
    double phase_offset = kDefaultPhaseOffset;  ///< phi0
    long n_virtual = 400;          ///< N
    double node_separation = 0.02; ///< theta
    long desync_shift = 1;         ///< d

    /// Input hold time T = N * theta.
    double period() const noexcept { return static_cast<double>(n_virtual) * node_separation; }
    /// Feedback delay tau = T + d * theta.
    double delay_time() const noexcept {
        return static_cast<double>(n_virtual + desync_shift) * node_separation;
    }

    void validate() const;
};

/// Piecewise-constant drive J(t), `oversample` grid points per theta slot.
struct DriveSignal {
    TimeSeries signal;
    long oversample = 1;

    double step() const noexcept { return signal.dt(); }
};

inline constexpr long kDefaultOversample = 20;

/// Holds each width-1 input sample for one mask period and applies the mask and
/// input gain. Sample j of the result is J on [j h, (j+1) h) with h = theta /
/// oversample.
DriveSignal multiplex(const TimeSeries& input, const Mask& mask, double input_gain,
                      long oversample = 1);

/// Right-hand side f(x, x_delayed, drive) of dx/dt for a scalar delay system.
using DelayedRhs = std::function<double(double x, double x_delayed, double drive)>;

/// Fixed-step Heun integration of dx/dt = f(x(t), x(t - delay), J(t)) from a
/// constant pre-history. The delayed value is linearly interpolated between
/// grid points. J is held at drive[n] over the whole step [t_n, t_{n+1}).
///
/// Returns drive.size() + 1 samples, x(0) = history through x(M h). Non-finite
/// states raise DivergenceError with the first bad time.
Vector integrate_delayed(const DelayedRhs& rhs, double delay, double step, const Vector& drive,
                         double history);

/// The sin^2 delay node driven by `drive`. Requires the drive step to be at most
/// theta / 10 (ParameterError) and at most eps / 2 (StabilityError).
/// The returned series has the drive's dt and length drive + 1, starting at t = 0.
TimeSeries integrate_dde(const DelayParams& p, const DriveSignal& drive, double history = 0.0);

/// Virtual-node states: row k, column i is x(k T + (i+1) theta), T / theta
/// columns. The trajectory starts at t = 0 and must cover n_inputs * T.
StateMatrix sample_nodes(const TimeSeries& trajectory, double period, double node_separation,
                         long n_inputs);

/// Settled-regime map over a flat delay line of theta slots. Slot g = k N + i
/// holds virtual node i for input k and
///   x[g] = beta * sin^2( x[g - N - d] + gamma * m_i * s(k) + phi0 ),
/// with x[g] = history for g < 0: the feedback is the value emitted exactly tau
/// earlier. d = 0 couples each node to itself; d >= 1 shifts by d slots, with
/// the first d nodes of an input reaching back to the input before last.
StateMatrix run_discrete_map(const DelayParams& p, const TimeSeries& input, const Mask& mask,
                             double history = 0.0);

// ---------------------------------------------------------------------------
// Assembled reservoir

enum class DelayRegime {
    map,  ///< settled-regime discrete map
    dde,  ///< full delay-differential simulation
};

DelayRegime parse_delay_regime(std::string_view name);
std::string_view to_string(DelayRegime regime);

struct DelayReservoir {
    DelayParams params;
    Mask mask;
    DelayRegime regime = DelayRegime::dde;
    long oversample = kDefaultOversample;
    double history = 0.0;

    long n_nodes() const noexcept { return params.n_virtual; }
};

/// Draws the mask from `rng` (its only random draw).
DelayReservoir build_delay(const DelayParams& params, MaskKind mask_kind, RandomSource& rng,
                           DelayRegime regime = DelayRegime::dde,
                           long oversample = kDefaultOversample);

/// Runs the reservoir over a width-1 input and drops the first `washout` rows.
StateMatrix run_delay(const DelayReservoir& r, const TimeSeries& input, long washout = 0);

/// Raw DDE trajectory for the input (the regime field is ignored).
TimeSeries delay_trajectory(const DelayReservoir& r, const TimeSeries& input);

}  // namespace prc
