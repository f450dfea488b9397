#pragma once

// Benchmark signals and evaluation protocols: NARMA10, Mackey-Glass prediction
// and linear memory capacity.

#include "photorc/core.hpp"
#include "photorc/readout.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace prc {

enum class TaskKind { memory_capacity, narma10, mackey_glass };

TaskKind parse_task_kind(std::string_view name);
std::string_view to_string(TaskKind kind);

struct TaskSpec {
    TaskKind kind = TaskKind::narma10;
    /// Total samples generated, washout included.
    long length = 2000;
    long washout = 100;
    double train_fraction = 0.7;
    double test_fraction = 0.3;
    /// Memory capacity: largest reconstructed lag.
    long max_lag = 40;
    /// Mackey-Glass: prediction horizon in samples.
    long horizon = 1;
    double mg_dt = 0.1;
    long mg_subsample = 10;

    void validate() const;
};

/// Chronological split after the washout: train rows then test rows.
struct Split {
    long washout = 0;
    long train = 0;
    long test = 0;
};

/// Throws ParameterError if either part would be empty.
Split plan_split(long washout, long available, double train_fraction, double test_fraction);

struct TaskData {
    TimeSeries input;
    TimeSeries target;
};

/// NARMA10 targets for a given input: entry k is y(k+1) with
///   y(k+1) = 0.3 y(k) + 0.05 y(k) sum_{i=0..9} y(k-i) + 1.5 u(k-9) u(k) + 0.1
/// and zero history for y(j <= 0) and u(j < 0).
Vector narma10_recurrence(const Vector& u);

/// Input u(k) uniform in [0, 0.5) and its NARMA10 target. A series whose
/// targets exceed |y| = 10 is regenerated from the next substream of `rng`;
/// DivergenceError after 10 attempts.
TaskData gen_narma10(long length, RandomSource& rng);

inline constexpr double kMackeyGlassDelay = 17.0;
inline constexpr double kMackeyGlassHistory = 1.2;
inline constexpr double kMackeyGlassTransient = 1000.0;

/// dx/dt = 0.2 x(t-17) / (1 + x(t-17)^10) - 0.1 x(t) from constant history
/// integrated over [0, duration]; returns x(n dt) for n = 0..duration/dt.
Vector mackey_glass_trajectory(double duration, double dt, double history = kMackeyGlassHistory);

/// Mackey-Glass samples after a 1000 time-unit transient, one every `subsample`
/// integration steps. The series dt is dt * subsample.
TimeSeries gen_mackey_glass(long length, double dt, long subsample);

/// Input and target for NARMA10 or Mackey-Glass (target x(k + horizon)).
TaskData generate_task_data(const TaskSpec& task, RandomSource& rng);

/// Maps an input series to one state row per input sample.
using Runner = std::function<StateMatrix(const TimeSeries&)>;

/// States (u(k), u(k-1), ..., u(k-taps+1)) with zero padding before the start.
Runner tapped_delay_runner(long taps);

struct MemoryCapacityConfig {
    /// Rows dropped before the split; must be >= max_lag.
    long washout = 100;
    double train_fraction = 0.7;
    RidgeConfig ridge{1e-8, true};
};

struct MemoryCapacityResult {
    /// capacities[d-1] for lag d.
    Vector capacities;
    double total = 0.0;
};

/// Drives the runner with i.i.d. uniform [-1, 1) input and, per lag d, fits a
/// ridge readout reconstructing u(k-d). The capacity at d is the squared
/// correlation between prediction and target on the held-out rows.
MemoryCapacityResult memory_capacity(const Runner& runner, long max_lag, long length,
                                     RandomSource& rng, const MemoryCapacityConfig& cfg = {});

enum class ReadoutKind { ridge, lms, boolean };

ReadoutKind parse_readout_kind(std::string_view name);
std::string_view to_string(ReadoutKind kind);

struct ReadoutConfig {
    ReadoutKind kind = ReadoutKind::ridge;
    RidgeConfig ridge;
    LmsConfig lms;
    BooleanSearchConfig boolean;
};

ReadoutWeights train_readout(const StateMatrix& states, const TimeSeries& targets,
                             const ReadoutConfig& cfg, RandomSource& rng);

/// Describes the reservoir behind a runner for the metrics record.
struct RunnerInfo {
    std::string family;
    long n_nodes = 0;
    std::string params;
};

struct MetricsRecord {
    std::string task;
    std::string kind;
    std::uint64_t seed = 0;
    long n_nodes = 0;
    std::string layer_params;
    double lambda = 0.0;
    std::optional<double> train_nmse;
    std::optional<double> test_nmse;
    std::optional<double> mc_total;
};

/// Generates the task data from rng.substream("task"), runs the reservoir,
/// trains the readout on the train split and scores both splits. Memory
/// capacity tasks report mc_total instead of NMSE.
MetricsRecord evaluate(const TaskSpec& task, const Runner& runner, const RunnerInfo& info,
                       const ReadoutConfig& readout, RandomSource& rng);

}  // namespace prc
