#include "photorc/tasks.hpp"

#include "photorc/delay.hpp"

#include <cmath>
#include <sstream>

namespace prc {

TaskKind parse_task_kind(std::string_view name) {
    if (name == "memory_capacity" || name == "memory-capacity") return TaskKind::memory_capacity;
    if (name == "narma10" || name == "narma") return TaskKind::narma10;
    if (name == "mackey_glass" || name == "mackey-glass") return TaskKind::mackey_glass;
    throw ParameterError("unknown task '" + std::string(name) + "'");
}

std::string_view to_string(TaskKind kind) {
    switch (kind) {
    case TaskKind::memory_capacity:
        return "memory_capacity";
    case TaskKind::narma10:
        return "narma10";
    case TaskKind::mackey_glass:
        return "mackey_glass";
    }
    return "?";
}

void TaskSpec::validate() const {
    auto fail = [](const std::string& msg) { throw ParameterError("TaskSpec: " + msg); };
    if (length < 1) fail("length must be >= 1");
    if (washout < 0 || washout >= length) fail("washout must lie in [0, length)");
    if (!(train_fraction > 0.0 && train_fraction <= 1.0)) fail("train fraction must be in (0, 1]");
    if (!(test_fraction > 0.0 && test_fraction <= 1.0)) fail("test fraction must be in (0, 1]");
    if (train_fraction + test_fraction > 1.0 + 1e-12) fail("train + test fractions exceed 1");
    if (max_lag < 1) fail("max_lag must be >= 1");
    if (horizon < 1) fail("horizon must be >= 1");
    if (!(mg_dt > 0.0 && mg_dt <= 0.1)) fail("mg_dt must lie in (0, 0.1]");
    if (mg_subsample < 1) fail("mg_subsample must be >= 1");
}

Split plan_split(long washout, long available, double train_fraction, double test_fraction) {
    const long usable = available - washout;
    Split s;
    s.washout = washout;
    s.train = static_cast<long>(std::floor(train_fraction * static_cast<double>(usable)));
    s.test = static_cast<long>(std::floor(test_fraction * static_cast<double>(usable)));
    if (s.train + s.test > usable) s.test = usable - s.train;
    if (usable < 1 || s.train < 1 || s.test < 1) {
        std::ostringstream os;
        os << "split of " << usable << " samples after washout leaves " << s.train
           << " train and " << s.test << " test samples";
        throw ParameterError(os.str());
    }
    return s;
}

// ---------------------------------------------------------------------------

Vector narma10_recurrence(const Vector& u) {
    const long n = u.size();
    // y[j + 1] stores y(j + 1); y[0] = y(0) = 0. Indices below 0 read as zero.
    Vector y = Vector::Zero(n + 1);
    auto y_at = [&](long j) { return j >= 0 ? y[j] : 0.0; };
    auto u_at = [&](long j) { return j >= 0 ? u[j] : 0.0; };
    for (long k = 0; k < n; ++k) {
        double window = 0.0;
        for (long i = 0; i < 10; ++i) window += y_at(k - i);
        y[k + 1] = 0.3 * y_at(k) + 0.05 * y_at(k) * window + 1.5 * u_at(k - 9) * u_at(k) + 0.1;
    }
    return y.tail(n);
}

TaskData gen_narma10(long length, RandomSource& rng) {
    if (length < 20) throw ParameterError("gen_narma10: length must be >= 20");
    constexpr int kAttempts = 10;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        RandomSource stream = rng.substream("narma10/" + std::to_string(attempt));
        Vector u = draw_uniform(stream, 0.0, 0.5, length);
        Vector y = narma10_recurrence(u);
        if (y.allFinite() && y.cwiseAbs().maxCoeff() <= 10.0)
            return TaskData{TimeSeries::scalar(u), TimeSeries::scalar(y)};
    }
    throw DivergenceError("gen_narma10: recurrence diverged in all 10 attempts", kAttempts);
}

Vector mackey_glass_trajectory(double duration, double dt, double history) {
    if (!(dt > 0.0) || !(duration > 0.0)) throw ParameterError("mackey_glass: need dt, duration > 0");
    const long steps = static_cast<long>(std::llround(duration / dt));
    auto rhs = [](double x, double xd, double) {
        return 0.2 * xd / (1.0 + std::pow(xd, 10)) - 0.1 * x;
    };
    return integrate_delayed(rhs, kMackeyGlassDelay, dt, Vector::Zero(steps), history);
}

TimeSeries gen_mackey_glass(long length, double dt, long subsample) {
    if (!(dt > 0.0 && dt <= 0.1)) throw ParameterError("gen_mackey_glass: dt must lie in (0, 0.1]");
    if (subsample < 1) throw ParameterError("gen_mackey_glass: subsample must be >= 1");
    if (length < 1) throw ParameterError("gen_mackey_glass: length must be >= 1");
    const long skip = static_cast<long>(std::llround(kMackeyGlassTransient / dt));
    const long steps = skip + (length - 1) * subsample;
    const Vector x = mackey_glass_trajectory(static_cast<double>(steps) * dt, dt);
    Vector out(length);
    for (long j = 0; j < length; ++j) out[j] = x[skip + j * subsample];
    return TimeSeries::scalar(out, dt * static_cast<double>(subsample));
}

TaskData generate_task_data(const TaskSpec& task, RandomSource& rng) {
    task.validate();
    switch (task.kind) {
    case TaskKind::narma10:
        return gen_narma10(task.length, rng);
    case TaskKind::mackey_glass: {
        const TimeSeries x = gen_mackey_glass(task.length + task.horizon, task.mg_dt,
                                              task.mg_subsample);
        return TaskData{x.slice(0, task.length), x.slice(task.horizon, task.length)};
    }
    case TaskKind::memory_capacity:
        break;
    }
    throw ParameterError("generate_task_data: memory capacity has no fixed target");
}

Runner tapped_delay_runner(long taps) {
    if (taps < 1) throw ParameterError("tapped_delay_runner: taps must be >= 1");
    return [taps](const TimeSeries& input) {
        Matrix s = Matrix::Zero(input.length(), taps);
        for (long k = 0; k < input.length(); ++k)
            for (long j = 0; j < taps && j <= k; ++j) s(k, j) = input(k - j);
        return StateMatrix(std::move(s));
    };
}

// ---------------------------------------------------------------------------

namespace {

double squared_correlation(const Vector& a, const Vector& b) {
    const Vector da = a.array() - a.mean();
    const Vector db = b.array() - b.mean();
    const double va = da.squaredNorm(), vb = db.squaredNorm();
    if (!(va > 0.0) || !(vb > 0.0)) return 0.0;
    const double c = da.dot(db);
    return (c * c) / (va * vb);
}

void require_rows(const StateMatrix& states, long expected, const char* who) {
    if (states.rows() != expected) {
        std::ostringstream os;
        os << who << ": runner returned " << states.rows() << " rows for " << expected
           << " input samples";
        throw ShapeError(os.str());
    }
}

}  // namespace

MemoryCapacityResult memory_capacity(const Runner& runner, long max_lag, long length,
                                     RandomSource& rng, const MemoryCapacityConfig& cfg) {
    if (max_lag < 1) throw ParameterError("memory_capacity: max_lag must be >= 1");
    if (cfg.washout < max_lag) throw ParameterError("memory_capacity: washout must be >= max_lag");
    if (cfg.washout >= length) throw ParameterError("memory_capacity: washout must be < length");
    const Split split = plan_split(cfg.washout, length, cfg.train_fraction, 1.0 - cfg.train_fraction);

    RandomSource input_rng = rng.substream("mc-input");
    const Vector u = draw_uniform(input_rng, -1.0, 1.0, length);
    const StateMatrix states = runner(TimeSeries::scalar(u));
    require_rows(states, length, "memory_capacity");
    if (states.values().isZero(0.0))
        throw ConditioningError("memory_capacity: state matrix has rank 0");

    // Column d-1 holds u(k - d) for the rows after the washout.
    const long usable = length - cfg.washout;
    Matrix targets(usable, max_lag);
    for (long r = 0; r < usable; ++r)
        for (long d = 1; d <= max_lag; ++d) targets(r, d - 1) = u[cfg.washout + r - d];

    const StateMatrix train_states = states.slice(split.washout, split.train);
    const StateMatrix test_states = states.slice(split.washout + split.train, split.test);
    const ReadoutWeights w =
        train_ridge(train_states, TimeSeries(targets.topRows(split.train)), cfg.ridge);
    const Matrix pred = predict(w, test_states).values();
    const Matrix truth = targets.middleRows(split.train, split.test);

    MemoryCapacityResult out;
    out.capacities.resize(max_lag);
    for (long d = 0; d < max_lag; ++d)
        out.capacities[d] = squared_correlation(pred.col(d), truth.col(d));
    out.total = out.capacities.sum();
    return out;
}

// ---------------------------------------------------------------------------

ReadoutKind parse_readout_kind(std::string_view name) {
    if (name == "ridge") return ReadoutKind::ridge;
    if (name == "lms") return ReadoutKind::lms;
    if (name == "boolean") return ReadoutKind::boolean;
    throw ParameterError("unknown readout '" + std::string(name) + "'");
}

std::string_view to_string(ReadoutKind kind) {
    switch (kind) {
    case ReadoutKind::ridge:
        return "ridge";
    case ReadoutKind::lms:
        return "lms";
    case ReadoutKind::boolean:
        return "boolean";
    }
    return "?";
}

ReadoutWeights train_readout(const StateMatrix& states, const TimeSeries& targets,
                             const ReadoutConfig& cfg, RandomSource& rng) {
    switch (cfg.kind) {
    case ReadoutKind::ridge:
        return train_ridge(states, targets, cfg.ridge);
    case ReadoutKind::lms:
        return train_online_lms(states, targets, cfg.lms);
    case ReadoutKind::boolean:
        return train_boolean_reinforce(states, targets, cfg.boolean, rng).weights;
    }
    throw ParameterError("train_readout: unknown readout kind");
}

MetricsRecord evaluate(const TaskSpec& task, const Runner& runner, const RunnerInfo& info,
                       const ReadoutConfig& readout, RandomSource& rng) {
    task.validate();
    MetricsRecord rec;
    rec.task = std::string(to_string(task.kind));
    rec.kind = info.family;
    rec.seed = rng.seed();
    rec.n_nodes = info.n_nodes;
    rec.layer_params = info.params;
    rec.lambda = readout.ridge.lambda;

    RandomSource task_rng = rng.substream("task");
    if (task.kind == TaskKind::memory_capacity) {
        MemoryCapacityConfig mc;
        mc.washout = task.washout;
        mc.train_fraction = task.train_fraction;
        mc.ridge = readout.ridge;
        rec.mc_total = memory_capacity(runner, task.max_lag, task.length, task_rng, mc).total;
        return rec;
    }

    const Split split = plan_split(task.washout, task.length, task.train_fraction,
                                   task.test_fraction);
    const TaskData data = generate_task_data(task, task_rng);
    const StateMatrix states = runner(data.input);
    require_rows(states, task.length, "evaluate");

    const StateMatrix train_states = states.slice(split.washout, split.train);
    const StateMatrix test_states = states.slice(split.washout + split.train, split.test);
    const TimeSeries train_y = data.target.slice(split.washout, split.train);
    const TimeSeries test_y = data.target.slice(split.washout + split.train, split.test);

    RandomSource readout_rng = rng.substream("readout");
    const ReadoutWeights w = train_readout(train_states, train_y, readout, readout_rng);
    rec.train_nmse = nmse(predict(w, train_states), train_y);
    rec.test_nmse = nmse(predict(w, test_states), test_y);
    return rec;
}

}  // namespace prc
