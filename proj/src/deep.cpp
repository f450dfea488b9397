#include "photorc/deep.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace prc {

CascadeReadout parse_cascade_readout(std::string_view name) {
    if (name == "concat" || name == "concatenated") return CascadeReadout::concatenated;
    if (name == "last" || name == "last_layer") return CascadeReadout::last_layer;
    throw ParameterError("unknown cascade readout '" + std::string(name) + "'");
}

std::string_view to_string(CascadeReadout r) {
    return r == CascadeReadout::concatenated ? "concat" : "last";
}

PerturbationMode parse_perturbation_mode(std::string_view name) {
    if (name == "multiplicative") return PerturbationMode::multiplicative;
    if (name == "additive") return PerturbationMode::additive;
    throw ParameterError("unknown perturbation mode '" + std::string(name) + "'");
}

void CascadeSpec::validate() const {
    if (layers.empty()) throw ParameterError("CascadeSpec: needs at least one layer");
    if (!(coupling_scale >= 0.0) || !std::isfinite(coupling_scale))
        throw ParameterError("CascadeSpec: coupling_scale must be finite and >= 0");
    if (!coupling_seeds.empty() && coupling_seeds.size() + 1 != layers.size())
        throw ParameterError("CascadeSpec: need one coupling seed label per layer boundary");
    for (const auto& layer : layers) {
        if (const auto* esn = std::get_if<EsnParams>(&layer))
            esn->validate();
        else
            std::get<DelayLayerSpec>(layer).params.validate();
    }
}

std::string layer_stream_label(std::size_t layer) { return "layer-" + std::to_string(layer); }

std::string coupling_stream_label(const CascadeSpec& spec, std::size_t boundary) {
    if (boundary < spec.coupling_seeds.size()) return spec.coupling_seeds[boundary];
    return "coupling-" + std::to_string(boundary);
}

long layer_nodes(const Layer& layer) {
    return std::visit([](const auto& r) { return r.n_nodes(); }, layer);
}

long layer_input_width(const Layer& layer) {
    if (const auto* esn = std::get_if<EsnReservoir>(&layer)) return esn->input_dim();
    return 1;
}

DeepReservoir build_cascade(const CascadeSpec& spec, RandomSource& rng) {
    spec.validate();
    DeepReservoir d;
    d.readout = spec.readout;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        RandomSource layer_rng = rng.substream(layer_stream_label(i));
        if (const auto* esn = std::get_if<EsnParams>(&spec.layers[i])) {
            d.layers.emplace_back(build_esn(*esn, layer_rng));
        } else {
            const auto& dl = std::get<DelayLayerSpec>(spec.layers[i]);
            d.layers.emplace_back(
                build_delay(dl.params, dl.mask_kind, layer_rng, dl.regime, dl.oversample));
        }
    }
    for (std::size_t i = 0; i + 1 < d.layers.size(); ++i) {
        RandomSource c_rng = rng.substream(coupling_stream_label(spec, i));
        const long rows = layer_input_width(d.layers[i + 1]);
        const long cols = layer_nodes(d.layers[i]);
        d.couplings.push_back(draw_uniform_matrix(c_rng, -1.0, 1.0, rows, cols) *
                              spec.coupling_scale);
    }
    return d;
}

namespace {

StateMatrix run_layer(const Layer& layer, const TimeSeries& input) {
    if (const auto* esn = std::get_if<EsnReservoir>(&layer)) return esn_run(*esn, input, 0);
    return run_delay(std::get<DelayReservoir>(layer), input, 0);
}

}  // namespace

CascadeRun run_cascade(const DeepReservoir& d, const TimeSeries& input, long washout) {
    if (d.layers.empty()) throw ParameterError("run_cascade: empty cascade");
    if (d.couplings.size() + 1 != d.layers.size())
        throw ShapeError("run_cascade: coupling count does not match layer count");
    if (washout < 0 || washout >= input.length()) {
        std::ostringstream os;
        os << "run_cascade: washout " << washout << " must lie in [0, " << input.length() << ")";
        throw ParameterError(os.str());
    }
    if (input.width() != layer_input_width(d.layers.front()))
        throw ShapeError("run_cascade: input width does not match the first layer");

    std::vector<StateMatrix> full;
    full.reserve(d.layers.size());
    full.push_back(run_layer(d.layers.front(), input));
    for (std::size_t i = 1; i < d.layers.size(); ++i) {
        const Matrix& c = d.couplings[i - 1];
        if (c.cols() != full.back().nodes() || c.rows() != layer_input_width(d.layers[i])) {
            std::ostringstream os;
            os << "run_cascade: coupling " << i - 1 << " is " << c.rows() << "x" << c.cols()
               << ", layers need " << layer_input_width(d.layers[i]) << "x"
               << full.back().nodes();
            throw ShapeError(os.str());
        }
        const TimeSeries drive(full.back().values() * c.transpose(), input.dt());
        full.push_back(run_layer(d.layers[i], drive));
    }

    std::vector<StateMatrix> kept;
    kept.reserve(full.size());
    for (const auto& s : full) kept.push_back(s.slice(washout, s.rows() - washout));
    StateMatrix concatenated = concat_columns(kept);
    return CascadeRun{std::move(kept), std::move(concatenated)};
}

DeepReservoir perturb_couplings(const DeepReservoir& d, const PerturbationSpec& p,
                                RandomSource& rng) {
    if (!(p.amplitude >= 0.0) || !std::isfinite(p.amplitude))
        throw ParameterError("perturb_couplings: sigma must be finite and >= 0");
    DeepReservoir out = d;
    for (Matrix& c : out.couplings) {
        for (long r = 0; r < c.rows(); ++r)
            for (long k = 0; k < c.cols(); ++k) {
                const double g = rng.normal();
                if (p.mode == PerturbationMode::multiplicative)
                    c(r, k) *= 1.0 + p.amplitude * g;
                else
                    c(r, k) += p.amplitude * g;
            }
    }
    return out;
}

std::vector<std::vector<double>> tolerance_cells(const CascadeSpec& spec, const TaskSpec& task,
                                                 const std::vector<double>& sigmas, long seeds,
                                                 RandomSource& rng, const ToleranceConfig& cfg) {
    if (sigmas.empty()) throw ParameterError("tolerance_experiment: sigmas must be non-empty");
    if (seeds < 1) throw ParameterError("tolerance_experiment: seeds must be >= 1");
    if (task.kind == TaskKind::memory_capacity)
        throw ParameterError("tolerance_experiment: task needs a target series");
    for (double s : sigmas)
        if (!(s >= 0.0)) throw ParameterError("tolerance_experiment: sigmas must be >= 0");
    task.validate();
    const Split split = plan_split(task.washout, task.length, task.train_fraction,
                                   task.test_fraction);

    std::vector<std::vector<double>> cells(static_cast<std::size_t>(seeds));
    for (long s = 0; s < seeds; ++s) {
        RandomSource cell = rng.substream(static_cast<std::uint64_t>(s));
        RandomSource cascade_rng = cell.substream("cascade");
        RandomSource task_rng = cell.substream("task");
        RandomSource readout_rng = cell.substream("readout");

        const DeepReservoir base = build_cascade(spec, cascade_rng);
        const TaskData data = generate_task_data(task, task_rng);
        const TimeSeries train_y = data.target.slice(split.washout, split.train);
        const TimeSeries test_y = data.target.slice(split.washout + split.train, split.test);

        const CascadeRun run = run_cascade(base, data.input, split.washout);
        const StateMatrix& states = run.readout_states(base.readout);
        const ReadoutWeights w =
            train_readout(states.slice(0, split.train), train_y, cfg.readout, readout_rng);

        auto& row = cells[static_cast<std::size_t>(s)];
        for (double sigma : sigmas) {
            RandomSource perturb_rng = cell.substream("perturb");
            const DeepReservoir perturbed =
                perturb_couplings(base, PerturbationSpec{sigma, cfg.mode}, perturb_rng);
            const CascadeRun prun = run_cascade(perturbed, data.input, split.washout);
            const StateMatrix test_states =
                prun.readout_states(base.readout).slice(split.train, split.test);
            row.push_back(nmse(predict(w, test_states), test_y));
        }
    }
    return cells;
}

std::vector<ToleranceRow> summarize_tolerance(const std::vector<double>& sigmas,
                                              const std::vector<std::vector<double>>& cells) {
    std::vector<ToleranceRow> rows;
    for (std::size_t j = 0; j < sigmas.size(); ++j) {
        std::vector<double> col;
        for (const auto& c : cells) {
            if (c.size() != sigmas.size()) throw ShapeError("summarize_tolerance: ragged cells");
            col.push_back(c[j]);
        }
        if (col.empty()) throw ParameterError("summarize_tolerance: no cells");
        std::sort(col.begin(), col.end());
        const std::size_t n = col.size();
        const double median = n % 2 == 1 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
        rows.push_back(ToleranceRow{sigmas[j], median, static_cast<long>(n)});
    }
    return rows;
}

std::vector<ToleranceRow> tolerance_experiment(const CascadeSpec& spec, const TaskSpec& task,
                                               const std::vector<double>& sigmas, long seeds,
                                               RandomSource& rng, const ToleranceConfig& cfg) {
    return summarize_tolerance(sigmas, tolerance_cells(spec, task, sigmas, seeds, rng, cfg));
}

}  // namespace prc
