#include "photorc/cli/experiment.hpp"

#include "photorc/csv.hpp"

#include <cstdlib>
#include <memory>
#include <sstream>

namespace prc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> s{"esn",         "delay",        "cascade",
                                            "memory-capacity", "narma",    "mackey-glass",
                                            "tolerance",   "dump-states",  "replay"};
    return s;
}

EsnParams esn_params_from(const ExperimentConfig& cfg) {
    EsnParams p;
    p.n_nodes = cfg.integer("esn_nodes");
    p.spectral_radius_target = cfg.real("esn_spectral_radius");
    p.input_scaling = cfg.real("esn_input_scaling");
    p.bias_scale = cfg.real("esn_bias_scale");
    p.input_dim = 1;
    p.activation = parse_activation(cfg.string("esn_activation"));
    return p;
}

DelayParams delay_params_from(const ExperimentConfig& cfg) {
    DelayParams p;
    p.n_virtual = cfg.integer("delay_nodes");
    p.node_separation = cfg.real("delay_theta");
    p.response_time = cfg.real("delay_epsilon");
    p.feedback_gain = cfg.real("delay_beta");
    p.input_gain = cfg.real("delay_gamma");
    p.phase_offset = cfg.real("delay_phi0");
    p.desync_shift = cfg.integer("delay_desync");
    return p;
}

namespace {

DelayLayerSpec delay_layer_from(const ExperimentConfig& cfg) {
    DelayLayerSpec l;
    l.params = delay_params_from(cfg);
    l.mask_kind = parse_mask_kind(cfg.string("delay_mask"));
    l.regime = parse_delay_regime(cfg.string("delay_regime"));
    l.oversample = cfg.integer("delay_oversample");
    return l;
}

}  // namespace

CascadeSpec cascade_spec_from(const ExperimentConfig& cfg) {
    const long n = cfg.integer("cascade_layers");
    if (n < 1) throw ConfigError("cascade_layers", "must be >= 1");
    CascadeSpec spec;
    spec.coupling_scale = cfg.real("cascade_coupling_scale");
    spec.readout = parse_cascade_readout(cfg.string("cascade_readout"));
    for (long i = 0; i < n; ++i) {
        if (cfg.string("cascade_family") == "esn")
            spec.layers.emplace_back(esn_params_from(cfg));
        else
            spec.layers.emplace_back(delay_layer_from(cfg));
    }
    return spec;
}

TaskSpec task_spec_from(const ExperimentConfig& cfg) {
    TaskSpec t;
    t.kind = parse_task_kind(cfg.string("task"));
    t.length = cfg.integer("length");
    t.washout = cfg.integer("washout");
    t.train_fraction = cfg.real("train_fraction");
    t.test_fraction = cfg.real("test_fraction");
    t.max_lag = cfg.integer("max_lag");
    t.horizon = cfg.integer("horizon");
    t.mg_dt = cfg.real("mg_dt");
    t.mg_subsample = cfg.integer("mg_subsample");
    return t;
}

ReadoutConfig readout_config_from(const ExperimentConfig& cfg) {
    ReadoutConfig r;
    r.kind = parse_readout_kind(cfg.string("readout"));
    r.ridge.lambda = cfg.real("ridge_lambda");
    r.lms.rate = cfg.real("lms_rate");
    r.lms.passes = cfg.integer("lms_passes");
    r.boolean.iterations = cfg.integer("boolean_iterations");
    r.boolean.restarts = cfg.integer("boolean_restarts");
    return r;
}

namespace {

std::string esn_description(const EsnParams& p) {
    std::ostringstream os;
    os << "rho=" << csv::format_number(p.spectral_radius_target)
       << ";in=" << csv::format_number(p.input_scaling)
       << ";bias=" << csv::format_number(p.bias_scale) << ";act=" << to_string(p.activation);
    return os.str();
}

std::string delay_description(const DelayLayerSpec& l) {
    const DelayParams& p = l.params;
    std::ostringstream os;
    os << "beta=" << csv::format_number(p.feedback_gain)
       << ";gamma=" << csv::format_number(p.input_gain)
       << ";phi0=" << csv::format_number(p.phase_offset)
       << ";theta=" << csv::format_number(p.node_separation)
       << ";eps=" << csv::format_number(p.response_time) << ";d=" << p.desync_shift
       << ";regime=" << to_string(l.regime) << ";oversample=" << l.oversample
       << ";mask=" << to_string(l.mask_kind);
    return os.str();
}

}  // namespace

BuiltReservoir build_reservoir(const std::string& family, const ExperimentConfig& cfg,
                               RandomSource& rng) {
    if (family == "esn") {
        const EsnParams p = esn_params_from(cfg);
        auto res = std::make_shared<EsnReservoir>(build_esn(p, rng));
        return {[res](const TimeSeries& in) { return esn_run(*res, in, 0); },
                {"esn", p.n_nodes, esn_description(p)}};
    }
    if (family == "delay") {
        const DelayLayerSpec l = delay_layer_from(cfg);
        auto res = std::make_shared<DelayReservoir>(
            build_delay(l.params, l.mask_kind, rng, l.regime, l.oversample));
        res->history = cfg.real("delay_history");
        return {[res](const TimeSeries& in) { return run_delay(*res, in, 0); },
                {"delay", l.params.n_virtual, delay_description(l)}};
    }
    if (family == "cascade") {
        const CascadeSpec spec = cascade_spec_from(cfg);
        auto res = std::make_shared<DeepReservoir>(build_cascade(spec, rng));
        long nodes = 0;
        for (const auto& layer : res->layers) nodes += layer_nodes(layer);
        if (spec.readout == CascadeReadout::last_layer) nodes = layer_nodes(res->layers.back());
        std::ostringstream os;
        os << "layers=" << spec.layers.size() << ";coupling="
           << csv::format_number(spec.coupling_scale) << ";readout=" << to_string(spec.readout)
           << ";";
        if (const auto* e = std::get_if<EsnParams>(&spec.layers.front()))
            os << esn_description(*e);
        else
            os << delay_description(std::get<DelayLayerSpec>(spec.layers.front()));
        return {[res](const TimeSeries& in) {
                    return run_cascade(*res, in, 0).readout_states(res->readout);
                },
                {"cascade", nodes, os.str()}};
    }
    throw ConfigError("family", "unknown reservoir family '" + family + "'");
}

namespace {

fs::path default_out_dir() {
    if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
    return "results";
}

void write_manifest(const fs::path& path, const std::string& command,
                    const ExperimentConfig& cfg, const std::vector<fs::path>& artifacts) {
    json m;
    m["manifest_version"] = 1;
    m["command"] = command;
    m["tool_version"] = PHOTORC_VERSION;
    m["config"] = cfg.document();
    json files = json::array();
    for (const auto& a : artifacts) files.push_back(a.filename().string());
    m["artifacts"] = files;
    csv::write_atomic(path, m.dump(2) + "\n");
}

/// Fixes the family/task keys implied by the subcommand so the manifest holds
/// the configuration that actually ran.
void resolve_subcommand(const std::string& command, ExperimentConfig& cfg) {
    if (command == "esn" || command == "delay" || command == "cascade")
        cfg.set("family=" + command);
    else if (command == "narma")
        cfg.set("task=narma10");
    else if (command == "mackey-glass")
        cfg.set("task=mackey_glass");
    else if (command == "memory-capacity")
        cfg.set("task=memory_capacity");
    else if (command == "tolerance")
        cfg.set("family=cascade");
}

RunResult run_metrics(const std::string& command, const ExperimentConfig& cfg,
                      const fs::path& out_dir) {
    const TaskSpec task = task_spec_from(cfg);
    const ReadoutConfig readout = readout_config_from(cfg);
    const std::string family = cfg.string("family");

    RunResult result;
    std::string metrics = csv::metrics_header();
    for (std::uint64_t seed : cfg.seeds()) {
        RandomSource rng(seed);
        RandomSource reservoir_rng = rng.substream("reservoir");
        const BuiltReservoir built = build_reservoir(family, cfg, reservoir_rng);
        metrics += csv::metrics_row(evaluate(task, built.runner, built.info, readout, rng));

        if (cfg.boolean("dump_states") && task.kind != TaskKind::memory_capacity) {
            RandomSource task_rng = rng.substream("task");
            const TaskData data = generate_task_data(task, task_rng);
            const fs::path p = out_dir / ("states_" + std::to_string(seed) + ".csv");
            csv::write_atomic(p, csv::states_csv(built.runner(data.input)));
            result.artifacts.push_back(p);
        }
    }
    const fs::path metrics_path = out_dir / "metrics.csv";
    csv::write_atomic(metrics_path, metrics);
    result.artifacts.insert(result.artifacts.begin(), metrics_path);

    const fs::path manifest = out_dir / "manifest.json";
    write_manifest(manifest, command, cfg, result.artifacts);
    result.artifacts.push_back(manifest);
    result.message = "wrote " + metrics_path.string();
    return result;
}

RunResult run_tolerance(const ExperimentConfig& cfg, const fs::path& out_dir) {
    const CascadeSpec spec = cascade_spec_from(cfg);
    const TaskSpec task = task_spec_from(cfg);
    if (task.kind == TaskKind::memory_capacity)
        throw ConfigError("task", "tolerance needs narma10 or mackey_glass");
    ToleranceConfig tcfg;
    tcfg.readout = readout_config_from(cfg);
    tcfg.mode = parse_perturbation_mode(cfg.string("tolerance_mode"));

    const auto seeds = cfg.seeds();
    // Each listed seed is its own cell stream; rows pool all of them.
    std::vector<std::vector<double>> cells;
    for (std::uint64_t seed : seeds) {
        RandomSource rng(seed);
        auto one = tolerance_cells(spec, task, cfg.real_list("tolerance_sigmas"), 1, rng, tcfg);
        cells.push_back(std::move(one.front()));
    }
    const auto rows = summarize_tolerance(cfg.real_list("tolerance_sigmas"), cells);

    RunResult result;
    const fs::path path = out_dir / "tolerance.csv";
    csv::write_atomic(path, csv::tolerance_csv(rows));
    result.artifacts.push_back(path);
    const fs::path manifest = out_dir / "manifest.json";
    write_manifest(manifest, "tolerance", cfg, result.artifacts);
    result.artifacts.push_back(manifest);
    result.message = "wrote " + path.string();
    return result;
}

RunResult run_dump(const ExperimentConfig& cfg, const fs::path& out_file) {
    const long length = cfg.integer("length");
    if (length < 1) throw ConfigError("length", "empty input series");
    const std::uint64_t seed = cfg.seeds().front();
    RandomSource rng(seed);
    RandomSource input_rng = rng.substream("dump-input");
    const TimeSeries input = TimeSeries::scalar(draw_uniform(input_rng, -1.0, 1.0, length));

    const std::string family = cfg.string("family");
    std::string content;
    if (cfg.string("dump_kind") == "trajectory") {
        if (family != "delay") throw ConfigError("dump_kind", "trajectory needs family delay");
        const DelayLayerSpec l = delay_layer_from(cfg);
        RandomSource reservoir_rng = rng.substream("reservoir");
        DelayReservoir r = build_delay(l.params, l.mask_kind, reservoir_rng, l.regime,
                                       l.oversample);
        r.history = cfg.real("delay_history");
        content = csv::trajectory_csv(delay_trajectory(r, input));
    } else {
        RandomSource reservoir_rng = rng.substream("reservoir");
        const BuiltReservoir built = build_reservoir(family, cfg, reservoir_rng);
        content = csv::states_csv(built.runner(input));
    }

    if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
    csv::write_atomic(out_file, content);
    RunResult result;
    result.artifacts.push_back(out_file);
    fs::path manifest = out_file;
    manifest += ".manifest.json";
    write_manifest(manifest, "dump-states", cfg, result.artifacts);
    result.artifacts.push_back(manifest);
    result.message = "wrote " + out_file.string();
    return result;
}

RunResult dispatch(const Invocation& inv) {
    std::string command = inv.subcommand;
    bool known = false;
    for (const auto& s : subcommands()) known = known || s == command;
    if (!known) throw ConfigError("<command>", "unknown subcommand '" + command + "'");
    if (inv.config_path.empty()) throw ConfigError("<file>", "--config is required");

    std::optional<ExperimentConfig> cfg;
    if (command == "replay") {
        json manifest;
        try {
            manifest = json::parse(csv::read_file(inv.config_path));
        } catch (const json::exception& e) {
            throw ConfigError("<manifest>", std::string("invalid manifest: ") + e.what());
        }
        if (!manifest.is_object() || !manifest.contains("command") || !manifest.contains("config"))
            throw ConfigError("<manifest>", "needs 'command' and 'config'");
        command = manifest.at("command").get<std::string>();
        if (command == "replay") throw ConfigError("command", "cannot replay a replay");
        cfg = ExperimentConfig::from_json(manifest.at("config"));
    } else {
        cfg = ExperimentConfig::load(inv.config_path);
    }
    for (const auto& s : inv.sets) cfg->set(s);
    if (inv.seed) cfg->set_seeds({*inv.seed});
    resolve_subcommand(command, *cfg);

    if (command == "dump-states") {
        const fs::path out = inv.out.empty() ? default_out_dir() / "states.csv" : fs::path(inv.out);
        return run_dump(*cfg, out);
    }
    const fs::path out_dir = inv.out.empty() ? default_out_dir() : fs::path(inv.out);
    fs::create_directories(out_dir);
    if (command == "tolerance") return run_tolerance(*cfg, out_dir);
    return run_metrics(command, *cfg, out_dir);
}

}  // namespace

RunResult run(const Invocation& inv) {
    try {
        return dispatch(inv);
    } catch (const ConfigError& e) {
        return {kExitConfig, e.what(), {}};
    } catch (const ParameterError& e) {
        return {kExitConfig, e.what(), {}};
    } catch (const ShapeError& e) {
        return {kExitConfig, e.what(), {}};
    } catch (const NumericalError& e) {
        return {kExitNumerical, e.what(), {}};
    } catch (const std::exception& e) {
        return {kExitFailure, e.what(), {}};
    }
}

}  // namespace prc::cli
