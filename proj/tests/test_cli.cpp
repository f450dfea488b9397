#include "photorc/cli/config.hpp"
#include "photorc/cli/experiment.hpp"
#include "photorc/csv.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace prc;
using namespace prc::cli;
namespace fs = std::filesystem;

namespace {

const std::string kExe = PHOTORC_EXE;
const fs::path kConfigs = PHOTORC_CONFIG_DIR;

/// Fresh scratch directory per call.
fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("photorc_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

struct Shell {
    int code;
    std::string err;
};

Shell photorc(const std::string& args, const fs::path& dir, const std::string& env = "") {
    const fs::path err = dir / "stderr.txt";
    const std::string cmd =
        env + " \"" + kExe + "\" " + args + " >/dev/null 2>\"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, csv::read_file(err)};
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

Matrix states_from_csv(const std::string& text) {
    const auto rows = csv::parse(text);
    REQUIRE(rows.size() >= 2);
    Matrix m(static_cast<long>(rows.size()) - 1, static_cast<long>(rows[0].size()) - 1);
    for (std::size_t r = 1; r < rows.size(); ++r)
        for (std::size_t c = 1; c < rows[r].size(); ++c)
            m(static_cast<long>(r) - 1, static_cast<long>(c) - 1) = std::stod(rows[r][c]);
    return m;
}

}  // namespace

TEST_CASE("config defaults and required keys") {
    const auto cfg = ExperimentConfig::from_json({{"schema_version", 1}, {"seeds", {4, 5}}});
    CHECK(cfg.seeds() == std::vector<std::uint64_t>{4, 5});
    CHECK(cfg.integer("delay_nodes") == 400);
    CHECK(cfg.string("family") == "esn");
    CHECK(cfg.real_list("tolerance_sigmas") == std::vector<double>{0.0, 0.1, 0.3});

    try {
        ExperimentConfig::from_json({{"schema_version", 1}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "seeds");
    }
    CHECK_THROWS_AS(ExperimentConfig::from_json({{"seeds", {1}}}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json({{"schema_version", 2}, {"seeds", {1}}}),
                    ConfigError);
}

TEST_CASE("config rejects unknown keys, wrong types and bad choices") {
    const nlohmann::json base{{"schema_version", 1}, {"seeds", {1}}};
    auto with = [&](const char* key, nlohmann::json v) {
        nlohmann::json d = base;
        d[key] = std::move(v);
        return d;
    };
    CHECK_THROWS_AS(ExperimentConfig::from_json(with("delay_nodez", 3)), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(with("delay_nodes", 3.5)), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(with("delay_regime", "fast")), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(with("seeds", nlohmann::json::array())),
                    ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(with("seeds", {-1})), ConfigError);
    CHECK_NOTHROW(ExperimentConfig::from_json(with("delay_beta", 1)));
}

TEST_CASE("config overrides") {
    auto cfg = ExperimentConfig::from_json({{"schema_version", 1}, {"seeds", {1}}});
    cfg.set("delay_beta=1.25");
    cfg.set("seeds=3,4,5");
    cfg.set("tolerance_sigmas=0,0.5");
    cfg.set("dump_states=true");
    cfg.set("delay_regime=map");
    CHECK(cfg.real("delay_beta") == 1.25);
    CHECK(cfg.seeds() == std::vector<std::uint64_t>{3, 4, 5});
    CHECK(cfg.real_list("tolerance_sigmas") == std::vector<double>{0.0, 0.5});
    CHECK(cfg.boolean("dump_states"));
    CHECK_THROWS_AS(cfg.set("delay_beta"), ConfigError);
    CHECK_THROWS_AS(cfg.set("delay_nodes=abc"), ConfigError);
    CHECK_THROWS_AS(cfg.set("delay_nodes=4x"), ConfigError);
    CHECK_THROWS_AS(cfg.set("nope=1"), ConfigError);
    CHECK_THROWS_AS(cfg.set("dump_states=yes"), ConfigError);
    CHECK_THROWS_AS(cfg.set("delay_mask=gaussian"), ConfigError);
}

TEST_CASE("config values reach the library parameters") {
    auto cfg = ExperimentConfig::load((kConfigs / "tolerance.json").string());
    const CascadeSpec spec = cascade_spec_from(cfg);
    REQUIRE(spec.layers.size() == 2);
    const auto& l = std::get<DelayLayerSpec>(spec.layers[1]);
    CHECK(l.params.n_virtual == 100);
    CHECK(l.regime == DelayRegime::map);
    CHECK(spec.coupling_scale == 0.2);
    const DelayParams defaults;
    CHECK(l.params.phase_offset == defaults.phase_offset);
    CHECK(l.params.response_time == defaults.response_time);
    CHECK(task_spec_from(cfg).kind == TaskKind::narma10);
}

TEST_CASE("csv number formatting round-trips") {
    for (double v : {0.1, -2.5e-300, 1.0 / 3.0, 123456789.0, 0.0})
        CHECK(std::stod(csv::format_number(v)) == v);
    CHECK(csv::format_number(0.5) == "0.5");
    CHECK(csv::format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("csv quoting and parsing") {
    CHECK(csv::quote("plain") == "plain");
    CHECK(csv::quote("a,b") == "\"a,b\"");
    CHECK(csv::quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
    const std::string row = csv::join_row({"x", "a,b", "line\nbreak", "q\"q"});
    const auto parsed = csv::parse(row);
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0] == std::vector<std::string>{"x", "a,b", "line\nbreak", "q\"q"});
    CHECK_THROWS_AS(csv::parse("\"open"), ParameterError);
}

TEST_CASE("csv schemas") {
    Matrix m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    const std::string states = csv::states_csv(StateMatrix(m), 10);
    CHECK(states.rfind("index,node_0,node_1,node_2\n10,1,2,3\n", 0) == 0);

    ReadoutWeights w{Matrix(2, 4)};
    w.w_out << 0.1, -0.2, 1.0 / 3.0, 7, 1, 0, 1, -0.5;
    const std::string text = csv::weights_csv(w);
    CHECK(text.rfind("node_0,node_1,node_2,bias\n", 0) == 0);
    CHECK(csv::parse_weights_csv(text).w_out == w.w_out);

    MetricsRecord rec;
    rec.task = "narma10";
    rec.kind = "delay";
    rec.seed = 3;
    rec.n_nodes = 400;
    rec.layer_params = "beta=0.9;gamma=0.5";
    rec.lambda = 1e-6;
    rec.test_nmse = 0.25;
    CHECK(csv::metrics_header() ==
          "task,kind,seed,N,layer_params,lambda,train_nmse,test_nmse,mc_total\n");
    CHECK(csv::metrics_row(rec) == "narma10,delay,3,400,beta=0.9;gamma=0.5,1e-06,,0.25,\n");
    CHECK(csv::tolerance_csv({{0.1, 0.5, 20}}) == "sigma,median_nmse,n_seeds\n0.1,0.5,20\n");
}

TEST_CASE("write_atomic leaves no temporary file") {
    const fs::path dir = scratch("atomic");
    csv::write_atomic(dir / "a.csv", "one\n");
    csv::write_atomic(dir / "a.csv", "two\n");
    CHECK(csv::read_file(dir / "a.csv") == "two\n");
    long files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
    CHECK(files == 1);
}

TEST_CASE("run maps errors onto exit codes") {
    const fs::path dir = scratch("codes");
    write_text(dir / "missing.json", R"({"schema_version": 1})");
    RunResult r = run({"esn", (dir / "missing.json").string(), {}, (dir / "out").string(), {}});
    CHECK(r.exit_code == kExitConfig);
    CHECK(r.message.find("seeds") != std::string::npos);

    r = run({"esn", (dir / "nowhere.json").string(), {}, (dir / "out").string(), {}});
    CHECK(r.exit_code == kExitConfig);

    // eps below twice the integration step: stability error.
    write_text(dir / "stiff.json",
               R"({"schema_version": 1, "seeds": [0], "length": 200, "delay_nodes": 10,
                   "delay_epsilon": 0.0001})");
    r = run({"delay", (dir / "stiff.json").string(), {}, (dir / "out").string(), {}});
    CHECK(r.exit_code == kExitNumerical);

    r = run({"esn", (dir / "stiff.json").string(), {}, (dir / "out").string(),
             {"washout=500"}});
    CHECK(r.exit_code == kExitConfig);
}

TEST_CASE("delay with the default config writes one metrics row per seed") {
    const fs::path dir = scratch("delay");
    const std::string cfg_text = csv::read_file(kConfigs / "delay.json");
    const Shell s = photorc("delay --config \"" + (kConfigs / "delay.json").string() +
                                "\" --out \"" + dir.string() + "\"",
                            dir);
    REQUIRE(s.code == 0);
    const auto rows = csv::parse(csv::read_file(dir / "metrics.csv"));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0][0] == "task");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i][0] == "narma10");
        CHECK(rows[i][1] == "delay");
        CHECK(rows[i][2] == std::to_string(i - 1));
        CHECK(std::stod(rows[i][7]) < 0.2);
    }
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(csv::read_file(kConfigs / "delay.json") == cfg_text);
}

TEST_CASE("missing required key exits 2 naming the key") {
    const fs::path dir = scratch("missing");
    write_text(dir / "cfg.json", R"({"seeds": [1]})");
    const Shell s = photorc("esn --config \"" + (dir / "cfg.json").string() + "\"", dir);
    CHECK(s.code == 2);
    CHECK(s.err.find("schema_version") != std::string::npos);

    const Shell bad_flag = photorc("esn --config x.json --bogus", dir);
    CHECK(bad_flag.code == 2);
}

TEST_CASE("replaying a manifest reproduces the metrics byte for byte") {
    const fs::path dir = scratch("replay");
    const std::string cfg = "\"" + (kConfigs / "esn.json").string() + "\"";
    REQUIRE(photorc("esn --config " + cfg + " --seed 9 --set length=600 --out \"" +
                        (dir / "a").string() + "\"",
                    dir)
                .code == 0);
    REQUIRE(photorc("replay --manifest \"" + (dir / "a" / "manifest.json").string() +
                        "\" --out \"" + (dir / "b").string() + "\"",
                    dir)
                .code == 0);
    const std::string a = csv::read_file(dir / "a" / "metrics.csv");
    CHECK(a == csv::read_file(dir / "b" / "metrics.csv"));
    CHECK(csv::parse(a).size() == 2);
    CHECK(csv::read_file(dir / "a" / "manifest.json") ==
          csv::read_file(dir / "b" / "manifest.json"));
}

TEST_CASE("the output directory defaults to the environment variable") {
    const fs::path dir = scratch("env");
    const Shell s = photorc("memory-capacity --config \"" +
                                (kConfigs / "memory_capacity.json").string() +
                                "\" --set seeds=1 --set length=500",
                            dir, std::string(kOutDirEnv) + "=\"" + dir.string() + "\"");
    REQUIRE(s.code == 0);
    const auto rows = csv::parse(csv::read_file(dir / "metrics.csv"));
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][0] == "memory_capacity");
    CHECK(std::stod(rows[1][8]) <= 20.5);
}

TEST_CASE("dump-states shape") {
    const fs::path dir = scratch("dump");
    const fs::path out = dir / "states.csv";
    REQUIRE(photorc("dump-states --config \"" + (kConfigs / "dump_states.json").string() +
                        "\" --out \"" + out.string() + "\"",
                    dir)
                .code == 0);
    const auto rows = csv::parse(csv::read_file(out));
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) CHECK(r.size() == 5);
    CHECK(rows[0][0] == "index");
    CHECK(fs::exists(dir / "states.csv.manifest.json"));

    const Shell empty = photorc("dump-states --config \"" +
                                    (kConfigs / "dump_states.json").string() +
                                    "\" --set length=0 --out \"" + out.string() + "\"",
                                dir);
    CHECK(empty.code == 2);
}

TEST_CASE("settled-regime dump matches the map dump") {
    const fs::path dir = scratch("settled");
    const std::string base = "dump-states --config \"" +
                             (kConfigs / "dump_states.json").string() +
                             "\" --set length=50 --set delay_nodes=20 --set delay_desync=0"
                             " --set delay_phi0=0.7853981633974483";
    REQUIRE(photorc(base + " --set delay_regime=map --out \"" + (dir / "map.csv").string() + "\"",
                    dir)
                .code == 0);
    REQUIRE(photorc(base + " --set delay_regime=dde --set delay_epsilon=0.0002"
                           " --set delay_oversample=200 --out \"" +
                        (dir / "dde.csv").string() + "\"",
                    dir)
                .code == 0);
    const Matrix a = states_from_csv(csv::read_file(dir / "map.csv"));
    const Matrix b = states_from_csv(csv::read_file(dir / "dde.csv"));
    REQUIRE(a.rows() == 50);
    REQUIRE(b.cols() == 20);
    CHECK(std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size())) < 1e-2);
}

TEST_CASE("trajectory dump") {
    const fs::path dir = scratch("trajectory");
    const fs::path out = dir / "traj.csv";
    REQUIRE(photorc("dump-states --config \"" + (kConfigs / "dump_states.json").string() +
                        "\" --set dump_kind=trajectory --out \"" + out.string() + "\"",
                    dir)
                .code == 0);
    const auto rows = csv::parse(csv::read_file(out));
    // 3 inputs x 4 nodes x 20 steps per node, plus t = 0 and the header.
    CHECK(rows.size() == 3 * 4 * 20 + 2);
    CHECK(rows[0] == std::vector<std::string>{"time", "x"});
}

TEST_CASE("tolerance and cascade subcommands") {
    const fs::path dir = scratch("tolerance");
    REQUIRE(photorc("tolerance --config \"" + (kConfigs / "tolerance.json").string() +
                        "\" --set seeds=0,1,2 --set length=600 --out \"" + dir.string() + "\"",
                    dir)
                .code == 0);
    const auto rows = csv::parse(csv::read_file(dir / "tolerance.csv"));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"sigma", "median_nmse", "n_seeds"});
    CHECK(rows[3][2] == "3");

    const fs::path c = dir / "cascade";
    REQUIRE(photorc("cascade --config \"" + (kConfigs / "cascade.json").string() +
                        "\" --set length=600 --out \"" + c.string() + "\"",
                    dir)
                .code == 0);
    const auto m = csv::parse(csv::read_file(c / "metrics.csv"));
    REQUIRE(m.size() == 4);
    CHECK(m[1][1] == "cascade");
    CHECK(m[1][3] == "200");
}

TEST_CASE("mackey-glass subcommand") {
    const fs::path dir = scratch("mg");
    REQUIRE(photorc("mackey-glass --config \"" + (kConfigs / "mackey_glass.json").string() +
                        "\" --set length=800 --out \"" + dir.string() + "\"",
                    dir)
                .code == 0);
    const auto rows = csv::parse(csv::read_file(dir / "metrics.csv"));
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][0] == "mackey_glass");
    CHECK(std::stod(rows[1][7]) < 0.1);
}
