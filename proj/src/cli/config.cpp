#include "photorc/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace prc::cli {

namespace {

using nlohmann::json;

struct Choice {
    std::string_view key;
    std::string_view options;  // '|' separated
};

const std::vector<Choice>& choices() {
    static const std::vector<Choice> c{
        {"task", "narma10|mackey_glass|memory_capacity"},
        {"family", "esn|delay|cascade"},
        {"readout", "ridge|lms|boolean"},
        {"esn_activation", "tanh|identity|sin2"},
        {"delay_regime", "dde|map"},
        {"delay_mask", "binary|uniform"},
        {"cascade_family", "esn|delay"},
        {"cascade_readout", "concat|last"},
        {"tolerance_mode", "multiplicative|additive"},
        {"dump_kind", "states|trajectory"},
    };
    return c;
}

const KeySpec* find_key(std::string_view name) {
    for (const auto& k : schema())
        if (k.name == name) return &k;
    return nullptr;
}

std::string type_name(ValueType t) {
    switch (t) {
    case ValueType::integer:
        return "integer";
    case ValueType::unsigned_list:
        return "list of unsigned integers";
    case ValueType::real:
        return "number";
    case ValueType::real_list:
        return "list of numbers";
    case ValueType::string:
        return "string";
    case ValueType::boolean:
        return "boolean";
    }
    return "?";
}

void check_value(const KeySpec& spec, const json& v) {
    bool ok = false;
    switch (spec.type) {
    case ValueType::integer:
        ok = v.is_number_integer();
        break;
    case ValueType::real:
        ok = v.is_number();
        break;
    case ValueType::string:
        ok = v.is_string();
        break;
    case ValueType::boolean:
        ok = v.is_boolean();
        break;
    case ValueType::unsigned_list:
        ok = v.is_array() && !v.empty();
        for (const auto& e : v) ok = ok && e.is_number_integer() && e.get<std::int64_t>() >= 0;
        break;
    case ValueType::real_list:
        ok = v.is_array() && !v.empty();
        for (const auto& e : v) ok = ok && e.is_number();
        break;
    }
    if (!ok) throw ConfigError(std::string(spec.name), "expected " + type_name(spec.type));

    for (const auto& c : choices()) {
        if (c.key != spec.name) continue;
        const std::string s = v.get<std::string>();
        std::string_view opts = c.options;
        bool found = false;
        while (!opts.empty()) {
            const auto bar = opts.find('|');
            if (opts.substr(0, bar) == s) found = true;
            if (bar == std::string_view::npos) break;
            opts.remove_prefix(bar + 1);
        }
        if (!found)
            throw ConfigError(std::string(spec.name),
                              "'" + s + "' is not one of " + std::string(c.options));
    }
    if (spec.name == "schema_version" && v.get<long>() != kSchemaVersion)
        throw ConfigError("schema_version", "unsupported version " + v.dump() + ", expected " +
                                                std::to_string(kSchemaVersion));
}

template <typename T>
T parse_scalar(const std::string& key, std::string_view text) {
    T v{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ConfigError(key, "cannot parse '" + std::string(text) + "'");
    return v;
}

std::vector<std::string_view> split_commas(std::string_view text) {
    std::vector<std::string_view> out;
    while (true) {
        const auto comma = text.find(',');
        out.push_back(text.substr(0, comma));
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

}  // namespace

const std::vector<KeySpec>& schema() {
    using T = ValueType;
    static const std::vector<KeySpec> keys{
        {"schema_version", T::integer, true, "", "must be 1"},
        {"seeds", T::unsigned_list, true, "", "one experiment run per seed"},

        {"family", T::string, false, "\"esn\"", "reservoir for narma, mackey-glass, memory-capacity"},
        {"task", T::string, false, "\"narma10\"", "task for esn, delay, cascade"},
        {"length", T::integer, false, "2000", "input samples including washout"},
        {"washout", T::integer, false, "100", "leading samples excluded from training and test"},
        {"train_fraction", T::real, false, "0.7", "share of post-washout samples for training"},
        {"test_fraction", T::real, false, "0.3", "share of post-washout samples for testing"},
        {"max_lag", T::integer, false, "40", "memory capacity: largest lag"},
        {"horizon", T::integer, false, "1", "mackey-glass: prediction horizon in samples"},
        {"mg_dt", T::real, false, "0.1", "mackey-glass: integration step"},
        {"mg_subsample", T::integer, false, "10", "mackey-glass: steps per sample"},

        {"readout", T::string, false, "\"ridge\"", "ridge, lms or boolean"},
        {"ridge_lambda", T::real, false, "1e-06", "ridge regularisation"},
        {"lms_rate", T::real, false, "0.001", "lms step size"},
        {"lms_passes", T::integer, false, "1", "lms epochs"},
        {"boolean_iterations", T::integer, false, "1000", "flips per restart"},
        {"boolean_restarts", T::integer, false, "1", "random restarts"},

        {"esn_nodes", T::integer, false, "100", "N"},
        {"esn_spectral_radius", T::real, false, "0.9", "spectral radius of W_int"},
        {"esn_input_scaling", T::real, false, "1.0", "scale of W_inj"},
        {"esn_bias_scale", T::real, false, "0.0", "scale of b"},
        {"esn_activation", T::string, false, "\"tanh\"", "tanh, identity or sin2"},

        {"delay_nodes", T::integer, false, "400", "virtual nodes N"},
        {"delay_theta", T::real, false, "0.02", "node separation"},
        {"delay_epsilon", T::real, false, "0.004", "node response time"},
        {"delay_beta", T::real, false, "0.9", "feedback gain"},
        {"delay_gamma", T::real, false, "0.5", "input gain"},
        {"delay_phi0", T::real, false, "0.33539816339744827", "phase offset"},
        {"delay_desync", T::integer, false, "1", "delay minus period in node slots"},
        {"delay_regime", T::string, false, "\"dde\"", "dde or map"},
        {"delay_oversample", T::integer, false, "20", "integration steps per node"},
        {"delay_mask", T::string, false, "\"uniform\"", "binary or uniform"},
        {"delay_history", T::real, false, "0.0", "constant pre-history"},

        {"cascade_layers", T::integer, false, "2", "number of layers"},
        {"cascade_family", T::string, false, "\"delay\"", "layer type"},
        {"cascade_coupling_scale", T::real, false, "0.2", "inter-layer coupling scale"},
        {"cascade_readout", T::string, false, "\"concat\"", "concat or last"},

        {"tolerance_sigmas", T::real_list, false, "[0.0, 0.1, 0.3]", "perturbation amplitudes"},
        {"tolerance_mode", T::string, false, "\"multiplicative\"", "perturbation model"},

        {"dump_states", T::boolean, false, "false", "also write states_<seed>.csv"},
        {"dump_kind", T::string, false, "\"states\"", "dump-states: states or trajectory"},
    };
    return keys;
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("<root>", "configuration must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        const KeySpec* spec = find_key(key);
        if (!spec) throw ConfigError(key, "unknown key");
        check_value(*spec, value);
    }
    json resolved = json::object();
    for (const auto& spec : schema()) {
        const std::string key(spec.name);
        if (doc.contains(key))
            resolved[key] = doc.at(key);
        else if (spec.required)
            throw ConfigError(key, "required key is missing");
        else
            resolved[key] = json::parse(spec.default_json);
    }
    return ExperimentConfig(std::move(resolved));
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot read '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
    }
    return from_json(doc);
}

void ExperimentConfig::set(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError(std::string(assignment), "override must be key=value");
    const std::string key(assignment.substr(0, eq));
    const std::string_view text = assignment.substr(eq + 1);
    const KeySpec* spec = find_key(key);
    if (!spec) throw ConfigError(key, "unknown key");

    json v;
    switch (spec->type) {
    case ValueType::integer:
        v = parse_scalar<long>(key, text);
        break;
    case ValueType::real:
        v = parse_scalar<double>(key, text);
        break;
    case ValueType::string:
        v = std::string(text);
        break;
    case ValueType::boolean:
        if (text == "true")
            v = true;
        else if (text == "false")
            v = false;
        else
            throw ConfigError(key, "expected true or false");
        break;
    case ValueType::unsigned_list:
        v = json::array();
        for (auto part : split_commas(text)) v.push_back(parse_scalar<std::uint64_t>(key, part));
        break;
    case ValueType::real_list:
        v = json::array();
        for (auto part : split_commas(text)) v.push_back(parse_scalar<double>(key, part));
        break;
    }
    check_value(*spec, v);
    doc_[key] = v;
}

void ExperimentConfig::set_seeds(const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) throw ConfigError("seeds", "expected list of unsigned integers");
    doc_["seeds"] = seeds;
}

const json& ExperimentConfig::at(std::string_view key) const {
    const auto it = doc_.find(std::string(key));
    if (it == doc_.end()) throw ConfigError(std::string(key), "not in schema");
    return *it;
}

long ExperimentConfig::integer(std::string_view key) const { return at(key).get<long>(); }
double ExperimentConfig::real(std::string_view key) const { return at(key).get<double>(); }
const std::string& ExperimentConfig::string(std::string_view key) const {
    return at(key).get_ref<const std::string&>();
}
bool ExperimentConfig::boolean(std::string_view key) const { return at(key).get<bool>(); }
std::vector<double> ExperimentConfig::real_list(std::string_view key) const {
    return at(key).get<std::vector<double>>();
}
std::vector<std::uint64_t> ExperimentConfig::seeds() const {
    return at("seeds").get<std::vector<std::uint64_t>>();
}

}  // namespace prc::cli
