#pragma once

// Flat experiment configuration with a strict, versioned schema.

#include "photorc/core.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace prc::cli {

inline constexpr int kSchemaVersion = 1;

/// Schema violation: unknown or missing key, wrong type, bad value.
class ConfigError : public Error {
public:
    ConfigError(const std::string& key, const std::string& what)
        : Error("config key '" + key + "': " + what), key_(key) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

enum class ValueType { integer, unsigned_list, real, real_list, string, boolean };

struct KeySpec {
    std::string_view name;
    ValueType type;
    bool required;
    /// Default as JSON text; unused for required keys.
    std::string_view default_json;
    std::string_view doc;
};

/// Every accepted key, in documentation order.
const std::vector<KeySpec>& schema();

/// A fully resolved configuration: every schema key present and type-checked.
class ExperimentConfig {
public:
    /// Validates `doc` against the schema and fills in defaults.
    static ExperimentConfig from_json(const nlohmann::json& doc);
    static ExperimentConfig load(const std::string& path);

    /// Applies "key=value", parsing the value according to the key's type.
    void set(std::string_view assignment);
    void set_seeds(const std::vector<std::uint64_t>& seeds);

    long integer(std::string_view key) const;
    double real(std::string_view key) const;
    const std::string& string(std::string_view key) const;
    bool boolean(std::string_view key) const;
    std::vector<double> real_list(std::string_view key) const;
    std::vector<std::uint64_t> seeds() const;

    const nlohmann::json& document() const noexcept { return doc_; }

private:
    explicit ExperimentConfig(nlohmann::json doc) : doc_(std::move(doc)) {}
    const nlohmann::json& at(std::string_view key) const;

    nlohmann::json doc_;
};

}  // namespace prc::cli
