#pragma once

// CSV interchange: RFC 4180 quoting, '.' decimal separator, UTF-8, LF line
// endings. Numbers use the shortest representation that round-trips exactly.
//
// Schemas
//   states      index,node_0,...,node_{N-1}      one row per input step
//   trajectory  time,x                           one row per integration sample
//   weights     node_0,...,node_{N-1},bias       one row per output
//   metrics     task,kind,seed,N,layer_params,lambda,train_nmse,test_nmse,mc_total
//   tolerance   sigma,median_nmse,n_seeds

#include "photorc/core.hpp"
#include "photorc/deep.hpp"
#include "photorc/readout.hpp"
#include "photorc/tasks.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace prc::csv {

std::string format_number(double v);
std::string quote(std::string_view field);
std::string join_row(const std::vector<std::string>& fields);

/// Parses RFC 4180 text into rows of fields. Throws ParameterError on an
/// unterminated quoted field.
std::vector<std::vector<std::string>> parse(std::string_view text);

std::string states_csv(const StateMatrix& states, long first_index = 0);
std::string trajectory_csv(const TimeSeries& trajectory);
std::string weights_csv(const ReadoutWeights& w);
ReadoutWeights parse_weights_csv(std::string_view text, WeightKind kind = WeightKind::real);

std::string metrics_header();
std::string metrics_row(const MetricsRecord& rec);
std::string tolerance_csv(const std::vector<ToleranceRow>& rows);

std::string read_file(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace prc::csv
