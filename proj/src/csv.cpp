#include "photorc/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace prc::csv {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string quote(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string join_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += quote(fields[i]);
    }
    out += '\n';
    return out;
}

std::vector<std::vector<std::string>> parse(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        any = true;
        if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else {
            field += c;
        }
    }
    if (in_quotes) throw ParameterError("csv: unterminated quoted field");
    if (any || !field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string states_csv(const StateMatrix& states, long first_index) {
    std::vector<std::string> header{"index"};
    for (long i = 0; i < states.nodes(); ++i) header.push_back("node_" + std::to_string(i));
    std::string out = join_row(header);
    for (long k = 0; k < states.rows(); ++k) {
        std::vector<std::string> row{std::to_string(first_index + k)};
        for (long i = 0; i < states.nodes(); ++i) row.push_back(format_number(states(k, i)));
        out += join_row(row);
    }
    return out;
}

std::string trajectory_csv(const TimeSeries& trajectory) {
    std::vector<std::string> header{"time"};
    if (trajectory.width() == 1)
        header.push_back("x");
    else
        for (long c = 0; c < trajectory.width(); ++c) header.push_back("x_" + std::to_string(c));
    std::string out = join_row(header);
    for (long k = 0; k < trajectory.length(); ++k) {
        std::vector<std::string> row{format_number(static_cast<double>(k) * trajectory.dt())};
        for (long c = 0; c < trajectory.width(); ++c) row.push_back(format_number(trajectory(k, c)));
        out += join_row(row);
    }
    return out;
}

std::string weights_csv(const ReadoutWeights& w) {
    std::vector<std::string> header;
    for (long i = 0; i < w.nodes(); ++i) header.push_back("node_" + std::to_string(i));
    header.push_back("bias");
    std::string out = join_row(header);
    for (long m = 0; m < w.outputs(); ++m) {
        std::vector<std::string> row;
        for (long c = 0; c < w.w_out.cols(); ++c) row.push_back(format_number(w.w_out(m, c)));
        out += join_row(row);
    }
    return out;
}

namespace {

double parse_number(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParameterError("csv: '" + s + "' is not a number");
    return v;
}

}  // namespace

ReadoutWeights parse_weights_csv(std::string_view text, WeightKind kind) {
    const auto rows = parse(text);
    if (rows.size() < 2) throw ParameterError("weights csv: needs a header and one row");
    const std::size_t cols = rows.front().size();
    if (cols < 2 || rows.front().back() != "bias")
        throw ParameterError("weights csv: header must end with 'bias'");
    ReadoutWeights w;
    w.kind = kind;
    w.w_out.resize(static_cast<long>(rows.size() - 1), static_cast<long>(cols));
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != cols) throw ShapeError("weights csv: ragged row");
        for (std::size_t c = 0; c < cols; ++c)
            w.w_out(static_cast<long>(r - 1), static_cast<long>(c)) = parse_number(rows[r][c]);
    }
    if (kind == WeightKind::boolean) {
        const auto nodes = w.w_out.leftCols(w.nodes()).array();
        if (!((nodes == 0.0) || (nodes == 1.0)).all())
            throw ParameterError("weights csv: boolean weights must be 0 or 1");
    }
    return w;
}

std::string metrics_header() {
    return join_row({"task", "kind", "seed", "N", "layer_params", "lambda", "train_nmse",
                     "test_nmse", "mc_total"});
}

std::string metrics_row(const MetricsRecord& rec) {
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    return join_row({rec.task, rec.kind, std::to_string(rec.seed), std::to_string(rec.n_nodes),
                     rec.layer_params, format_number(rec.lambda), opt(rec.train_nmse),
                     opt(rec.test_nmse), opt(rec.mc_total)});
}

std::string tolerance_csv(const std::vector<ToleranceRow>& rows) {
    std::string out = join_row({"sigma", "median_nmse", "n_seeds"});
    for (const auto& r : rows)
        out += join_row({format_number(r.sigma), format_number(r.median_nmse),
                         std::to_string(r.n_seeds)});
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParameterError("cannot read '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("failed writing '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace prc::csv
