#ifndef ENTFORCE_TABLE_HPP
#define ENTFORCE_TABLE_HPP

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

// Rectangular result tables with a units header and an ordered metadata
// block, serialized to CSV (# key=value preamble, name[unit] columns, 17
// significant digits) or JSON ({metadata, columns, rows}).

namespace entforce {

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ResultTable {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::string> names;
    std::vector<std::string> units;
    std::vector<std::vector<double>> rows;
};

namespace detail {

inline void validate_table(const ResultTable& t) {
    if (t.names.empty())
        throw std::invalid_argument("ResultTable: at least one column is required");
    if (t.units.size() != t.names.size())
        throw std::invalid_argument("ResultTable: every column needs a unit");
    for (const std::string& u : t.units)
        if (u.empty())
            throw std::invalid_argument("ResultTable: units must be non-empty");
    for (const std::vector<double>& row : t.rows)
        if (row.size() != t.names.size())
            throw std::invalid_argument("ResultTable: ragged row");
}

inline std::string format_value(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace detail

inline std::string render_csv(const ResultTable& t) {
    detail::validate_table(t);
    std::string out;
    for (const auto& [key, value] : t.metadata)
        out += "# " + key + "=" + value + "\n";
    for (std::size_t c = 0; c < t.names.size(); ++c) {
        if (c > 0) out += ',';
        out += t.names[c] + "[" + t.units[c] + "]";
    }
    out += '\n';
    for (const std::vector<double>& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out += ',';
            out += detail::format_value(row[c]);
        }
        out += '\n';
    }
    return out;
}

inline std::string render_json(const ResultTable& t) {
    detail::validate_table(t);
    nlohmann::ordered_json doc;
    doc["metadata"] = nlohmann::ordered_json::object();
    for (const auto& [key, value] : t.metadata) doc["metadata"][key] = value;
    doc["columns"] = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < t.names.size(); ++c)
        doc["columns"].push_back({{"name", t.names[c]}, {"unit", t.units[c]}});
    doc["rows"] = t.rows;
    return doc.dump(2) + "\n";
}

inline std::string render_table(const ResultTable& t, const std::string& format) {
    if (format == "csv") return render_csv(t);
    if (format == "json") return render_json(t);
    throw std::invalid_argument("render_table: format must be csv or json, got '" +
                                format + "'");
}

inline void emit(const ResultTable& t, const std::string& format, const std::string& path) {
    const std::string body = render_table(t, format);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    out.flush();
    if (!out)
        throw IoError("failed while writing '" + path + "'");
}

// Inverse of render_json, used for round-trip checks and downstream tooling.
inline ResultTable parse_json_table(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(std::string("invalid JSON table: ") + e.what());
    }
    ResultTable t;
    if (!doc.is_object() || !doc.contains("columns") || !doc.contains("rows"))
        throw IoError("invalid JSON table: missing 'columns' or 'rows'");
    if (doc.contains("metadata"))
        for (const auto& [key, value] : doc["metadata"].items())
            t.metadata.emplace_back(key, value.get<std::string>());
    for (const auto& col : doc["columns"]) {
        t.names.push_back(col.at("name").get<std::string>());
        t.units.push_back(col.at("unit").get<std::string>());
    }
    t.rows = doc["rows"].get<std::vector<std::vector<double>>>();
    detail::validate_table(t);
    return t;
}

} // namespace entforce

#endif
