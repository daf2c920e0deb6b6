#include "table.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"
#include "scenario.hpp"

namespace gpd::cli {

void Table::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("row width does not match table " + name);
    rows.push_back(std::move(row));
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string csv_field(const Cell& c) {
    if (std::holds_alternative<double>(c)) return format_double(std::get<double>(c));
    if (std::holds_alternative<std::int64_t>(c)) return std::to_string(std::get<std::int64_t>(c));
    if (std::holds_alternative<std::string>(c)) {
        const auto& s = std::get<std::string>(c);
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        return q + "\"";
    }
    return "";
}

} // namespace

void write_csv(const Table& t, std::ostream& os) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i].header();
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(row[i]);
        os << '\n';
    }
}

void write_json(const Table& t, std::ostream& os) {
    nlohmann::ordered_json j;
    j["schema"] = kSchema;
    j["table"] = t.name;
    j["columns"] = nlohmann::ordered_json::array();
    for (const auto& c : t.columns)
        j["columns"].push_back({{"quantity", c.quantity}, {"measure", c.measure}, {"units", c.units}});
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        auto r = nlohmann::ordered_json::array();
        for (const auto& c : row) {
            if (std::holds_alternative<double>(c)) {
                const double v = std::get<double>(c);
                if (std::isfinite(v)) r.push_back(v);
                else r.push_back(format_double(v));
            } else if (std::holds_alternative<std::int64_t>(c)) {
                r.push_back(std::get<std::int64_t>(c));
            } else if (std::holds_alternative<std::string>(c)) {
                r.push_back(std::get<std::string>(c));
            } else {
                r.push_back(nullptr);
            }
        }
        j["rows"].push_back(std::move(r));
    }
    os << j.dump(1) << '\n';
}

} // namespace gpd::cli
