// table.hpp: Column-labelled result tables and their CSV/JSON writers

#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace gpd::cli {

// Every column states what it holds, under which measure (Z, H, or "-" for
// measure-free columns) and in which units.
struct Column {
    std::string quantity;
    std::string measure;
    std::string units;

    std::string header() const { return quantity + "|" + measure + "|" + units; }
};

using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

struct Table {
    std::string name;
    std::vector<Column> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);
};

// Doubles at 17 significant digits; missing values are empty fields.
void write_csv(const Table& t, std::ostream& os);
// {"schema", "table", "columns": [...], "rows": [[...]]}; missing values are null.
void write_json(const Table& t, std::ostream& os);

std::string format_double(double v);

} // namespace gpd::cli
