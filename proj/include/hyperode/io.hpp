#ifndef HYPERODE_IO_HPP
#define HYPERODE_IO_HPP

#include <string>
#include <vector>

#include "json.hpp"

namespace hyperode::io {

// Shortest-exact decimal form; identical invocations give identical bytes.
std::string format_double(double v);

struct VerificationRow {
    std::string name;
    std::string ref;        // which identity the check exercises
    double value = 0.0;
    double tolerance = 0.0; // 0 = informational row, always passing
    bool pass = true;
};

inline VerificationRow check_row(std::string name, std::string ref, double value, double tol) {
    return {std::move(name), std::move(ref), value, tol, value <= tol};
}
inline VerificationRow info_row(std::string name, std::string ref, double value) {
    return {std::move(name), std::move(ref), value, 0.0, true};
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add_row(std::initializer_list<double> vals) { rows.emplace_back(vals); }
};

std::string to_csv(const Table& table, const std::vector<VerificationRow>& verification);

nlohmann::ordered_json to_json(const std::string& command, const nlohmann::ordered_json& config,
                               const Table& table,
                               const std::vector<VerificationRow>& verification);

// Static SVG 1.1 polyline plot of (col_x, col_y) from the table.
std::string to_svg(const Table& table, std::size_t col_x, std::size_t col_y,
                   const std::string& title);

void write_file(const std::string& path, const std::string& content);

} // namespace hyperode::io

#endif
