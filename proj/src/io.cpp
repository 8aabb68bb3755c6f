#include "hyperode/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hyperode/errors.hpp"

namespace hyperode::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string to_csv(const Table& table, const std::vector<VerificationRow>& verification) {
    std::ostringstream os;
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        os << (c ? "," : "") << table.columns[c];
    os << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_double(row[c]);
        os << '\n';
    }
    for (const auto& v : verification) {
        os << "# " << v.name << " ref=\"" << v.ref << "\" value=" << format_double(v.value);
        if (v.tolerance > 0.0)
            os << " tolerance=" << format_double(v.tolerance) << (v.pass ? " pass" : " FAIL");
        os << '\n';
    }
    return os.str();
}

nlohmann::ordered_json to_json(const std::string& command, const nlohmann::ordered_json& config,
                               const Table& table,
                               const std::vector<VerificationRow>& verification) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["command"] = command;
    j["config"] = config;
    auto samples = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json s;
        for (std::size_t c = 0; c < row.size() && c < table.columns.size(); ++c)
            s[table.columns[c]] = row[c];
        samples.push_back(std::move(s));
    }
    j["samples"] = std::move(samples);
    auto ver = nlohmann::ordered_json::array();
    for (const auto& v : verification) {
        nlohmann::ordered_json r;
        r["name"] = v.name;
        r["paper_ref"] = v.ref;
        r["value"] = v.value;
        if (v.tolerance > 0.0)
            r["tolerance"] = v.tolerance;
        else
            r["tolerance"] = nullptr;
        r["pass"] = v.pass;
        ver.push_back(std::move(r));
    }
    j["verification"] = std::move(ver);
    return j;
}

std::string to_svg(const Table& table, std::size_t col_x, std::size_t col_y,
                   const std::string& title) {
    if (table.rows.empty()) throw NumericError("nothing to plot");
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (const auto& r : table.rows) {
        xlo = std::min(xlo, r[col_x]);
        xhi = std::max(xhi, r[col_x]);
        ylo = std::min(ylo, r[col_y]);
        yhi = std::max(yhi, r[col_y]);
    }
    if (xhi <= xlo) xhi = xlo + 1.0;
    if (yhi <= ylo) yhi = ylo + 1.0;
    const double W = 640.0, H = 480.0, M = 56.0;
    auto sx = [&](double x) { return M + (x - xlo) / (xhi - xlo) * (W - 2 * M); };
    auto sy = [&](double y) { return H - M - (y - ylo) / (yhi - ylo) * (H - 2 * M); };

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W
       << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
       << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "  <text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << title
       << "</text>\n"
       << "  <line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\"" << H - M
       << "\" stroke=\"black\"/>\n"
       << "  <line x1=\"" << M << "\" y1=\"" << M << "\" x2=\"" << M << "\" y2=\"" << H - M
       << "\" stroke=\"black\"/>\n"
       << "  <text x=\"" << M << "\" y=\"" << H - M + 16 << "\" font-size=\"10\">"
       << format_double(xlo) << "</text>\n"
       << "  <text x=\"" << W - M << "\" y=\"" << H - M + 16
       << "\" text-anchor=\"end\" font-size=\"10\">" << format_double(xhi) << "</text>\n"
       << "  <text x=\"" << M - 4 << "\" y=\"" << H - M << "\" text-anchor=\"end\" font-size=\"10\">"
       << format_double(ylo) << "</text>\n"
       << "  <text x=\"" << M - 4 << "\" y=\"" << M << "\" text-anchor=\"end\" font-size=\"10\">"
       << format_double(yhi) << "</text>\n"
       << "  <polyline fill=\"none\" stroke=\"#1f6feb\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (i) os << ' ';
        os << format_double(sx(table.rows[i][col_x])) << ',' << format_double(sy(table.rows[i][col_y]));
    }
    os << "\"/>\n</svg>\n";
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw NumericError("cannot open output file: " + path);
    f << content;
}

} // namespace hyperode::io
