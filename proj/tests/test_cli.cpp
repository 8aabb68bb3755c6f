#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "hyperode/cli.hpp"
#include "json.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

std::string tmp_path(const std::string& name) {
    return std::string("cli_test_") + name;
}

int run_cli(std::initializer_list<std::string> args) {
    return hyperode::cli::run(std::vector<std::string>(args));
}

} // namespace

TEST_CASE("solve preset: the exponential table") {
    const std::string out = tmp_path("solve_exp.json");
    const int code = run_cli({"solve", "--example", "minus-omega2", "--omega", "1", "--x0", "0",
                              "--format", "json", "--out", out, "--samples", "50"});
    CHECK(code == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["schema"] == 1);
    CHECK(j["command"] == "solve");
    REQUIRE(!j["samples"].empty());
    for (const auto& row : j["samples"]) {
        const double x = row["x"];
        CHECK(std::fabs(double(row["u_top"]) - std::exp(x)) <= 1e-9 * std::exp(x));
        CHECK(std::fabs(double(row["u_bot"]) - std::exp(-x)) <= 1e-9 * std::exp(-x));
    }
    for (const auto& v : j["verification"]) CHECK(v["pass"] == true);
    std::remove(out.c_str());
}

TEST_CASE("geodesic run reports the detected interval for h = 0") {
    const std::string out = tmp_path("geo_zero.json");
    const int code = run_cli({"geodesic", "--h", "0", "--x0", "0", "--phi0", "0.5", "--dphi0",
                              "0", "--format", "json", "--out", out});
    CHECK(code == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    double xm = 0.0, xp = 0.0;
    for (const auto& v : j["verification"]) {
        if (v["name"] == "x-minus") xm = v["value"];
        if (v["name"] == "x-plus") xp = v["value"];
    }
    CHECK(std::fabs(xm + 2.0) <= 1e-6);
    CHECK(std::fabs(xp - 2.0) <= 1e-6);
    std::remove(out.c_str());
}

TEST_CASE("constant negative h surfaces an unbounded-domain notice") {
    const std::string out = tmp_path("geo_minus.json");
    const int code = run_cli({"geodesic", "--h", "-1", "--x0", "0", "--phi0", "1", "--dphi0", "0",
                              "--format", "json", "--out", out});
    CHECK(code == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["config"]["left_stop"] == "span-limit");
    CHECK(j["config"]["right_stop"] == "span-limit");
    bool saw_notice = false;
    for (const auto& v : j["verification"]) {
        const std::string name = v["name"];
        if (name.find("span cap") != std::string::npos) saw_notice = true;
    }
    CHECK(saw_notice);
    std::remove(out.c_str());
}

TEST_CASE("identical invocations produce byte-identical output") {
    const std::string out1 = tmp_path("det1.csv");
    const std::string out2 = tmp_path("det2.csv");
    for (const auto& out : {out1, out2}) {
        const int code = run_cli({"solve", "--h", "sin(x)+2", "--x0", "0", "--phi0", "2.5",
                                  "--dphi0", "0.1", "--seed", "7", "--out", out});
        CHECK(code == 0);
    }
    CHECK(slurp(out1) == slurp(out2));
    std::remove(out1.c_str());
    std::remove(out2.c_str());
}

TEST_CASE("exit codes: parse, domain, numeric") {
    CHECK(run_cli({"solve", "--h", "sin(", "--out", tmp_path("x.csv")}) == 2);
    // initial point on the degeneracy locus
    CHECK(run_cli({"solve", "--h", "1", "--x0", "0", "--phi0", "1", "--dphi0", "0", "--out",
                   tmp_path("y.csv")}) == 3);
    // unbound parameter is a domain error
    CHECK(run_cli({"solve", "--h", "omega*x", "--out", tmp_path("z.csv")}) == 3);
}

TEST_CASE("verify passes on closed-form and generic coefficients") {
    CHECK(run_cli({"verify", "--h", "-1", "--points", "25", "--format", "json", "--out",
                   tmp_path("v1.json")}) == 0);
    CHECK(run_cli({"verify", "--h", "0", "--points", "25", "--out", tmp_path("v2.csv")}) == 0);
    const std::string out = tmp_path("v3.json");
    CHECK(run_cli({"verify", "--h", "x^2 - 3", "--seed", "7", "--points", "25", "--format",
                   "json", "--out", out}) == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    int checks = 0;
    for (const auto& v : j["verification"]) {
        CHECK(v["pass"] == true);
        if (!v["tolerance"].is_null()) ++checks;
    }
    CHECK(checks >= 12);
    for (const std::string f : {"v1.json", "v2.csv", "v3.json"})
        std::remove(tmp_path(f.substr(0, 0)).append(f).c_str());
}

TEST_CASE("map grid on the exponential preset round-trips") {
    const std::string out = tmp_path("map_exp.json");
    const int code = run_cli({"map", "--example", "minus-omega2", "--omega", "1", "--x0", "0",
                              "--grid", "--grid-nx", "8", "--grid-ny", "8", "--format", "json",
                              "--out", out});
    CHECK(code == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    bool saw_roundtrip = false;
    for (const auto& v : j["verification"]) {
        CHECK(v["pass"] == true);
        if (v["name"] == "inverse-roundtrip") saw_roundtrip = true;
    }
    CHECK(saw_roundtrip);
    std::remove(out.c_str());
}

TEST_CASE("map fixed-phi sweep matches the oscillator circle") {
    const std::string out = tmp_path("map_circle.json");
    const int code = run_cli({"map", "--example", "plus-omega2", "--omega", "1", "--xtilde",
                              "0.5236", "--phi", "0.5", "--format", "json", "--out", out});
    CHECK(code == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    for (const auto& v : j["verification"]) CHECK(v["pass"] == true);
    std::remove(out.c_str());
}

TEST_CASE("map curve through its own pair reports a vertical line") {
    const std::string out = tmp_path("map_vert.json");
    const int code = run_cli({"map", "--h", "sin(x)+2", "--x0", "0", "--phi0", "2.2", "--dphi0",
                              "0.1", "--format", "json", "--out", out});
    CHECK(code == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    bool vertical_checked = false;
    for (const auto& v : j["verification"]) {
        CHECK(v["pass"] == true);
        if (v["name"] == "vertical-deviation") vertical_checked = true;
    }
    CHECK(vertical_checked);
    std::remove(out.c_str());
}

TEST_CASE("reduce: identity, scaling, exponential") {
    const std::string out = tmp_path("reduce.json");
    CHECK(run_cli({"reduce", "--a", "1", "--b", "-1", "--format", "json", "--out", out}) == 0);
    auto j = nlohmann::json::parse(slurp(out));
    for (const auto& row : j["samples"]) CHECK(double(row["h"]) == doctest::Approx(-1.0));

    CHECK(run_cli({"reduce", "--a", "2", "--b", "-2", "--format", "json", "--out", out}) == 0);
    j = nlohmann::json::parse(slurp(out));
    for (const auto& row : j["samples"]) {
        CHECK(double(row["h"]) == doctest::Approx(-4.0));
        CHECK(double(row["x"]) == doctest::Approx(double(row["t"]) / 2.0));
    }

    CHECK(run_cli({"reduce", "--a", "exp(t)", "--b", "exp(-t)", "--t-lo", "-2", "--t-hi", "3",
                   "--format", "json", "--out", out}) == 0);
    j = nlohmann::json::parse(slurp(out));
    for (const auto& row : j["samples"]) {
        CHECK(double(row["h"]) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(double(row["x"]) < 1.0);
    }
    // a vanishing inside the interval
    CHECK(run_cli({"reduce", "--a", "t", "--b", "1", "--t-lo", "-1", "--t-hi", "2", "--out",
                   out}) == 3);
    std::remove(out.c_str());
}

TEST_CASE("csv and svg outputs have the expected shape") {
    const std::string csv = tmp_path("shape.csv");
    CHECK(run_cli({"solve", "--example", "zero", "--C1", "2", "--C2", "0", "--x0", "0", "--out",
                   csv}) == 0);
    const std::string body = slurp(csv);
    CHECK(body.rfind("x,u_top,u_top_prime,u_bot,u_bot_prime", 0) == 0);
    CHECK(body.find("# wronskian") != std::string::npos);
    std::remove(csv.c_str());

    const std::string svg = tmp_path("shape.svg");
    CHECK(run_cli({"geodesic", "--h", "0", "--x0", "0", "--phi0", "0.5", "--dphi0", "0",
                   "--format", "svg", "--out", svg}) == 0);
    const std::string pic = slurp(svg);
    CHECK(pic.find("<svg") != std::string::npos);
    CHECK(pic.find("polyline") != std::string::npos);
    std::remove(svg.c_str());
}
