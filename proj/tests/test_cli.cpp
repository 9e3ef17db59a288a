#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sepscope/chi.hpp"

#include "json.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(const std::string& args) {
    static int counter = 0;
    fs::path err = fs::temp_directory_path() / ("sepscope_cli_err_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::string cmd = std::string(SEPSCOPE_CLI) + " " + args + " 2>" + err.string();
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    std::string out;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
    int status = pclose(p);
    std::ifstream e(err);
    std::stringstream es;
    es << e.rdbuf();
    fs::remove(err);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out, es.str()};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("sepscope_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d / name;
}

}  // namespace

TEST_CASE("prob") {
    auto r = cli("prob --d 2 --formula dunkl");
    CHECK(r.code == 0);
    auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][2] == "8/33");
    CHECK(r.err.find("formula=dunkl") != std::string::npos);

    r = cli("prob --d 4 --formula all");
    CHECK(r.code == 0);
    rows = csv_rows(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][1] == "26/323");
    for (int k = 2; k <= 5; ++k) CHECK(std::abs(std::stod(rows[1][k]) - 26.0 / 323) < 1e-6);

    r = cli("prob --d 2 --formula ansatz --chi epsilon2 --format json");
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["config"]["chi"] == "epsilon2");
    CHECK(std::abs(std::stod(j["rows"][0]["value"].get<std::string>()) - 13.0 / 66) < 1e-10);

    r = cli("prob --d-range 1..3 --formula concise");
    CHECK(r.code == 0);
    CHECK(csv_rows(r.out).size() == 4);
}

TEST_CASE("chi") {
    auto r = cli("chi --d 2 --coeffs");
    CHECK(r.code == 0);
    CHECK(r.out == "power,coefficient\n2,4/3\n4,-1/3\n");

    r = cli("chi --d 8 --coeffs --format json");
    auto j = nlohmann::json::parse(r.out);
    const char* eight[] = {"12740/1287", "-25088/1287", "20160/1287", "-7680/1287", "1155/1287"};
    REQUIRE(j["coefficients"].size() == 5);
    for (int i = 0; i < 5; ++i)
        CHECK(sepscope::Rational(j["coefficients"][i]["coefficient"].get<std::string>()) == sepscope::Rational(eight[i]));

    r = cli("chi --d 1 --eps 0.5");
    auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 2);
    sepscope::BigReal v(rows[1][2]);
    CHECK(abs(v - sepscope::chi1_closed(sepscope::BigReal("0.5"))) < sepscope::BigReal("1e-15"));

    r = cli("chi --d 2 --eps 0.5");
    CHECK(csv_rows(r.out)[1][3] == "5/16");
}

TEST_CASE("usage errors exit 2") {
    CHECK(cli("prob --d 2 --bogus").code == 2);
    CHECK(cli("").code == 2);
    CHECK(cli("prob --d 3 --formula dunkl").code == 2);
    CHECK(cli("prob --d 0").code == 2);
    CHECK(cli("prob --d 2 --d-range 1..2").code == 2);
    CHECK(cli("chi --d 3 --coeffs").code == 2);
    CHECK(cli("chi --d 2").code == 2);
    CHECK(cli("chi --d 2 --eps 1.5").code == 2);
    CHECK(cli("sample --ensemble qutrit --n 10").code == 2);
    CHECK(cli("sample --ensemble qubit4 --n 0").code == 2);
    CHECK(cli("sample --ensemble qubit_qutrit6 --n 10 --axes mu").code == 2);
    CHECK(cli("verify --suite everything").code == 2);
    CHECK(cli("prob --config /nonexistent/file --d 2").code == 2);
}

TEST_CASE("help lists every flag") {
    auto r = cli("--help-all");
    CHECK(r.code == 0);
    for (const char* flag : {"--config", "--d", "--d-range", "--formula", "--chi", "--tol", "--format", "--eps", "--coeffs",
                             "--ensemble", "--n", "--seed", "--workers", "--bins", "--bins2d", "--axes", "--two-negative",
                             "--out", "--suite", "--budget", "--mc-samples", "--inject-chi2-perturbation"})
        CHECK_MESSAGE(r.out.find(std::string(flag) + " ") != std::string::npos, flag);
}

TEST_CASE("sample is deterministic and readable") {
    auto a = scratch("a.csv"), b = scratch("b.csv");
    std::string base = "sample --ensemble qubit4 --n 200000 --seed 7 --axes epsilon,mu,grid2d --out ";
    CHECK(cli(base + a.string()).code == 0);
    CHECK(cli(base + b.string() + " --workers 3").code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a.string() + ".mu.csv") == slurp(b.string() + ".mu.csv"));
    CHECK(slurp(a.string() + ".grid2d.csv") == slurp(b.string() + ".grid2d.csv"));
    CHECK(fs::exists(a.string() + ".config"));

    std::uint64_t total = 0, sep = 0;
    auto rows = csv_rows(slurp(a));
    CHECK(rows[0][0] == "bin_center");
    REQUIRE(rows.size() == 201);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        total += std::stoull(rows[i][1]);
        sep += std::stoull(rows[i][2]);
    }
    CHECK(total == 200000);
    double p = static_cast<double>(sep) / total;
    CHECK(std::abs(p - 8.0 / 33) < 4 * std::sqrt(p * (1 - p) / total));

    auto r = cli("sample --ensemble xstate_complex --n 200000 --format json");
    auto j = nlohmann::json::parse(r.out);
    CHECK(std::abs(j["summary"]["p_hat"].get<double>() - 0.4) < 0.005);
    CHECK(cli("sample --ensemble xstate_complex --n 200000 --format json").out == r.out);
}

TEST_CASE("config file with flag overrides") {
    auto cfg = scratch("run.cfg");
    {
        std::ofstream f(cfg);
        f << "# experiment\nensemble=xstate_real\nn=50000\nseed=11\nformat=json\n";
    }
    auto r = cli("sample --config " + cfg.string() + " --n 30000");
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["config"]["ensemble"] == "xstate_real");
    CHECK(j["config"]["seed"] == 11);
    CHECK(j["config"]["n"] == 30000);

    // an echoed config reproduces the run
    auto out = scratch("echo.json");
    CHECK(cli("sample --ensemble rebit4 --n 20000 --format json --out " + out.string()).code == 0);
    std::string first = slurp(out);
    CHECK(cli("--config " + out.string() + ".config").code == 0);
    CHECK(slurp(out) == first);

    {
        std::ofstream f(cfg);
        f << "ensemble=xstate_real\nno_such_key=1\n";
    }
    CHECK(cli("sample --config " + cfg.string() + " --n 10").code == 2);
}

TEST_CASE("verify") {
    auto r = cli("verify --suite exact");
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["summary"]["pass"] == true);
    CHECK(j["config"]["suite"] == "exact");

    r = cli("verify --suite exact --inject-chi2-perturbation 1e-6");
    CHECK(r.code == 1);
    CHECK(r.err.find("FAIL chi_coefficient.d2.eps4") != std::string::npos);
    j = nlohmann::json::parse(r.out);
    CHECK(j["summary"]["failed"] == 1);
}
