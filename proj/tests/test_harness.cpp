#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sepscope/harness.hpp"

#include "json.hpp"

#include <cmath>

using namespace sepscope;

namespace {

BinnedEstimate random_bins(std::uint64_t seed, BinAxis axis = BinAxis::epsilon, int bins = 20) {
    RngStream rng(seed, 0);
    auto b = BinnedEstimate::zero(axis, bins);
    for (int i = 0; i < 500; ++i) {
        if (axis == BinAxis::grid2d)
            b.record(rng.uniform(), rng.uniform(), rng.uniform() < 0.3);
        else
            b.record(rng.uniform(), rng.uniform() < 0.3);
    }
    return b;
}

bool same(const BinnedEstimate& a, const BinnedEstimate& b) {
    return a.axis == b.axis && a.bin_count == b.bin_count && a.totals == b.totals && a.separables == b.separables;
}

ExperimentConfig small(Ensemble e, std::uint64_t n) {
    ExperimentConfig c;
    c.ensemble = e;
    c.sample_count = n;
    c.seed = 7;
    c.axes = matrix_size(e) == 6 ? std::vector<BinAxis>{BinAxis::epsilon, BinAxis::tau, BinAxis::grid2d}
                                 : std::vector<BinAxis>{BinAxis::epsilon, BinAxis::mu, BinAxis::grid2d};
    return c;
}

}  // namespace

TEST_CASE("bin assignment") {
    CHECK(bin_index(0.0, 200) == 0);
    CHECK(bin_index(1.0, 200) == 199);
    CHECK(bin_index(0.005, 200) == 1);
    CHECK(bin_index(0.00499, 200) == 0);
    CHECK(bin_index(0.999999, 200) == 199);
    CHECK(BinnedEstimate::zero(BinAxis::grid2d, 80).cells() == 6400);
    CHECK(BinnedEstimate::zero(BinAxis::epsilon, 200).cells() == 200);
}

TEST_CASE("merge laws") {
    auto a = random_bins(1), b = random_bins(2), c = random_bins(3);
    auto z = BinnedEstimate::zero(BinAxis::epsilon, 20);
    CHECK(same(merge(a, z), a));
    CHECK(same(merge(a, b), merge(b, a)));
    CHECK(same(merge(merge(a, b), c), merge(a, merge(b, c))));
    CHECK(merge(merge(a, b), c).total_count() == 1500);
    for (std::size_t i = 0; i < a.cells(); ++i) CHECK(a.separables[i] <= a.totals[i]);
    CHECK_THROWS_AS(merge(a, BinnedEstimate::zero(BinAxis::epsilon, 21)), std::invalid_argument);
    CHECK_THROWS_AS(merge(a, BinnedEstimate::zero(BinAxis::mu, 20)), std::invalid_argument);
    auto g = random_bins(4, BinAxis::grid2d, 8);
    CHECK(same(merge(g, random_bins(5, BinAxis::grid2d, 8)), merge(random_bins(5, BinAxis::grid2d, 8), g)));
}

TEST_CASE("config validation") {
    ExperimentConfig c;
    c.sample_count = 0;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    c = ExperimentConfig{};
    c.ensemble = Ensemble::qubit_qutrit6;
    c.axes = {BinAxis::mu};
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    c = ExperimentConfig{};
    c.axes = {BinAxis::tau};
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    c = ExperimentConfig{};
    c.worker_count = 0;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    CHECK(parse_ensemble("qubit4") == Ensemble::qubit4);
    CHECK_FALSE(parse_ensemble("qutrit"));
    CHECK(parse_axis("grid2d") == BinAxis::grid2d);
}

TEST_CASE("worker count does not change results") {
    for (Ensemble e : {Ensemble::qubit4, Ensemble::rebit_retrit6}) {
        auto c = small(e, 4000);
        auto one = run_experiment(c);
        c.worker_count = 8;
        auto eight = run_experiment(c);
        CHECK(one.total == eight.total);
        CHECK(one.separable == eight.separable);
        CHECK(one.two_negative == eight.two_negative);
        REQUIRE(one.bins.size() == eight.bins.size());
        for (std::size_t k = 0; k < one.bins.size(); ++k) {
            CHECK(same(one.bins[k], eight.bins[k]));
            CHECK(eight.bins[k].total_count() == 4000);
        }
    }
}

TEST_CASE("reports are byte-identical across runs") {
    auto c = small(Ensemble::qubit4, 3000);
    auto r1 = run_experiment(c), r2 = run_experiment(c);
    auto chi = reference_chi(c.ensemble);
    CHECK(format_json(r1, chi) == format_json(r2, chi));
    CHECK(format_csv(r1.bins[0], chi) == format_csv(r2.bins[0], chi));
    c.seed = 8;
    CHECK(format_json(run_experiment(c), chi) != format_json(r1, chi));
}

TEST_CASE("report formats") {
    auto c = small(Ensemble::xstate_real, 2000);
    auto r = run_experiment(c);
    auto chi = reference_chi(c.ensemble);
    std::string csv = format_csv(r.bins[0], chi);
    CHECK(csv.rfind("bin_center,total,separable,p_hat,chi,residual\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 201);
    std::string grid = format_csv(r.bins[2], chi);
    CHECK(std::count(grid.begin(), grid.end(), '\n') == 6401);

    auto j = nlohmann::json::parse(format_json(r, chi));
    CHECK(j["config"]["ensemble"] == "xstate_real");
    CHECK(j["config"]["n"] == 2000);
    CHECK(j["summary"]["total"] == 2000);
    CHECK(j["bins"].size() == 3);
    CHECK(j["bins"][0]["residual"].size() == 200);
    CHECK_FALSE(j["bins"][1].contains("chi"));
    CHECK(j["bins"][2]["total"].size() == 6400);
    CHECK_FALSE(j["summary"].contains("two_negative"));

    auto six = nlohmann::json::parse(format_json(run_experiment(small(Ensemble::qubit_qutrit6, 500)), {}));
    CHECK(six["summary"].contains("two_negative_fraction"));
    CHECK_FALSE(six["bins"][0].contains("chi"));
}

TEST_CASE("estimate and standard error") {
    auto c = small(Ensemble::qubit4, 100000);
    c.axes = {};
    auto r = run_experiment(c);
    CHECK(std::abs(r.p_hat - 8.0 / 33) < 4 * r.stderr_p);
    CHECK(r.stderr_p == doctest::Approx(std::sqrt(r.p_hat * (1 - r.p_hat) / 1e5)));

    c.ensemble = Ensemble::xstate_complex;
    double prev = 0;
    for (std::uint64_t n : {10000u, 100000u, 1000000u}) {
        c.sample_count = n;
        double se = run_experiment(c).stderr_p;
        if (prev > 0) CHECK(prev / se == doctest::Approx(std::sqrt(10.0)).epsilon(0.2));
        prev = se;
    }
}

TEST_CASE("residual curves") {
    auto c = small(Ensemble::xstate_real, 200000);
    c.axes = {BinAxis::epsilon};
    auto r = run_experiment(c);
    auto rows = residual_curve(r.bins[0], reference_chi(c.ensemble));
    REQUIRE(rows.size() == 200);
    // X-state relation is exact: pooled residual within noise
    double num = 0, var = 0;
    std::uint64_t n = 0;
    for (const auto& row : rows) {
        CHECK(row.reliable == (row.total >= 100));
        if (!row.reliable) continue;
        num += row.residual * row.total;
        var += row.chi * (1 - row.chi) * row.total;
        n += row.total;
    }
    CHECK(std::abs(num / n) < 4 * std::sqrt(var) / n + 0.003);

    // the empirical curve itself as chi
    const auto& b = r.bins[0];
    auto self = [&](double x) {
        int i = bin_index(x, b.bin_count);
        return b.totals[i] ? static_cast<double>(b.separables[i]) / b.totals[i] : 0.0;
    };
    for (const auto& row : residual_curve(b, self)) CHECK(row.residual == 0);

    CHECK_THROWS_AS(residual_curve(BinnedEstimate::zero(BinAxis::grid2d, 4), self), std::invalid_argument);
    auto floor_rows = residual_curve(b, self, 1000000);
    for (const auto& row : floor_rows) CHECK_FALSE(row.reliable);
}
