#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sepscope/chi.hpp"
#include "sepscope/quadrature.hpp"

#include <random>

using namespace sepscope;

namespace {

bool close(const BigReal& a, const BigReal& b, double tol) { return abs(a - b) <= BigReal(tol) * (1 + abs(b)); }

// chi_1 as the integral of its derivative density from 0 to eps
BigReal chi1_by_quadrature(const BigReal& eps) {
    auto g = [](const BigReal& s) {
        BigReal inv = 1 / s;
        BigReal diff = s - inv;
        return BigReal((s + inv - diff * diff * log((1 + s) / (1 - s)) / 2) / s);
    };
    BigReal pi = pi_value();
    return 4 * integrate_1d(g, BigReal(0), eps, BigReal("1e-30")) / (pi * pi);
}

std::vector<Rational> ratios(std::initializer_list<long> nums, long den) {
    std::vector<Rational> v;
    for (long n : nums) v.emplace_back(n, den);
    return v;
}

}  // namespace

TEST_CASE("chi1 closed form endpoints and domain") {
    CHECK(chi1_closed(BigReal(1)) == 1);
    CHECK(abs(chi1_closed(BigReal("1e-12"))) < BigReal("1e-11"));
    CHECK_THROWS_AS(chi1_closed(BigReal(0)), DomainError);
    CHECK_THROWS_AS(chi1_closed(BigReal("1.5")), DomainError);
}

TEST_CASE("chi1 closed form matches the integrated density") {
    for (const char* e : {"0.5", "0.1", "0.9"}) {
        BigReal eps(e);
        CHECK(close(chi1_closed(eps), chi1_by_quadrature(eps), 1e-12));
    }
}

TEST_CASE("chi1 expansion about one agrees with the closed form at high precision") {
    BigReal step = 1;
    mpfr_mul_2si(step.backend().data(), step.backend().data(), -20, MPFR_RNDN);
    for (const char* f : {"0.5", "1e-3", "1e-9"}) {
        BigReal eps = 1 - step * BigReal(f);
        BigReal reference;
        {
            PrecisionScope scope(1024);
            BigReal e(eps), e2 = e * e;
            BigReal at = log((1 + e) / (1 - e)) / 2;
            reference = 2 * (e2 * (4 * dilog(e) - dilog(e2)) - e2 * e2 * at + e2 * e - e + at) /
                        (pi_value() * pi_value() * e2);
        }
        BigReal got = chi1_closed(eps);
        CHECK(abs((1 - got) - (1 - reference)) <= BigReal("1e-60") * abs(1 - reference));
    }
}

TEST_CASE("chi1 just below one switches to the series without a jump") {
    BigReal step = 1;
    mpfr_mul_2si(step.backend().data(), step.backend().data(), -20, MPFR_RNDN);
    BigReal below = 1 - step - step / 1000, above = 1 - step + step / 1000;
    BigReal a = chi1_closed(below), b = chi1_closed(above);
    CHECK(a < b);
    CHECK(b < 1);
    CHECK(b - a < BigReal("1e-8"));
}

TEST_CASE("master formula reproduces the known even polynomials") {
    CHECK(chi_master_coefficients(2) == ratios({4, -1}, 3));
    CHECK(chi_master_coefficients(4) == ratios({84, -64, 15}, 35));
    CHECK(chi_master_coefficients(8) == ratios({12740, -25088, 20160, -7680, 1155}, 1287));
    CHECK(chi_master_exact(2, Rational(1, 2)) == Rational(5, 16));
}

TEST_CASE("even polynomials sum to one and have d/2 + 1 terms") {
    for (unsigned d = 2; d <= 20; d += 2) {
        auto c = chi_master_coefficients(d);
        CHECK(c.size() == d / 2 + 1);
        Rational s = 0;
        for (const auto& x : c) s += x;
        CHECK(s == 1);
        CHECK(chi_master_exact(d, Rational(0)) == 0);
    }
}

TEST_CASE("master series for d = 1 agrees with the closed form") {
    const BigReal tol("1e-14");
    for (int k = 1; k <= 19; ++k) {
        BigReal eps = BigReal(k) / 20;
        CHECK(abs(chi_master(1, eps, tol) - chi1_closed(eps)) < BigReal("1e-10"));
    }
    CHECK(chi_master(1, BigReal(1), tol) == 1);
}

TEST_CASE("closed coefficient formulas match the polynomials") {
    for (unsigned d = 2; d <= 10; d += 2) {
        auto c = chi_master_coefficients(d);
        auto chk = chi_coefficient_checks(d);
        REQUIRE(chk.constant.rational());
        REQUIRE(chk.eps2.rational());
        CHECK(chk.constant.as_rational() == c[0]);
        CHECK(chk.eps2.as_rational() == c[1]);
    }
    CHECK(chi_coefficient_checks(4).constant.as_rational() == Rational(12, 5));
}

TEST_CASE("chi_d is nondecreasing with chi(0) = 0 and chi(1) = 1") {
    const BigReal tol("1e-14");
    for (unsigned d = 1; d <= 10; ++d) {
        ChiFunction chi(d);
        BigReal prev = chi(BigReal(0), tol);
        CHECK(prev == 0);
        for (int k = 1; k <= 100; ++k) {
            BigReal v = chi(BigReal(k) / 100, tol);
            CHECK(v >= prev - BigReal("1e-14"));
            prev = v;
        }
        CHECK(prev == 1);
    }
}

TEST_CASE("odd d series is 1 at the endpoint and close to it nearby") {
    const BigReal tol("1e-12");
    for (unsigned d : {3u, 5u, 7u}) {
        BigReal v = chi_master(d, BigReal("0.999"), tol);
        CHECK(v < 1);
        CHECK(v > BigReal("0.99"));
    }
}

TEST_CASE("ChiFunction forms") {
    CHECK(ChiFunction(1).form() == ChiForm::closed_polylog);
    CHECK(ChiFunction(6).form() == ChiForm::exact_polynomial);
    CHECK(ChiFunction(5).form() == ChiForm::numeric_series);
    CHECK(ChiFunction(5).coefficients().empty());
    CHECK(*ChiFunction(4).exact(Rational(1, 3)) == chi_master_exact(4, Rational(1, 3)));
    CHECK_FALSE(ChiFunction(3).exact(Rational(1, 3)));
}

TEST_CASE("X-state functions") {
    CHECK(close(chi_xstate(Rational(1), BigReal("0.3")), BigReal("0.3"), 1e-60));
    CHECK(close(chi_xstate(Rational(2), BigReal("0.3")), BigReal("0.09"), 1e-60));
    CHECK(close(chi_xstate(Rational(3, 2), BigReal("0.25")), BigReal("0.125"), 1e-60));
    CHECK(chi_xstate(Rational(4), BigReal(1)) == 1);
}

TEST_CASE("eleven-dimensional full function is chi_2 at the inverse argument") {
    std::mt19937_64 gen(3);
    for (int i = 0; i < 200; ++i) {
        long q = static_cast<long>(gen() % 1000) + 1;
        long p = static_cast<long>(gen() % q) + 1;
        Rational eps(p, q);
        CHECK(chi_master_exact(2, eps) - reduced_set_function_exact(ReducedKind::elevenDim_full, 1 / eps) == 0);
    }
    CHECK(reduced_set_function_exact(ReducedKind::elevenDim_full, Rational(2)) == Rational(5, 16));
    CHECK(reduced_set_function_exact(ReducedKind::elevenDim_full, Rational(1)) == 1);
}

TEST_CASE("reduced set functions are continuous at one and lie in [0, 1]") {
    const BigReal h("1e-30");
    for (auto k : {ReducedKind::sevenDim_minor, ReducedKind::elevenDim_minor, ReducedKind::elevenDim_full}) {
        ReducedSetFunction up{k, ReducedBranch::above_one}, down{k, ReducedBranch::below_one};
        CHECK(close(up(BigReal(1)), BigReal(1), 1e-60));
        CHECK(close(down(BigReal(1)), BigReal(1), 1e-60));
        CHECK(abs(up(1 + h) - down(1 - h)) < BigReal("1e-12"));
        for (const char* m : {"0.05", "0.4", "0.9", "1.1", "2", "7.5"}) {
            BigReal v = reduced_set_function(k, BigReal(m));
            CHECK(v >= 0);
            CHECK(v <= 1);
        }
    }
    CHECK(reduced_set_function_exact(ReducedKind::elevenDim_minor, Rational(1, 2)) == Rational(7, 16));
    CHECK_THROWS_AS(reduced_set_function(ReducedKind::sevenDim_minor, BigReal(0)), DomainError);
}

TEST_CASE("defect: integral form matches 1 - chi1 up to the constant 2 pi^2 / 3") {
    const BigReal tol("1e-20");
    const BigReal scale = 2 * pi_value() * pi_value() / 3;
    for (const char* d : {"0.1", "0.6931471805599453094172321214581765680755", "1", "3"}) {
        DefectReport r = defect(BigReal(d), tol);
        CHECK(close(r.ratio, scale, 1e-15));
        CHECK(close(r.integral, r.scaled, 1e-15));
        // with the extra factor t the ratio is no longer constant
        CHECK(abs(r.ratio_extra_t - scale) > BigReal("1e-3"));
    }
    DefectReport zero = defect(BigReal(0), tol);
    CHECK(close(zero.value, scale - 1, 1e-60));
    CHECK(zero.integral == 0);
    DefectReport far = defect(BigReal(60), tol);
    CHECK(close(far.value, scale, 1e-20));
}
