#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sepscope/probability.hpp"
#include "sepscope/quadrature.hpp"

using namespace sepscope;

namespace {

BigReal absdiff(const BigReal& a, const BigReal& b) { return abs(a - b); }

// s-integral of the two-variable weight, by the real-line rule in log s
BigReal prefactor_oracle(unsigned d, const BigReal& t) {
    auto f = [&](const BigReal& v) {
        BigReal s = exp(v);
        BigReal base = (s + t) * (s * t + 1);
        BigReal w = pow(BigReal(2), static_cast<long>(5 * d + 3)) * pow(s, static_cast<long>(3 * d + 1)) *
                    pow(t, static_cast<long>(2 * d + 1)) * pow(1 - t * t, static_cast<long>(d)) /
                    pow(base, static_cast<long>(3 * d + 2));
        return BigReal(w * s);
    };
    return integrate_real_line(f, BigReal("1e-30")).value;
}

ChiEval chi_of(unsigned d) {
    return [d](const BigReal& e) { return chi_master(d, e, BigReal("1e-20")); };
}

ChiEval power_of(unsigned k) {
    return [k](const BigReal& e) { return BigReal(pow(e, static_cast<long>(k))); };
}

}  // namespace

TEST_CASE("normalization constants") {
    CHECK(denominator_exact(1) == Rational(16, 35));
    CHECK(denominator_exact(2) == Rational(256, 1575));
    CHECK(denominator_exact(4) == Rational(524288, 17342325));
}

TEST_CASE("normalization constants match triangle quadrature for odd and even d") {
    for (unsigned d : {3u, 5u, 6u}) {
        auto f = [d](const BigReal& x, const BigReal& y) {
            return BigReal(pow((1 - x * x) * (1 - y * y) * (x - y), static_cast<long>(d)));
        };
        BigReal q = integrate_2d(f, BigReal("1e-25"));
        CHECK(absdiff(q, to_real(denominator_exact(d))) < BigReal("1e-22") * q);
    }
}

TEST_CASE("closed double sum for even d") {
    CHECK(prob_dunkl_exact(2) == Rational(8, 33));
    CHECK(prob_dunkl_exact(4) == Rational(26, 323));
    CHECK(prob_dunkl_exact(6) == Rational(2999, 103385));
    CHECK(prob_dunkl_exact(8) == Rational(44482, 4091349));
    CHECK_THROWS_AS(prob_dunkl_exact(3), DomainError);
}

TEST_CASE("closed double sum is in (0, 1) and strictly decreasing") {
    Rational prev = 1;
    for (unsigned d = 2; d <= 20; d += 2) {
        Rational p = prob_dunkl_exact(d);
        CHECK(p > 0);
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("concise sum") {
    const BigReal tol("1e-16");
    CHECK(absdiff(prob_concise(Rational(1, 2), tol), to_real(Rational(29, 64))) < BigReal("1e-14"));
    CHECK(absdiff(prob_concise(Rational(1), tol), to_real(Rational(8, 33))) < BigReal("1e-14"));
    CHECK(absdiff(prob_concise(Rational(3, 2), tol), to_real(Rational(36061, 262144))) < BigReal("1e-14"));
    for (unsigned d = 2; d <= 10; d += 2)
        CHECK(absdiff(prob_concise(Rational(d, 2), tol), to_real(prob_dunkl_exact(d))) < BigReal("1e-12"));
}

TEST_CASE("6F5 formula at unit argument") {
    const BigReal tol("1e-12");
    CHECK(absdiff(prob_induced_6f5(1, tol), to_real(Rational(29, 64))) < BigReal("1e-10"));
    CHECK(absdiff(prob_induced_6f5(2, tol), to_real(Rational(8, 33))) < BigReal("1e-10"));
    CHECK(absdiff(prob_induced_6f5(4, tol), to_real(Rational(26, 323))) < BigReal("1e-10"));
}

TEST_CASE("s-integrated weight matches direct s quadrature") {
    CHECK(absdiff(prefactor_s_integral(1, BigReal("0.5")), prefactor_oracle(1, BigReal("0.5"))) < BigReal("1e-25"));
    for (unsigned d : {1u, 2u, 4u}) {
        BigReal t("0.99");
        BigReal a = prefactor_s_integral(d, t), b = prefactor_oracle(d, t);
        CHECK(absdiff(a, b) < BigReal("1e-25") * b);
    }
    CHECK_THROWS_AS(prefactor_s_integral(1, BigReal(1)), DomainError);
    CHECK_THROWS_AS(prefactor_s_integral(1, BigReal(0)), DomainError);
}

TEST_CASE("s-integrated weight is positive on a grid") {
    for (unsigned d : {1u, 2u, 4u})
        for (int k = 1; k < 50; ++k) CHECK(prefactor_s_integral(d, BigReal(k) / 50) > 0);
    CHECK(prefactor_s_integral(2, BigReal("1e-20")) > 0);
    CHECK(prefactor_s_integral(2, BigReal(1) - BigReal("1e-20")) > 0);
}

TEST_CASE("t-integral formula") {
    const BigReal tol("1e-10");
    CHECK(absdiff(prob_via_t_integral(1, tol), to_real(Rational(29, 64))) < BigReal("1e-8"));
    for (unsigned d = 2; d <= 10; d += 2)
        CHECK(absdiff(prob_via_t_integral(d, tol), to_real(prob_dunkl_exact(d))) < BigReal("1e-8"));
}

TEST_CASE("ansatz double integral") {
    const BigReal tol("1e-10");
    BigReal num;
    BigReal p2 = prob_ansatz_2d(2, chi_of(2), tol, &num);
    CHECK(absdiff(p2, to_real(Rational(8, 33))) < BigReal("1e-8"));
    CHECK(absdiff(num, to_real(Rational(2048, 51975))) < BigReal("1e-9"));

    CHECK(absdiff(prob_ansatz_2d(2, power_of(2), tol), to_real(Rational(13, 66))) < BigReal("1e-8"));
    BigReal pi = pi_value();
    CHECK(absdiff(prob_ansatz_2d(1, power_of(1), tol), BigReal(BigReal(16) / 9 - 35 * pi * pi / 256)) <
          BigReal("1e-8"));
    CHECK(absdiff(prob_ansatz_2d(4, power_of(4), tol), to_real(Rational(124, 2907))) < BigReal("1e-8"));
    CHECK(absdiff(prob_ansatz_2d(4, chi_of(4), tol), to_real(Rational(26, 323))) < BigReal("1e-6"));
}

TEST_CASE("ansatz passes ratio arguments in (0, 1]") {
    BigReal lo = 2, hi = -1;
    auto probe = [&](const BigReal& e) {
        lo = std::min(lo, e);
        hi = std::max(hi, e);
        return e;
    };
    prob_ansatz_2d(2, probe, BigReal("1e-6"));
    CHECK(lo > 0);
    CHECK(hi <= 1);
}

TEST_CASE("monotone weights") {
    const BigReal tol("1e-10");
    auto m1 = prob_monotone_sqrt(1, tol);
    CHECK(absdiff(m1.probability, BigReal("0.26223")) < BigReal("5e-5"));
    CHECK(absdiff(m1.denominator, BigReal(2 * pi_value() / 3)) < BigReal("1e-9"));
    auto m2 = prob_monotone_sqrt(2, tol);
    BigReal pi = pi_value();
    CHECK(absdiff(m2.probability, BigReal(1 - 256 / (27 * pi * pi))) < BigReal("1e-9"));
    CHECK_THROWS_AS(prob_monotone_sqrt(4, tol), DomainError);
}

TEST_CASE("cross formula report") {
    const BigReal tol("1e-10");
    auto r2 = probability_report(2, tol);
    REQUIRE(r2.value_dunkl);
    CHECK(*r2.value_dunkl == Rational(8, 33));
    BigReal target = to_real(Rational(8, 33));
    for (const BigReal* v : {&r2.value_concise, &r2.value_6f5, &r2.value_integral, &r2.value_ansatz2d})
        CHECK(absdiff(*v, target) < BigReal("1e-8"));
    CHECK(r2.max_pairwise_dev < BigReal("1e-8"));

    auto r3 = probability_report(3, tol);
    CHECK_FALSE(r3.value_dunkl);
    CHECK(absdiff(r3.value_concise, r3.value_6f5) < BigReal("1e-6"));
    CHECK(absdiff(r3.value_concise, r3.value_integral) < BigReal("1e-6"));
    CHECK(absdiff(r3.value_concise, to_real(Rational(36061, 262144))) < BigReal("1e-6"));

    auto r1 = probability_report(1, tol);
    CHECK(r1.max_pairwise_dev >= 0);
    CHECK(r1.max_pairwise_dev < BigReal("1e-6"));
}
