#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sepscope/verification.hpp"

#include "json.hpp"

#include <cmath>

using namespace sepscope;

namespace {

const JacobianKind all_kinds[] = {JacobianKind::h_real, JacobianKind::h_complex, JacobianKind::jac_la,
                                  JacobianKind::seven_dim, JacobianKind::eleven_dim};

BigReal horner_even(std::initializer_list<long> c, const BigReal& m) {
    BigReal acc = 0, m2 = m * m;
    std::vector<long> v(c);
    for (std::size_t i = v.size(); i-- > 0;) acc = acc * m2 + v[i];
    return acc;
}

// closed forms evaluated naively at 2048 bits
BigReal naive(JacobianKind k, const BigReal& m) {
    PrecisionScope ps(2048);
    BigReal mu = promote(m), lg = log(mu), q = mu * mu - 1;
    switch (k) {
        case JacobianKind::h_real:
            return BigReal(pow(mu, 4) * (-5 * horner_even({-5, -32, 0, 32, 5}, mu) + 12 * horner_even({1, 16, 36, 16, 1}, mu) * lg) /
                           (1890 * pow(q, 9)));
        case JacobianKind::jac_la:
            return BigReal(pow(mu, 3) * (640 * horner_even({-5, -32, 0, 32, 5}, mu) - 1536 * horner_even({1, 16, 36, 16, 1}, mu) * lg) /
                           (3 * pow(q, 8)));
        case JacobianKind::h_complex:
            return BigReal(pow(mu, 7) *
                           (-q * horner_even({363, 10310, 58673, 101548, 58673, 10310, 363}, mu) +
                            140 * (mu * mu + 1) * horner_even({1, 48, 393, 832, 393, 48, 1}, mu) * lg) /
                           (1801800 * pow(q, 15)));
        case JacobianKind::seven_dim:
            return BigReal(pow(mu, 3) * (horner_even({11, 27, -27, -11}, mu) + 6 * horner_even({1, 9, 9, 1}, mu) * lg) /
                           (210 * pow(q, 7)));
        case JacobianKind::eleven_dim:
            return BigReal(pow(mu, 5) *
                           (q * horner_even({142, 2272, 6397, 4397, 647, 5}, mu) -
                            60 * horner_even({1, 30, 150, 200, 75, 6}, mu) * lg) /
                           (83160 * pow(q, 12)));
    }
    return 0;
}

}  // namespace

TEST_CASE("jacobians agree with naive closed forms away from mu = 1") {
    for (JacobianKind k : all_kinds)
        for (const char* m : {"0.01", "0.3", "0.7", "0.99", "1.01", "1.5", "4", "40"}) {
            BigReal a = jacobian_eval(k, BigReal(m)), b = naive(k, BigReal(m));
            INFO(to_string(k), " mu=", std::string(m), " a=", to_string(a), " b=", to_string(b));
            CHECK(abs(a / b - 1) < BigReal("1e-60"));
        }
}

TEST_CASE("Taylor branch joins the direct branch") {
    for (JacobianKind k : all_kinds)
        for (const char* m : {"0.9990001", "0.9999", "1.0000001", "1.0009999"}) {
            BigReal a = jacobian_eval(k, BigReal(m)), b = naive(k, BigReal(m));
            INFO(to_string(k), " mu=", std::string(m), " a=", to_string(a), " b=", to_string(b));
            CHECK(abs(a / b - 1) < BigReal("1e-50"));
        }
    // jac_la vanishes at mu = 1 exactly
    CHECK(jacobian_taylor(JacobianKind::jac_la)[0] == 0);
    CHECK(jacobian_taylor(JacobianKind::seven_dim)[0] == Rational(1, 9800));
}

TEST_CASE("jacobian integrals") {
    const BigReal pi = pi_value(), tol("1e-20");
    CHECK(abs(jacobian_integral(JacobianKind::h_real, tol) * 2293760 / (pi * pi) - 1) < BigReal("1e-18"));
    CHECK(abs(jacobian_integral(JacobianKind::jac_la, tol) - to_real(Rational(16, 35))) < BigReal("1e-18"));
    CHECK(abs(328007680 * jacobian_integral(JacobianKind::h_complex, tol) - to_real(Rational(256, 1575))) < BigReal("1e-18"));
    CHECK(abs(jacobian_integral(JacobianKind::seven_dim, tol, true) * 5040 - 1) < BigReal("1e-18"));
    CHECK(abs(jacobian_integral(JacobianKind::eleven_dim, tol, true) * 9979200 - 1) < BigReal("1e-18"));
    // scaling the real integrand to the jac_la normalization
    CHECK(Rational(1048576, 1) / Rational(2293760) == Rational(16, 35));
}

TEST_CASE("ratio identities on a 100-point grid") {
    for (int i = 0; i < 100; ++i) {
        BigReal t = (BigReal(i) + BigReal("0.5")) / 100;
        BigReal real = jacobian_eval(JacobianKind::jac_la, t) / jacobian_eval(JacobianKind::h_real, t);
        CHECK(abs(real / (80640 * (1 - t * t) / t) - 1) < BigReal("1e-40"));
        BigReal cplx = jac_la_complex(t) / jacobian_eval(JacobianKind::h_complex, t);
        CHECK(abs(cplx / (210862080 * pow(1 - t * t, 2) / (t * t)) - 1) < BigReal("1e-30"));
    }
}

TEST_CASE("jacobians are positive on (0, 1)") {
    for (JacobianKind k : all_kinds)
        for (int i = 1; i <= 1000; ++i) CHECK(jacobian_eval(k, BigReal(i) / 1001) > 0);
}

TEST_CASE("3D reconstruction by cubature") {
    CHECK(abs(reconstruct_chi_3d(2, BigReal("0.5"), ReconstructionMethod::cubature).value - to_real(Rational(5, 16))) <
          BigReal("1e-9"));
    for (unsigned d : {1u, 2u, 3u, 4u})
        CHECK(abs(reconstruct_chi_3d(d, BigReal(1), ReconstructionMethod::cubature).value - 1) < BigReal("1e-9"));
    // against the closed chi_1 at a few ratios
    for (const char* e : {"0.2", "0.6", "0.9"})
        CHECK(abs(reconstruct_chi_3d(1, BigReal(e), ReconstructionMethod::cubature).value - chi1_closed(BigReal(e))) <
              BigReal("1e-8"));
    CHECK(abs(chi_3d_normalizer(1) - pi_value() * pi_value() / 16) < BigReal("1e-60"));
    for (unsigned d : {1u, 2u, 4u})
        for (const char* e : {"0.3", "0.7"})
            CHECK(abs(reconstruct_chi_3d_xstate(d, BigReal(e), ReconstructionMethod::cubature).value -
                      pow(BigReal(e), static_cast<long>(d))) < BigReal("1e-8"));
    CHECK_THROWS_AS(reconstruct_chi_3d(0, BigReal("0.5"), ReconstructionMethod::cubature), DomainError);
    CHECK_THROWS_AS(reconstruct_chi_3d(2, BigReal("1.5"), ReconstructionMethod::cubature), DomainError);
}

TEST_CASE("Monte Carlo reconstruction error shrinks with budget") {
    const BigReal target = to_real(Rational(5, 16));
    double small = 0, large = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        ReconstructionBudget b;
        b.seed = seed;
        b.points = 100000;
        auto r1 = reconstruct_chi_3d(2, BigReal("0.5"), ReconstructionMethod::monte_carlo, b);
        b.points = 400000;
        auto r4 = reconstruct_chi_3d(2, BigReal("0.5"), ReconstructionMethod::monte_carlo, b);
        small += abs(r1.value - target).convert_to<double>();
        large += abs(r4.value - target).convert_to<double>();
        CHECK(abs(r4.value - target) < 5 * r4.error);
        CHECK(r4.error < r1.error);
    }
    CHECK(large <= 0.6 * small);
    ReconstructionBudget b;
    b.points = 200000;
    auto x = reconstruct_chi_3d_xstate(2, BigReal("0.5"), ReconstructionMethod::monte_carlo, b);
    CHECK(abs(x.value - BigReal("0.25")) < 5 * x.error);
}

TEST_CASE("piecewise and planar chi_1") {
    for (const char* m : {"1.5", "2", "3", "5"})
        CHECK(abs(reconstruct_chi1_piecewise(BigReal(m), BigReal("1e-14")) - chi1_closed(BigReal(1 / BigReal(m)))) <
              BigReal("1e-10"));
    CHECK(abs(reconstruct_chi1_piecewise(BigReal(1), BigReal("1e-14")) - 1) < BigReal("1e-10"));
    CHECK(abs(reconstruct_chi1_planar(BigReal(2), BigReal("1e-12")) - BigReal("0.53116769457156905599854")) <
          BigReal("1e-10"));
    CHECK(abs(reconstruct_chi1_planar(BigReal(3), BigReal("1e-12")) - chi1_closed(BigReal(1) / 3)) < BigReal("1e-10"));
    // pointwise: general form at mu = 2 against the mu = 2 pair after z14 -> z14 / 2
    for (int i = 1; i < 20; ++i)
        for (int j = -19; j < 20; ++j) {
            if (j == 0) continue;
            BigReal z13 = BigReal(2 * i - 20) / 20, w = sqrt(1 - z13 * z13) * j / 20;
            CHECK(abs(chi1_planar_integrand(2, z13, w / 2) / 2 - chi1_planar_integrand_mu2(z13, w)) < BigReal("1e-40"));
        }
    CHECK_THROWS_AS(reconstruct_chi1_piecewise(BigReal("0.5"), BigReal("1e-10")), DomainError);
}

TEST_CASE("reduced sets") {
    auto r7 = reduced_set_probability(ReducedSetting::sevenDim_minor, BigReal("1e-16"));
    CHECK(r7.deviation < BigReal("1e-12"));
    auto r11 = reduced_set_probability(ReducedSetting::elevenDim_minor, BigReal("1e-16"));
    CHECK(r11.deviation < BigReal("1e-12"));
    // full-set readings are reported, not asserted against the reference values
    auto f7 = reduced_set_probability(ReducedSetting::sevenDim, BigReal("1e-14"));
    CHECK(f7.value > 0);
    CHECK(f7.value < 1);
    CHECK(abs(f7.reference - BigReal("0.4197023")) < BigReal("1e-12"));
}

TEST_CASE("absolute separability constants") {
    auto a = absolute_separability_constants();
    CHECK(abs(a.rebit - BigReal("0.0348338")) < BigReal("1e-6"));
    CHECK(abs(a.qubit - BigReal("0.00365826")) < BigReal("1e-7"));
    // the quaterbit closed form evaluates to 3.98703e-5
    CHECK(abs(a.quaterbit - BigReal("3.9870347068019928855e-5")) < BigReal("1e-20"));
}

TEST_CASE("battery exact suite and injected failure") {
    BatteryOptions o;
    o.numeric = o.mc = false;
    auto r = run_full_battery(o);
    CHECK(r.passed());
    CHECK(r.checks.size() > 10);
    for (const auto& c : r.checks) CHECK_MESSAGE(c.pass, c.check_id);

    o.chi2_coefficient_perturbation = 1e-6;
    auto bad = run_full_battery(o);
    CHECK_FALSE(bad.passed());
    int failed = 0;
    for (const auto& c : bad.checks)
        if (!c.pass) {
            ++failed;
            CHECK(c.check_id == "chi_coefficient.d2.eps4");
            CHECK(c.abs_dev == doctest::Approx(1e-6));
        }
    CHECK(failed == 1);

    auto j = nlohmann::json::parse(bad.to_json());
    CHECK(j["summary"]["failed"] == 1);
    CHECK(j["summary"]["pass"] == false);
    CHECK(j["checks"].size() == bad.checks.size());
}

TEST_CASE("battery budget stops further checks") {
    BatteryOptions o;
    o.numeric = o.mc = false;
    o.budget_seconds = 0;
    auto r = run_full_battery(o);
    CHECK_FALSE(r.passed());
    for (const auto& c : r.checks) CHECK(c.computed == "budget exhausted");
}
