#pragma once

#include "sepscope/chi.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sepscope {

// Two-rebit/two-qubit volume elements in the diagonal-ratio variable and their
// integration-by-parts counterparts.
enum class JacobianKind { h_real, h_complex, jac_la, seven_dim, eleven_dim };
std::string to_string(JacobianKind k);

// Sign-normalized (positive near 0) value for mu > 0; order-20 exact Taylor series in mu - 1 on |mu - 1| < 1e-3.
BigReal jacobian_eval(JacobianKind kind, const BigReal& mu);
// Rational Taylor coefficients about mu = 1, orders 0..order.
std::vector<Rational> jacobian_taylor(JacobianKind kind, unsigned order = 6);
// Integral over (0, 1); over (0, infinity) when whole_line.
BigReal jacobian_integral(JacobianKind kind, const BigReal& tol, bool whole_line = false);

// Complex counterpart of jac_la: the s-integrated two-variable weight at d = 2.
BigReal jac_la_complex(const BigReal& t);

enum class ReconstructionMethod { cubature, monte_carlo };
struct ReconstructionBudget {
    BigReal tolerance{"1e-10"};          // cubature
    std::uint64_t points = 1000000;      // Monte Carlo
    std::uint64_t seed = 1;
};
struct ReconstructionResult {
    BigReal value;
    BigReal error;  // quadrature estimate, or one standard error for Monte Carlo
};
// (r14 r23 r24)^(d-1) over the positivity-and-PPT region of the unit cube, over the positivity normalizer.
ReconstructionResult reconstruct_chi_3d(unsigned d, const BigReal& eps, ReconstructionMethod method,
                                        const ReconstructionBudget& budget = {});
// r24 = 0 with weight (r14 r23)^(d-1); returns eps^d.
ReconstructionResult reconstruct_chi_3d_xstate(unsigned d, const BigReal& eps, ReconstructionMethod method,
                                               const ReconstructionBudget& budget = {});
// pi 4^-d Gamma(d/2+1)^2 / (d^3 Gamma((d+1)/2)^2)
BigReal chi_3d_normalizer(unsigned d);

// Two piecewise s-integrals for mu >= 1; equals chi_1(1/mu).
BigReal reconstruct_chi1_piecewise(const BigReal& mu, const BigReal& tol);
// Two-dimensional forms in (z13, z14) for general mu >= 1, and the fixed mu = 2 pair.
BigReal chi1_planar_integrand(const BigReal& mu, const BigReal& z13, const BigReal& z14);
BigReal chi1_planar_integrand_mu2(const BigReal& z13, const BigReal& z14);
BigReal reconstruct_chi1_planar(const BigReal& mu, const BigReal& tol);

enum class ReducedSetting { sevenDim, elevenDim, sevenDim_minor, elevenDim_minor };
struct ReducedSetReport {
    ReducedSetting setting;
    BigReal value;       // int_0^1 chi J / int_0^1 J (int_1^inf for elevenDim_minor)
    BigReal reference;   // the reference value it is compared with
    BigReal deviation;
};
ReducedSetReport reduced_set_probability(ReducedSetting setting, const BigReal& tol);

struct AbsoluteSeparability {
    BigReal rebit, qubit, quaterbit;
};
AbsoluteSeparability absolute_separability_constants();

struct CheckResult {
    std::string check_id;
    std::string suite;     // exact, numeric, mc
    std::string expected;
    std::string computed;
    double abs_dev = 0;
    bool pass = false;
    bool gating = true;    // exploratory checks are reported but do not fail the battery
};

struct BatteryOptions {
    bool exact = true, numeric = true, mc = true;
    double budget_seconds = 600;
    std::uint64_t mc_samples = 1000000;
    // added to the computed eps^2 coefficient of chi_2 before comparison
    double chi2_coefficient_perturbation = 0;
};

struct BatteryReport {
    std::vector<CheckResult> checks;
    double seconds = 0;
    bool passed() const;
    std::string to_json() const;
};
BatteryReport run_full_battery(const BatteryOptions& options = {});

}  // namespace sepscope
