#pragma once

#include "sepscope/hypergeometric.hpp"

#include <optional>
#include <vector>

namespace sepscope {

enum class ChiForm { closed_polylog, exact_polynomial, numeric_series };

// Separability function chi_d on [0, 1].
class ChiFunction {
public:
    explicit ChiFunction(unsigned d);

    unsigned d() const { return d_; }
    ChiForm form() const { return form_; }
    // Even d: coefficients of eps^d, eps^(d+2), ..., eps^(2d).  Empty otherwise.
    const std::vector<Rational>& coefficients() const { return coeffs_; }

    BigReal operator()(const BigReal& eps, const BigReal& tol) const;
    BigReal operator()(const BigReal& eps) const;
    std::optional<Rational> exact(const Rational& eps) const;

private:
    unsigned d_;
    ChiForm form_;
    std::vector<Rational> coeffs_;
};

// Polylog / inverse-tanh closed form for d = 1; series near eps = 1.
BigReal chi1_closed(const BigReal& eps);

// Master formula; exact polynomial for even d, Levin-accelerated series for odd d.
BigReal chi_master(unsigned d, const BigReal& eps, const BigReal& tol);
std::vector<Rational> chi_master_coefficients(unsigned d);
Rational chi_master_exact(unsigned d, const Rational& eps);

// Closed forms for the constant and eps^2 coefficients of chi_d / eps^d.
struct CoefficientCheck {
    ClosedForm constant;
    ClosedForm eps2;
};
CoefficientCheck chi_coefficient_checks(unsigned d);

// X-state function eps^d, d may be fractional.
BigReal chi_xstate(const Rational& d, const BigReal& eps);

enum class ReducedKind { sevenDim_minor, elevenDim_minor, elevenDim_full };
enum class ReducedBranch { above_one, below_one };

struct ReducedSetFunction {
    ReducedKind kind;
    ReducedBranch branch;
    // Evaluates the fixed branch formula, also usable as a one-sided limit at mu = 1.
    BigReal operator()(const BigReal& mu) const;
};

BigReal reduced_set_function(ReducedKind kind, const BigReal& mu);
// elevenDim kinds only
Rational reduced_set_function_exact(ReducedKind kind, const Rational& mu);

struct DefectReport {
    BigReal delta;
    BigReal value;               // 2 pi^2/3 - chi1(exp(-delta))
    BigReal scaled;              // (2 pi^2/3) (1 - chi1(exp(-delta)))
    BigReal integral;            // (16/3) int_0^delta cosh t - sinh^2 t log((e^t+1)/(e^t-1))
    BigReal integral_extra_t;    // same with an extra factor t on the log term
    BigReal ratio;               // integral / (1 - chi1)
    BigReal ratio_extra_t;
};
DefectReport defect(const BigReal& delta, const BigReal& tol);

}  // namespace sepscope
