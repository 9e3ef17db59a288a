#pragma once

#include "sepscope/chi.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace sepscope {

struct FormulaParams {
    unsigned d = 2;
    Rational alpha() const { return Rational(d, 2); }
    unsigned k = 0;  // induced-measure index, only 0 supported
};

using ChiEval = std::function<BigReal(const BigReal&)>;

// Normalization over the full region at alpha = d/2, as an exact rational.
Rational denominator_exact(unsigned d);

// Closed double sum for even d.
Rational prob_dunkl_exact(unsigned d);

// Sum over i >= 0 of the concise term at alpha + i.
BigReal prob_concise(const Rational& alpha, const BigReal& tol);
BigReal concise_term(const BigReal& alpha);

// 1 - prefactor * regularized 6F5 at unit argument.
BigReal prob_induced_6f5(unsigned d, const BigReal& tol);

// s-integrated weight in t, computed from 2F1(3d+2, 3d+2; 6d+4; 1 - t^2).
BigReal prefactor_s_integral(unsigned d, const BigReal& t);

BigReal prob_via_t_integral(unsigned d, const BigReal& tol);

// Double integral of chi(eps(x, y)) against (1-x^2)^d (1-y^2)^d (x-y)^d over y <= x,
// divided by denominator_exact(d).  numerator is written when non-null.
BigReal prob_ansatz_2d(unsigned d, const ChiEval& chi, const BigReal& tol, BigReal* numerator = nullptr);

// Same with weights (1-x^2)^(-d/4) (1-y^2)^(-d/4) (x-y)^d, d in {1, 2}.
struct MonotoneResult {
    BigReal probability;
    BigReal numerator;
    BigReal denominator;
};
MonotoneResult prob_monotone_sqrt(unsigned d, const BigReal& tol);

struct ProbabilityReport {
    unsigned d = 0;
    std::optional<Rational> value_dunkl;
    BigReal value_concise;
    BigReal value_6f5;
    BigReal value_integral;
    BigReal value_ansatz2d;
    BigReal max_pairwise_dev;
};

ProbabilityReport probability_report(unsigned d, const BigReal& tol);
std::vector<ProbabilityReport> cross_formula_report(unsigned d_max, const BigReal& tol);

}  // namespace sepscope
