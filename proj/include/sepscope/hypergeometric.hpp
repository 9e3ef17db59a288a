#pragma once

#include "sepscope/special.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace sepscope {

struct HypergeometricSpec {
    std::vector<Rational> upper;
    std::vector<Rational> lower;
    bool regularized = false;
};

struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// m when some upper parameter equals -m (smallest such m), otherwise nullopt.
std::optional<unsigned> terminating_order(const HypergeometricSpec& spec);

// value = prefactor * sum_j coeffs[j] x^j.  prefactor is 1 unless regularized.
struct TerminatingSeries {
    std::vector<Rational> coeffs;
    ClosedForm prefactor;

    Rational series_at(const Rational& x) const;
    BigReal value_at(const BigReal& x) const;
};

TerminatingSeries hyp_terminating_series(const HypergeometricSpec& spec);

// Exact value at rational x.  The closed prefactor multiplies the rational sum.
struct TerminatingValue {
    Rational series;
    ClosedForm prefactor;
    bool is_rational() const { return prefactor.rational(); }
    Rational as_rational() const { return series * prefactor.as_rational(); }
    BigReal value() const { return to_real(series) * prefactor.value(); }
};

TerminatingValue hyp_terminating_exact(const HypergeometricSpec& spec, const Rational& x);

struct SeriesReport {
    BigReal value;
    BigReal error_estimate;
    std::size_t terms = 0;
    bool accelerated = false;
};

// Convergent pFq at x; Levin u on partial sums when |x| >= 0.9.
SeriesReport hyp_pfq_report(const HypergeometricSpec& spec, const BigReal& x, const BigReal& target_rel_err);
BigReal hyp_pfq_numeric(const HypergeometricSpec& spec, const BigReal& x, const BigReal& target_rel_err);

// 2F1(a, a; 2a; w) for integer a >= 1 and 0 <= w < 1, with the logarithmic
// expansion in 1 - w when w > 1/2.
BigReal hyp2f1_balanced(unsigned a, const BigReal& w, const BigReal& one_minus_w);

}  // namespace sepscope
