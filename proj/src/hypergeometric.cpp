#include "sepscope/hypergeometric.hpp"

#include <algorithm>

namespace sepscope {

using boost::multiprecision::denominator;
using boost::multiprecision::numerator;

namespace {

bool is_nonpositive_integer(const Rational& q) { return denominator(q) == 1 && q <= 0; }

unsigned as_unsigned(const Rational& q) { return numerator(q).convert_to<unsigned>(); }

}  // namespace

std::optional<unsigned> terminating_order(const HypergeometricSpec& spec) {
    std::optional<unsigned> m;
    for (const auto& a : spec.upper)
        if (is_nonpositive_integer(a)) {
            unsigned k = as_unsigned(-a);
            if (!m || k < *m) m = k;
        }
    return m;
}

Rational TerminatingSeries::series_at(const Rational& x) const {
    // Horner
    Rational s = 0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) s = s * x + *it;
    return s;
}

BigReal TerminatingSeries::value_at(const BigReal& x) const {
    BigReal s = 0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) s = s * x + to_real(*it);
    return s * prefactor.value();
}

TerminatingSeries hyp_terminating_series(const HypergeometricSpec& spec) {
    auto m = terminating_order(spec);
    if (!m) throw DomainError("hypergeometric spec does not terminate");

    TerminatingSeries out;
    std::vector<bool> pole(spec.lower.size(), false);
    for (std::size_t i = 0; i < spec.lower.size(); ++i) {
        const Rational& b = spec.lower[i];
        if (spec.regularized) {
            if (is_nonpositive_integer(b)) {
                pole[i] = true;
            } else {
                auto g = gamma_rational_closed(b);
                if (!g) throw DomainError("regularized prefactor has no closed gamma form");
                out.prefactor /= *g;
            }
        }
    }

    out.coeffs.reserve(*m + 1);
    for (unsigned j = 0; j <= *m; ++j) {
        Rational c = 1;
        for (const auto& a : spec.upper) c *= pochhammer(a, j);
        c /= factorial(j);
        for (std::size_t i = 0; i < spec.lower.size(); ++i) {
            const Rational& b = spec.lower[i];
            if (pole[i]) {
                Rational shifted = b + j;  // 1/Gamma(b+j)
                if (shifted <= 0) {
                    c = 0;
                } else {
                    c /= factorial(as_unsigned(shifted) - 1);
                }
            } else {
                Rational p = pochhammer(b, j);
                if (p == 0) throw DomainError("lower parameter makes a term undefined");
                c /= p;
            }
        }
        out.coeffs.push_back(c);
    }
    return out;
}

TerminatingValue hyp_terminating_exact(const HypergeometricSpec& spec, const Rational& x) {
    TerminatingSeries s = hyp_terminating_series(spec);
    return {s.series_at(x), s.prefactor};
}

namespace {

// Term generator that copes with regularized lower parameters at poles.
class TermStream {
public:
    TermStream(const HypergeometricSpec& spec, const BigReal& x) : spec_(spec), x_(x) {
        for (const auto& a : spec.upper) up_.push_back(to_real(a));
        for (const auto& b : spec.lower) {
            lo_.push_back(to_real(b));
            pole_.push_back(is_nonpositive_integer(b));
            if (!spec.regularized && pole_.back()) throw DomainError("lower parameter is a nonpositive integer");
        }
        upper_prod_ = 1;
        lower_fac_.resize(lo_.size());
        for (std::size_t i = 0; i < lo_.size(); ++i) lower_fac_[i] = spec.regularized ? rgamma_fn(lo_[i]) : BigReal(1);
        xpow_over_fact_ = 1;
    }

    // term j, then advance
    BigReal next() {
        BigReal t = upper_prod_ * xpow_over_fact_;
        for (const auto& f : lower_fac_) t *= f;
        advance();
        return t;
    }

    std::size_t index() const { return j_; }

private:
    void advance() {
        BigReal jj(j_);
        for (const auto& a : up_) upper_prod_ *= a + jj;
        xpow_over_fact_ = xpow_over_fact_ * x_ / (jj + 1);
        for (std::size_t i = 0; i < lo_.size(); ++i) {
            BigReal prev = lo_[i] + jj;  // b + j, we move to b + j + 1
            if (spec_.regularized) {
                Rational nb = spec_.lower[i] + static_cast<long>(j_ + 1);
                if (pole_[i] && nb <= 0)
                    lower_fac_[i] = 0;
                else if (pole_[i] && nb - 1 <= 0)
                    lower_fac_[i] = rgamma_fn(lo_[i] + jj + 1);
                else
                    lower_fac_[i] /= prev;
            } else {
                lower_fac_[i] /= prev;
            }
        }
        ++j_;
    }

    const HypergeometricSpec& spec_;
    BigReal x_;
    std::vector<BigReal> up_, lo_;
    std::vector<bool> pole_;
    BigReal upper_prod_;
    std::vector<BigReal> lower_fac_;
    BigReal xpow_over_fact_;
    std::size_t j_ = 0;
};

}  // namespace

SeriesReport hyp_pfq_report(const HypergeometricSpec& spec, const BigReal& x, const BigReal& target_rel_err) {
    const std::size_t p = spec.upper.size(), q = spec.lower.size();
    SeriesReport rep;

    if (auto m = terminating_order(spec)) {
        TermStream ts(spec, x);
        BigReal s = 0;
        for (unsigned j = 0; j <= *m; ++j) s += ts.next();
        rep.value = s;
        rep.error_estimate = 0;
        rep.terms = *m + 1;
        return rep;
    }

    const BigReal ax = abs(x);
    if (ax == 0) {
        TermStream ts(spec, x);
        rep.value = ts.next();
        rep.error_estimate = 0;
        rep.terms = 1;
        return rep;
    }
    if (p > q + 1) throw DivergenceError("pFq with p > q+1 diverges for x != 0");
    if (p == q + 1) {
        if (ax > 1) throw DivergenceError("pFq diverges for |x| > 1");
        if (ax == 1) {
            Rational excess = 0;
            for (const auto& b : spec.lower) excess += b;
            for (const auto& a : spec.upper) excess -= a;
            if (excess <= 0) throw DivergenceError("unit-argument pFq needs positive parameter excess");
        }
    }

    BigReal tol = target_rel_err;
    if (tol <= 0) tol = working_epsilon();

    // parameter shifts become positive after this index; ratios are monotone from here on
    long settle = 0;
    for (const auto& a : spec.upper) settle = std::max(settle, static_cast<long>(ceil(to_real(-a)).convert_to<long>()) + 1);
    for (const auto& b : spec.lower) settle = std::max(settle, static_cast<long>(ceil(to_real(-b)).convert_to<long>()) + 1);

    const bool accelerate = (p == q + 1) && ax >= BigReal(9) / 10;
    if (!accelerate) {
        TermStream ts(spec, x);
        BigReal s = 0;
        BigReal t = ts.next();
        for (std::size_t j = 0; j < 200000; ++j) {
            BigReal tn = ts.next();
            s += t;
            if (static_cast<long>(j) > settle && t != 0) {
                BigReal r = abs(tn / t);
                if (p == q + 1) r = std::max(r, ax);
                if (r < 1) {
                    BigReal tail = abs(tn) / (1 - r);
                    if (tail <= tol * abs(s) / 4 || (s == 0 && tail <= tol)) {
                        rep.value = s + tn;
                        rep.error_estimate = tail;
                        rep.terms = j + 2;
                        return rep;
                    }
                }
            }
            t = tn;
        }
        throw ConvergenceError("pFq series budget exhausted", s, abs(t));
    }

    // Levin u on partial sums; extra bits cover the binomial cancellation
    PrecisionScope scope(current_precision_bits() + 192);
    BigReal xx = promote(x);
    TermStream ts(spec, xx);
    LevinU lev;
    BigReal prev = 0;
    bool have_prev = false;
    int agreements = 0;
    BigReal last_diff = 1;
    const std::size_t max_terms = 320;
    for (std::size_t n = 1; n <= max_terms; ++n) {
        lev.add(ts.next());
        if (n < 8 || n % 4 != 0) continue;
        BigReal est = lev.estimate();
        if (have_prev) {
            last_diff = abs(est - prev);
            if (last_diff <= tol * abs(est) / 4) {
                if (++agreements >= 2) {
                    rep.value = est;
                    rep.error_estimate = last_diff;
                    rep.terms = n;
                    rep.accelerated = true;
                    return rep;
                }
            } else {
                agreements = 0;
            }
        }
        prev = est;
        have_prev = true;
    }
    throw ConvergenceError("Levin acceleration did not reach the target", prev, last_diff);
}

BigReal hyp_pfq_numeric(const HypergeometricSpec& spec, const BigReal& x, const BigReal& target_rel_err) {
    return hyp_pfq_report(spec, x, target_rel_err).value;
}

BigReal hyp2f1_balanced(unsigned a, const BigReal& w, const BigReal& one_minus_w) {
    if (a == 0) throw DomainError("hyp2f1_balanced needs a >= 1");
    if (w < 0 || one_minus_w <= 0) throw DomainError("hyp2f1_balanced needs 0 <= w < 1");
    const BigReal eps = working_epsilon();
    BigReal s = 0;
    if (w <= BigReal(1) / 2) {
        BigReal t = 1;
        for (unsigned k = 0; k < 100000; ++k) {
            s += t;
            BigReal ak = BigReal(a + k);
            t = t * ak * ak / (BigReal(2 * a + k) * BigReal(k + 1)) * w;
            if (abs(t) <= eps * abs(s)) return s + t;
        }
        throw ConvergenceError("2F1 direct series", s, abs(t));
    }
    // log expansion about w = 1
    const BigReal& u = one_minus_w;
    const BigReal logu = log(u);
    BigReal c = 1;       // (a)_k^2 / (k!)^2 u^k
    BigReal h_k = 0;     // H_k
    BigReal h_ak = 0;    // H_{a+k-1}
    for (unsigned i = 1; i < a; ++i) h_ak += BigReal(1) / i;
    for (unsigned k = 0; k < 100000; ++k) {
        BigReal t = c * (2 * (h_k - h_ak) - logu);
        s += t;
        if (k > 2 && abs(t) <= eps * abs(s)) break;
        BigReal ak = BigReal(a + k);
        c = c * ak * ak / (BigReal(k + 1) * BigReal(k + 1)) * u;
        h_k += BigReal(1) / (k + 1);
        h_ak += BigReal(1) / (a + k);
    }
    // Gamma(2a) / Gamma(a)^2
    Rational pre = factorial(2 * a - 1) / (factorial(a - 1) * factorial(a - 1));
    return to_real(pre) * s;
}

}  // namespace sepscope
