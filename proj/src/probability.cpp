#include "sepscope/probability.hpp"
#include "sepscope/quadrature.hpp"

#include <algorithm>
#include <stdexcept>

namespace sepscope {

namespace {

unsigned bits_for(const BigReal& tol) {
    return std::max(current_precision_bits(), bits_for_tolerance(tol.convert_to<double>()));
}

ClosedForm gamma_closed(const Rational& a) {
    auto g = gamma_rational_closed(a);
    if (!g) throw DomainError("gamma value has no closed form at " + to_string(a));
    return *g;
}

Rational pow_rational(const Rational& b, unsigned n) {
    Rational r = 1;
    for (unsigned i = 0; i < n; ++i) r *= b;
    return r;
}

// ratio argument folded into (0, 1]
BigReal folded_ratio(const BigReal& eps) {
    BigReal e = eps > 1 ? BigReal(1 / eps) : eps;
    if (!(e > 0) || e > 1) throw std::logic_error("ratio argument outside (0, 1]");
    return e;
}

// Weight of the (eps, v) parametrization with p = eps e^v, q = e^v, x = (1-p^2)/(1+p^2),
// y = (1-q^2)/(1+q^2), Jacobian 16 p q^3 / ((1+p^2)^2 (1+q^2)^2).
// power is the exponent on (1-x^2) and (1-y^2).
BigReal pq_weight(unsigned d, const BigReal& power, bool integer_power, const BigReal& eps, const BigReal& v) {
    BigReal q = exp(v), p = eps * q;
    BigReal A = 1 + p * p, B = 1 + q * q;
    BigReal onex = 4 * p * p / (A * A), oney = 4 * q * q / (B * B);
    BigReal diff = 2 * (q * q - p * p) / (A * B);
    BigReal w = pow(diff, static_cast<long>(d));
    if (integer_power) {
        long k = power.convert_to<long>();
        w *= pow(onex * oney, k);
    } else {
        w *= pow(onex * oney, power);
    }
    return BigReal(w * 16 * p * q * q * q / (A * A * B * B));
}

BigReal pq_kernel(unsigned d, const BigReal& power, bool integer_power, const BigReal& eps, const BigReal& tol) {
    return integrate_real_line([&](const BigReal& v) { return pq_weight(d, power, integer_power, eps, v); }, tol)
        .value;
}

}  // namespace

Rational denominator_exact(unsigned d) {
    if (d == 0) throw DomainError("denominator: d must be positive");
    const Rational a(d, 2);
    ClosedForm v = ClosedForm::pi() * ClosedForm::of(pow_rational(Rational(2), 3 * d + 1)) *
                   ClosedForm::sqrt_three(-3 * static_cast<int>(d)) * ClosedForm::of(a) * gamma_closed(3 * a) *
                   gamma_closed(2 * a + 1).pow(2);
    v /= gamma_closed(a + Rational(5, 6)) * gamma_closed(a + Rational(7, 6)) * gamma_closed(5 * a + 2);
    if (!v.rational()) throw DomainError("denominator did not reduce to a rational");
    return v.as_rational();
}

Rational prob_dunkl_exact(unsigned d) {
    if (d == 0 || d % 2) throw DomainError("closed double sum needs even d");
    const unsigned h = d / 2;
    const Rational hd(h);
    Rational pre = pow_rational(Rational(3456), d) * pow_rational(pochhammer(Rational(1, 2), h), 3) *
                   pow_rational(pochhammer(Rational(7, 6), h), 2) * pow_rational(pochhammer(Rational(5, 6), h), 2) *
                   factorial(2 * d);
    pre /= factorial(h) * pochhammer(Rational(3), 5 * d);

    Rational sum = 0;
    for (unsigned i = 0; i <= h; ++i)
        for (unsigned j = 0; i + j <= h; ++j) {
            Rational num = pochhammer(Rational(-hd), i + j) * pochhammer(hd, j) * pochhammer(Rational(d), j) *
                           pochhammer(Rational(2 + 3 * d), i) * pochhammer(Rational(1 + d), i);
            Rational den = pochhammer(Rational(Rational(2) + Rational(5 * d, 2)), i + j) * pochhammer(Rational(hd + 1), j) * factorial(i) *
                           factorial(j) * pochhammer(Rational(-2 * static_cast<long>(d)), i);
            sum += num / den;
        }
    return pre * sum;
}

BigReal concise_term(const BigReal& a) {
    BigReal a2 = a * a, a3 = a2 * a, a4 = a3 * a, a5 = a4 * a;
    BigReal q = 185000 * a5 + 779750 * a4 + 1289125 * a3 + 1042015 * a2 + 410694 * a + 63000;
    BigReal lg = lgamma_fn(BigReal(3 * a + BigReal(5) / 2)) + lgamma_fn(BigReal(5 * a + 2)) - lgamma_fn(BigReal(a + 1)) -
                 lgamma_fn(BigReal(2 * a + 3)) - lgamma_fn(BigReal(5 * a + BigReal(13) / 2));
    return BigReal(q * exp(lg - (4 * a + 6) * log(BigReal(2))) / 3);
}

BigReal prob_concise(const Rational& alpha, const BigReal& tol) {
    if (alpha <= 0) throw DomainError("concise formula needs alpha > 0");
    BigReal result;
    {
        PrecisionScope scope(bits_for(tol));
        const BigReal a0 = to_real(alpha);
        BigReal sum = 0, prev = concise_term(a0);
        sum += prev;
        BigReal r1 = 1, r2 = 1, r3 = 1;
        for (long i = 1; i < 100000; ++i) {
            BigReal t = concise_term(BigReal(a0 + i));
            sum += t;
            r1 = r2;
            r2 = r3;
            r3 = t / prev;
            prev = t;
            BigReal r = std::max({r1, r2, r3});
            if (i >= 3 && r < 1 && t * r / (1 - r) < tol) {
                result = sum;
                break;
            }
        }
        if (result == 0) throw ConvergenceError("concise sum budget exhausted", sum, prev);
    }
    return BigReal(result);
}

BigReal prob_induced_6f5(unsigned d, const BigReal& tol) {
    if (d == 0) throw DomainError("6F5 formula needs d >= 1");
    BigReal result;
    {
        PrecisionScope scope(bits_for(tol));
        const Rational D(d);
        HypergeometricSpec s;
        s.upper = {Rational(1), D + Rational(3, 2), Rational(5 * d, 4) + 1, Rational(5 * d + 6, 4),
                   Rational(5 * d, 4) + Rational(19, 8), Rational(3 * (d + 1), 2)};
        s.lower = {Rational(d + 4, 2), Rational(5 * d, 4) + Rational(11, 8), Rational(5 * d + 7, 4),
                   Rational(5 * d + 9, 4), Rational(2 * (d + 1))};
        s.regularized = true;
        const BigReal dd(d);
        BigReal lg = lgamma_fn(BigReal(3 * (dd + 1) / 2)) + lgamma_fn(BigReal(5 * dd / 4 + BigReal(19) / 8)) +
                     lgamma_fn(BigReal(2 * dd + 2)) + lgamma_fn(BigReal(5 * dd / 2 + 2)) - lgamma_fn(dd);
        BigReal pre = sqrt(pi_value()) * exp(lg - (9 * dd / 2 + BigReal(5) / 2) * log(BigReal(2)));
        BigReal h = hyp_pfq_numeric(s, BigReal(1), tol / 4);
        result = 1 - pre * h;
    }
    return BigReal(result);
}

BigReal prefactor_s_integral(unsigned d, const BigReal& t) {
    if (d == 0) throw DomainError("prefactor: d must be positive");
    if (!(t > 0) || !(t < 1)) throw DomainError("prefactor: t outside (0, 1)");
    const unsigned a = 3 * d + 2;
    BigReal t2 = t * t;
    BigReal lg = 2 * lgamma_fn(BigReal(a)) - lgamma_fn(BigReal(2 * a));
    BigReal pre = exp(lg + (5 * d + 3) * log(BigReal(2)));
    return BigReal(pre * pow(t, static_cast<long>(2 * d + 1)) * pow(1 - t2, static_cast<long>(d)) *
                   hyp2f1_balanced(a, BigReal(1 - t2), t2));
}

BigReal prob_via_t_integral(unsigned d, const BigReal& tol) {
    BigReal result;
    {
        PrecisionScope scope(bits_for(tol));
        ChiFunction chi(d);
        const BigReal chi_tol = std::min(BigReal(tol / 64), BigReal("1e-14"));
        auto f = [&](const BigReal& t) { return BigReal(prefactor_s_integral(d, t) * chi(t, chi_tol)); };
        BigReal num = integrate_1d(f, BigReal(0), BigReal(1), tol, Endpoint::left);
        result = num / to_real(denominator_exact(d));
    }
    return BigReal(result);
}

BigReal prob_ansatz_2d(unsigned d, const ChiEval& chi, const BigReal& tol, BigReal* numerator) {
    if (d == 0) throw DomainError("ansatz: d must be positive");
    BigReal num;
    {
        PrecisionScope scope(bits_for(tol));
        const BigReal power(d);
        auto outer = [&](const BigReal& eps) {
            BigReal e = folded_ratio(eps);
            BigReal c = chi(e);
            if (c == 0) return BigReal(0);
            return BigReal(c * pq_kernel(d, power, true, eps, tol / 16));
        };
        num = integrate_1d(outer, BigReal(0), BigReal(1), tol, Endpoint::both);
    }
    if (numerator) *numerator = num;
    return BigReal(num / to_real(denominator_exact(d)));
}

MonotoneResult prob_monotone_sqrt(unsigned d, const BigReal& tol) {
    if (d != 1 && d != 2) throw DomainError("monotone variant is available for d = 1 and d = 2 only");
    MonotoneResult r;
    {
        PrecisionScope scope(bits_for(tol));
        const BigReal power = -BigReal(d) / 4;
        ChiFunction chi(d);
        auto kern = [&](const BigReal& eps) { return pq_kernel(d, power, false, eps, tol / 16); };
        BigReal num = integrate_1d([&](const BigReal& e) { return BigReal(chi(folded_ratio(e)) * kern(e)); },
                                   BigReal(0), BigReal(1), tol, Endpoint::both);
        BigReal den = integrate_1d(kern, BigReal(0), BigReal(1), tol, Endpoint::both);
        r.numerator = num;
        r.denominator = den;
        r.probability = num / den;
    }
    return r;
}

ProbabilityReport probability_report(unsigned d, const BigReal& tol) {
    ProbabilityReport r;
    r.d = d;
    if (d % 2 == 0) r.value_dunkl = prob_dunkl_exact(d);
    r.value_concise = prob_concise(Rational(d, 2), tol);
    r.value_6f5 = prob_induced_6f5(d, tol);
    r.value_integral = prob_via_t_integral(d, tol);
    ChiFunction chi(d);
    const BigReal chi_tol = std::min(BigReal(tol / 64), BigReal("1e-14"));
    r.value_ansatz2d = prob_ansatz_2d(d, [&](const BigReal& e) { return chi(e, chi_tol); }, tol);

    std::vector<BigReal> vals{r.value_concise, r.value_6f5, r.value_integral, r.value_ansatz2d};
    if (r.value_dunkl) vals.push_back(to_real(*r.value_dunkl));
    r.max_pairwise_dev = 0;
    for (std::size_t i = 0; i < vals.size(); ++i)
        for (std::size_t j = i + 1; j < vals.size(); ++j)
            r.max_pairwise_dev = std::max(r.max_pairwise_dev, BigReal(abs(vals[i] - vals[j])));
    return r;
}

std::vector<ProbabilityReport> cross_formula_report(unsigned d_max, const BigReal& tol) {
    if (d_max < 2) throw DomainError("cross formula report needs d_max >= 2");
    std::vector<ProbabilityReport> out;
    for (unsigned d = 1; d <= d_max; ++d) out.push_back(probability_report(d, tol));
    return out;
}

}  // namespace sepscope
