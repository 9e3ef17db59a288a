#include "sepscope/chi.hpp"
#include "sepscope/quadrature.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <mutex>

namespace sepscope {

namespace {

BigReal mp_atanh(const BigReal& x) {
    BigReal r;
    mpfr_atanh(r.backend().data(), x.backend().data(), MPFR_RNDN);
    return r;
}

BigReal mp_expm1(const BigReal& x) {
    BigReal r;
    mpfr_expm1(r.backend().data(), x.backend().data(), MPFR_RNDN);
    return r;
}

BigReal mp_log1p(const BigReal& x) {
    BigReal r;
    mpfr_log1p(r.backend().data(), x.backend().data(), MPFR_RNDN);
    return r;
}

double log2_of(const BigReal& x) {
    long e = 0;
    mpfr_get_d_2exp(&e, x.backend().data(), MPFR_RNDN);
    return static_cast<double>(e);
}

unsigned bits_for(const BigReal& tol) {
    return std::max(current_precision_bits(), bits_for_tolerance(tol.convert_to<double>()));
}

BigReal full_tolerance() {
    BigReal t = working_epsilon();
    mpfr_mul_2si(t.backend().data(), t.backend().data(), 64, MPFR_RNDN);
    return t;
}

HypergeometricSpec master_spec(unsigned d) {
    Rational h(d, 2);
    return {{-h, h, Rational(d)}, {h + 1, Rational(3 * d, 2) + 1}, true};
}

// Gamma(d+1)^3 / Gamma(d/2+1)^2
ClosedForm master_prefactor(unsigned d) {
    ClosedForm g1 = *gamma_rational_closed(Rational(d + 1));
    ClosedForm g2 = *gamma_rational_closed(Rational(d, 2) + 1);
    return g1.pow(3) / g2.pow(2);
}

std::mutex coeff_mutex;

// Regularized 3F2(-d/2, d/2, d; d/2+1, 3d/2+1; x) through
// 3F2 = G(b2)/(G(a3)G(b2-a3)) int t^(a3-1) (1-t)^(b2-a3-1) 2F1(-d/2, d/2; d/2+1; x t) dt and
// 2F1(-d/2, d/2; d/2+1; z) = (d/2) int w^(d/2-1) (1 - z w)^(d/2) dw
BigReal master_series_by_integral(unsigned d, const BigReal& x, const BigReal& tol) {
    const BigReal h = BigReal(d) / 2;
    auto inner = [&](const BigReal& t, const BigReal& w) {
        return BigReal(pow(t, BigReal(d - 1)) * pow(1 - t, h) * pow(w, h - 1) * pow(1 - x * t * w, h));
    };
    BigReal I = integrate_iterated(inner, BigReal(0), BigReal(1), [](const BigReal&) { return BigReal(0); },
                                   [](const BigReal&) { return BigReal(1); }, tol, Endpoint::both, Endpoint::both);
    // Gamma(3d/2+1)/(Gamma(d) Gamma(d/2+1)) * (d/2), then divide by Gamma(d/2+1) Gamma(3d/2+1)
    return h * I / (gamma_fn(BigReal(d)) * gamma_fn(h + 1) * gamma_fn(h + 1));
}

// chi_1(1 - u) with the logarithmic singularities written out in u; Li2 of small
// arguments is a plain power series
BigReal chi1_near_one(const BigReal& u) {
    BigReal result;
    {
        PrecisionScope scope(current_precision_bits() + 32);
        BigReal uu = promote(u);
        BigReal e = 1 - uu, v = uu * (2 - uu);
        BigReal pi2 = pi_value() * pi_value();
        BigReal lu = log(uu), lv = log(v);
        BigReal li_e = pi2 / 6 - lu * mp_log1p(BigReal(-uu)) - dilog(uu);
        BigReal li_e2 = pi2 / 6 - lv * mp_log1p(BigReal(-v)) - dilog(v);
        BigReal e2 = e * e;
        BigReal br = e2 * (4 * li_e - li_e2) + v * (2 - v) * (log(2 - uu) - lu) / 2 - e * v;
        result = 2 * br / (pi2 * e2);
    }
    return BigReal(result);
}

}  // namespace

BigReal chi1_closed(const BigReal& eps) {
    if (!(eps > 0) || eps > 1) throw DomainError("chi1_closed: eps outside (0, 1]");
    if (eps == 1) return BigReal(1);
    BigReal near_one = 1;
    mpfr_mul_2si(near_one.backend().data(), near_one.backend().data(), -20, MPFR_RNDN);
    if (eps > 1 - near_one) return chi1_near_one(BigReal(1 - eps));

    const unsigned base = current_precision_bits();
    // the bracket cancels down to O(eps^3)
    const unsigned extra = static_cast<unsigned>(std::max(0.0, -2 * log2_of(eps))) + 32;
    BigReal result;
    {
        PrecisionScope scope(base + extra);
        BigReal e = promote(eps);
        BigReal e2 = e * e;
        BigReal at = mp_atanh(e);
        BigReal br = e2 * (4 * dilog(e) - dilog(e2)) - e2 * e2 * at + e2 * e - e + at;
        result = 2 * br / (pi_value() * pi_value() * e2);
    }
    return BigReal(result);
}

std::vector<Rational> chi_master_coefficients(unsigned d) {
    if (d == 0 || d % 2) throw DomainError("exact coefficients need even d");
    static std::map<unsigned, std::vector<Rational>> cache;
    {
        std::lock_guard<std::mutex> lock(coeff_mutex);
        auto it = cache.find(d);
        if (it != cache.end()) return it->second;
    }
    TerminatingSeries ts = hyp_terminating_series(master_spec(d));
    Rational scale = (master_prefactor(d) * ts.prefactor).as_rational();
    std::vector<Rational> out;
    for (const auto& c : ts.coeffs) out.push_back(c * scale);
    std::lock_guard<std::mutex> lock(coeff_mutex);
    return cache.emplace(d, std::move(out)).first->second;
}

Rational chi_master_exact(unsigned d, const Rational& eps) {
    if (eps < 0 || eps > 1) throw DomainError("chi_master: eps outside [0, 1]");
    const auto c = chi_master_coefficients(d);
    Rational e2 = eps * eps, s = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * e2 + *it;
    Rational ed = 1;
    for (unsigned i = 0; i < d; ++i) ed *= eps;
    return s * ed;
}

BigReal chi_master(unsigned d, const BigReal& eps, const BigReal& tol) {
    if (d == 0) throw DomainError("chi_master: d must be positive");
    if (eps < 0 || eps > 1) throw DomainError("chi_master: eps outside [0, 1]");
    if (eps == 0) return BigReal(0);
    if (eps == 1) return BigReal(1);
    if (d % 2 == 0) {
        const auto c = chi_master_coefficients(d);
        BigReal e2 = eps * eps, s = 0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * e2 + to_real(*it);
        return BigReal(s * pow(eps, static_cast<long>(d)));
    }
    BigReal result;
    {
        PrecisionScope scope(bits_for(tol));
        BigReal e = promote(eps), x = e * e;
        BigReal series;
        try {
            series = hyp_pfq_numeric(master_spec(d), x, tol / 4);
        } catch (const ConvergenceError&) {
            // Levin stalls for x just below 1 at tight targets
            series = master_series_by_integral(d, x, tol / 4);
        }
        result = pow(e, static_cast<long>(d)) * master_prefactor(d).value() * series;
    }
    return BigReal(result);
}

ChiFunction::ChiFunction(unsigned d) : d_(d) {
    if (d == 0) throw DomainError("ChiFunction: d must be positive");
    if (d == 1)
        form_ = ChiForm::closed_polylog;
    else if (d % 2 == 0) {
        form_ = ChiForm::exact_polynomial;
        coeffs_ = chi_master_coefficients(d);
    } else
        form_ = ChiForm::numeric_series;
}

BigReal ChiFunction::operator()(const BigReal& eps, const BigReal& tol) const {
    if (form_ == ChiForm::closed_polylog) {
        if (eps < 0 || eps > 1) throw DomainError("chi: eps outside [0, 1]");
        return eps == 0 ? BigReal(0) : chi1_closed(eps);
    }
    return chi_master(d_, eps, tol);
}

BigReal ChiFunction::operator()(const BigReal& eps) const { return (*this)(eps, full_tolerance()); }

std::optional<Rational> ChiFunction::exact(const Rational& eps) const {
    if (form_ != ChiForm::exact_polynomial) {
        if (eps == 0) return Rational(0);
        if (eps == 1) return Rational(1);
        return std::nullopt;
    }
    return chi_master_exact(d_, eps);
}

CoefficientCheck chi_coefficient_checks(unsigned d) {
    if (d == 0 || d % 2) throw DomainError("coefficient checks need even d");
    auto G = [](const Rational& a) { return *gamma_rational_closed(a); };
    const Rational half_odd(d + 1, 2);
    Rational eight_d = 1;
    for (unsigned i = 0; i < d; ++i) eight_d *= 8;

    CoefficientCheck out;
    const ClosedForm pi_three_halves{Rational(1), 3, 0, 0, 0};
    out.constant = ClosedForm::of(eight_d) * G(half_odd).pow(3) / (pi_three_halves * G(Rational(3 * d, 2) + 1));

    Rational two_pow = 1;
    for (unsigned i = 0; i + 1 < 3 * d; ++i) two_pow *= 2;
    Rational d3 = Rational(d) * d * d;
    ClosedForm num = ClosedForm::of(-two_pow * d3) * ClosedForm::sqrt_three(-3 * static_cast<int>(d + 1)) * G(half_odd).pow(3);
    ClosedForm den = ClosedForm{Rational(1), 1, 0, 0, 0} * G(Rational(d, 2) + Rational(2, 3)) *
                     G(Rational(d, 2) + Rational(4, 3)) * G(Rational(d, 2) + 2);
    out.eps2 = num / den;
    return out;
}

BigReal chi_xstate(const Rational& d, const BigReal& eps) {
    if (d <= 0) throw DomainError("chi_xstate: d must be positive");
    if (eps < 0 || eps > 1) throw DomainError("chi_xstate: eps outside [0, 1]");
    if (eps == 0) return BigReal(0);
    return BigReal(pow(eps, to_real(d)));
}

BigReal ReducedSetFunction::operator()(const BigReal& mu) const {
    if (!(mu > 0)) throw DomainError("reduced set function: mu must be positive");
    const BigReal m2 = mu * mu;
    const bool above = branch == ReducedBranch::above_one;
    switch (kind) {
        case ReducedKind::sevenDim_minor: {
            const BigReal pi = pi_value();
            if (above) return BigReal(2 * (sqrt(m2 - 1) + m2 * asin(1 / mu)) / (pi * m2));
            return BigReal((2 * mu * sqrt(1 - m2) - 2 * acos(mu) + pi) / pi);
        }
        case ReducedKind::elevenDim_minor:
            if (above) return BigReal((2 * m2 - 1) / (m2 * m2));
            return BigReal(m2 * (2 - m2));
        case ReducedKind::elevenDim_full:
            if (above) return BigReal((4 * m2 - 1) / (3 * m2 * m2));
            return BigReal(m2 * (4 - m2) / 3);
    }
    throw DomainError("unknown reduced set kind");
}

BigReal reduced_set_function(ReducedKind kind, const BigReal& mu) {
    return ReducedSetFunction{kind, mu > 1 ? ReducedBranch::above_one : ReducedBranch::below_one}(mu);
}

Rational reduced_set_function_exact(ReducedKind kind, const Rational& mu) {
    if (mu <= 0) throw DomainError("reduced set function: mu must be positive");
    const Rational m2 = mu * mu;
    switch (kind) {
        case ReducedKind::elevenDim_minor:
            return mu > 1 ? Rational((2 * m2 - 1) / (m2 * m2)) : Rational(m2 * (2 - m2));
        case ReducedKind::elevenDim_full:
            return mu > 1 ? Rational((4 * m2 - 1) / (3 * m2 * m2)) : Rational(m2 * (4 - m2) / 3);
        default:
            throw DomainError("no rational form for this reduced set kind");
    }
}

DefectReport defect(const BigReal& delta, const BigReal& tol) {
    if (delta < 0) throw DomainError("defect: delta must be nonnegative");
    DefectReport r;
    r.delta = delta;
    const BigReal two_pi2_3 = 2 * pi_value() * pi_value() / 3;
    const BigReal chi = delta == 0 ? BigReal(1) : chi1_closed(BigReal(exp(-delta)));
    r.value = two_pi2_3 - chi;
    r.scaled = two_pi2_3 * (1 - chi);

    // cosh t and sinh^2 t log(...) cancel to leading order for large t
    const double d = delta.convert_to<double>();
    const unsigned extra = static_cast<unsigned>(std::min(3.0 * d, 4096.0)) + 16;
    BigReal plain, with_t;
    {
        PrecisionScope scope(bits_for(tol) + extra);
        auto integrand = [](bool extra_t) {
            return [extra_t](const BigReal& t) {
                BigReal sh = sinh(t);
                BigReal lg = mp_log1p(BigReal(2 / mp_expm1(t)));
                if (extra_t) lg *= t;
                return BigReal(cosh(t) - sh * sh * lg);
            };
        };
        BigReal dl(delta);
        plain = 16 * integrate_1d(integrand(false), BigReal(0), dl, tol, Endpoint::left) / 3;
        with_t = 16 * integrate_1d(integrand(true), BigReal(0), dl, tol, Endpoint::left) / 3;
    }
    r.integral = plain;
    r.integral_extra_t = with_t;
    if (chi < 1) {
        r.ratio = r.integral / (1 - chi);
        r.ratio_extra_t = r.integral_extra_t / (1 - chi);
    } else {
        r.ratio = std::numeric_limits<BigReal>::quiet_NaN();
        r.ratio_extra_t = std::numeric_limits<BigReal>::quiet_NaN();
    }
    return r;
}

}  // namespace sepscope
