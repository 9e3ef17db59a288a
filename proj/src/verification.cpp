#include "sepscope/verification.hpp"

#include "sepscope/harness.hpp"
#include "sepscope/probability.hpp"
#include "sepscope/quadrature.hpp"

#include "json.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>

namespace sepscope {

namespace {

using Poly = std::vector<Rational>;  // ascending powers

Poly mul(const Poly& a, const Poly& b) {
    Poly r(a.size() + b.size() - 1, Rational(0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

// polynomial in mu^2 given by coefficients of mu^0, mu^2, mu^4, ...
Poly even(std::initializer_list<long> c) {
    Poly p;
    for (long v : c) {
        p.push_back(Rational(v));
        p.push_back(Rational(0));
    }
    p.pop_back();
    return p;
}

Poly scale(Poly p, const Rational& s) {
    for (auto& c : p) c *= s;
    return p;
}

// mu^a (P(mu) + L(mu) log mu) / (C (mu^2 - 1)^k)
struct JacobianShape {
    unsigned a;
    Poly p, l;
    Rational c;
    unsigned k;
};

JacobianShape shape(JacobianKind kind) {
    const Poly rebit_log = even({1, 16, 36, 16, 1});
    const Poly rebit_poly = even({-5, -32, 0, 32, 5});
    switch (kind) {
        case JacobianKind::h_real: return {4, scale(rebit_poly, -5), scale(rebit_log, 12), 1890, 9};
        case JacobianKind::jac_la: return {3, scale(rebit_poly, 640), scale(rebit_log, -1536), 3, 8};
        case JacobianKind::h_complex:
            return {7, scale(mul(even({-1, 1}), even({363, 10310, 58673, 101548, 58673, 10310, 363})), -1),
                    scale(mul(even({1, 1}), even({1, 48, 393, 832, 393, 48, 1})), 140), 1801800, 15};
        case JacobianKind::seven_dim: return {3, even({11, 27, -27, -11}), scale(even({1, 9, 9, 1}), 6), 210, 7};
        case JacobianKind::eleven_dim:
            return {5, mul(even({-1, 1}), even({142, 2272, 6397, 4397, 647, 5})),
                    scale(even({1, 30, 150, 200, 75, 6}), -60), 83160, 12};
    }
    throw std::logic_error("unknown jacobian");
}

// Truncated power series in h
struct Series {
    std::vector<Rational> c;
    explicit Series(unsigned n) : c(n, Rational(0)) {}
};

Series series_mul(const Series& a, const Series& b) {
    Series r(static_cast<unsigned>(a.c.size()));
    for (std::size_t i = 0; i < a.c.size(); ++i)
        for (std::size_t j = 0; i + j < a.c.size(); ++j) r.c[i + j] += a.c[i] * b.c[j];
    return r;
}

// P(1 + h)
Series shift(const Poly& p, unsigned n) {
    Series r(n);
    for (std::size_t k = p.size(); k-- > 0;) {
        // r <- r (1 + h) + p_k
        for (std::size_t i = n; i-- > 1;) r.c[i] += r.c[i - 1];
        r.c[0] += p[k];
    }
    return r;
}

Series series_inverse(const Series& a) {
    Series r(static_cast<unsigned>(a.c.size()));
    r.c[0] = 1 / a.c[0];
    for (std::size_t n = 1; n < a.c.size(); ++n) {
        Rational s = 0;
        for (std::size_t j = 1; j <= n; ++j) s += a.c[j] * r.c[n - j];
        r.c[n] = -s / a.c[0];
    }
    return r;
}

std::vector<Rational> taylor(JacobianKind kind, unsigned order) {
    const JacobianShape s = shape(kind);
    const unsigned n = s.k + order + 1;
    Series logs(n);
    for (unsigned i = 1; i < n; ++i) logs.c[i] = Rational(i % 2 ? 1 : -1, i);
    Series num = shift(s.p, n);
    Series lt = series_mul(shift(s.l, n), logs);
    for (unsigned i = 0; i < n; ++i) num.c[i] += lt.c[i];
    for (unsigned i = 0; i < s.k; ++i)
        if (num.c[i] != 0) throw std::logic_error("jacobian numerator does not vanish to the pole order");
    // divide by h^k, then by C (2 + h)^k mu^-a
    Series reduced(order + 1);
    for (unsigned i = 0; i <= order; ++i) reduced.c[i] = num.c[i + s.k];
    Series base(order + 1);
    base.c[0] = 2;
    if (order >= 1) base.c[1] = 1;
    Series den(order + 1);
    den.c[0] = 1;
    for (unsigned i = 0; i < s.k; ++i) den = series_mul(den, base);
    Poly mu_a(s.a + 1, Rational(0));
    mu_a[s.a] = 1;
    Series r = series_mul(series_mul(reduced, series_inverse(den)), shift(mu_a, order + 1));
    for (auto& c : r.c) c /= s.c;
    return r.c;
}

BigReal eval_direct(const JacobianShape& s, const BigReal& mu) {
    auto poly = [&](const Poly& p) {
        BigReal acc = 0;
        for (std::size_t k = p.size(); k-- > 0;) acc = acc * mu + to_real(p[k]);
        return acc;
    };
    return BigReal(pow(mu, static_cast<long>(s.a)) * (poly(s.p) + poly(s.l) * log(mu)) /
                   (to_real(s.c) * pow(mu * mu - 1, static_cast<long>(s.k))));
}

const std::vector<Rational>& cached_taylor(JacobianKind kind) {
    static std::mutex m;
    static std::map<JacobianKind, std::vector<Rational>> cache;
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find(kind);
    if (it == cache.end()) it = cache.emplace(kind, taylor(kind, 20)).first;
    return it->second;
}

int jacobian_sign(JacobianKind kind) {
    static std::mutex m;
    static std::map<JacobianKind, int> cache;
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find(kind);
    if (it == cache.end()) {
        PrecisionScope ps(256);
        it = cache.emplace(kind, eval_direct(shape(kind), BigReal("1e-3")) > 0 ? 1 : -1).first;
    }
    return it->second;
}

BigReal clamp_sqrt(const BigReal& x) { return x > 0 ? BigReal(sqrt(x)) : BigReal(0); }
BigReal clamp_asin(const BigReal& x) {
    if (x >= 1) return BigReal(pi_value() / 2);
    if (x <= -1) return BigReal(-pi_value() / 2);
    return BigReal(asin(x));
}

}  // namespace

std::string to_string(JacobianKind k) {
    switch (k) {
        case JacobianKind::h_real: return "h_real";
        case JacobianKind::h_complex: return "h_complex";
        case JacobianKind::jac_la: return "jac_la";
        case JacobianKind::seven_dim: return "seven_dim";
        case JacobianKind::eleven_dim: return "eleven_dim";
    }
    return "?";
}

std::vector<Rational> jacobian_taylor(JacobianKind kind, unsigned order) {
    auto c = taylor(kind, order);
    for (auto& x : c) x *= jacobian_sign(kind);
    return c;
}

BigReal jacobian_eval(JacobianKind kind, const BigReal& mu) {
    if (!(mu > 0)) throw DomainError("jacobian: mu must be positive");
    const BigReal h = mu - 1;
    const int sign = jacobian_sign(kind);
    if (abs(h) < BigReal("1e-3")) {
        const auto& c = cached_taylor(kind);
        BigReal acc = 0;
        for (std::size_t i = c.size(); i-- > 0;) acc = acc * h + to_real(c[i]);
        return BigReal(sign * acc);
    }
    const JacobianShape s = shape(kind);
    // the numerator cancels to order (mu - 1)^k
    const double lh = std::log2(std::abs(h.convert_to<double>()));
    const unsigned extra = 32 + static_cast<unsigned>(s.k * std::max(0.0, -lh) + 8 * std::max(0.0, lh));
    BigReal v;
    {
        PrecisionScope ps(current_precision_bits() + extra);
        BigReal m = promote(mu);
        v = eval_direct(s, m);
    }
    return BigReal(sign * v);
}

BigReal jacobian_integral(JacobianKind kind, const BigReal& tol, bool whole_line) {
    auto f = [kind](const BigReal& m) { return jacobian_eval(kind, m); };
    BigReal r = integrate_1d(f, 0, 1, tol, Endpoint::both);
    if (whole_line) {
        auto g = [kind](const BigReal& u) { return BigReal(jacobian_eval(kind, BigReal(1 / u)) / (u * u)); };
        r += integrate_1d(g, 0, 1, tol, Endpoint::both);
    }
    return r;
}

BigReal jac_la_complex(const BigReal& t) { return prefactor_s_integral(2, t); }

BigReal chi_3d_normalizer(unsigned d) {
    if (d == 0) throw DomainError("normalizer: d must be positive");
    const BigReal dd(d);
    BigReal g1 = gamma_fn(BigReal(dd / 2 + 1)), g2 = gamma_fn(BigReal((dd + 1) / 2));
    return BigReal(pi_value() * pow(BigReal(4), -static_cast<long>(d)) * g1 * g1 / (dd * dd * dd * g2 * g2));
}

namespace {

ReconstructionResult monte_carlo_3d(unsigned d, const BigReal& eps, std::uint64_t points, std::uint64_t seed,
                                    bool xstate) {
    if (points < 2) throw DomainError("Monte Carlo needs at least two points");
    const double e = eps.convert_to<double>(), e2 = e * e;
    RngStream rng(seed, 0);
    double s = 0, s2 = 0, norm = 0;
    for (std::uint64_t i = 0; i < points; ++i) {
        const double r14 = rng.uniform(), r23 = rng.uniform(), r24 = xstate ? 0.0 : rng.uniform();
        const double a = r14 * r14, b = r23 * r23, c = r24 * r24;
        const double w = xstate ? std::pow(r14 * r23, static_cast<double>(d) - 1)
                                : std::pow(r14 * r23 * r24, static_cast<double>(d) - 1);
        const bool positive = b < 1 && (a - 1) * (b - 1) > c;
        if (positive) norm += w;
        const double v = positive && b * (e2 * a - 1) > e2 * (e2 * a + c - 1) ? w : 0.0;
        s += v;
        s2 += v * v;
    }
    const double n = static_cast<double>(points);
    const double mean = s / n, var = s2 / n - mean * mean;
    // X-state normalizer is the full square; general one is closed form
    const BigReal denom = xstate ? BigReal(norm / n) : chi_3d_normalizer(d);
    return {BigReal(mean / denom), BigReal(std::sqrt(var / n) / denom)};
}

}  // namespace

ReconstructionResult reconstruct_chi_3d(unsigned d, const BigReal& eps, ReconstructionMethod method,
                                        const ReconstructionBudget& budget) {
    if (d == 0) throw DomainError("reconstruction: d must be positive");
    if (!(eps > 0) || eps > 1) throw DomainError("reconstruction: eps must lie in (0, 1]");
    if (method == ReconstructionMethod::monte_carlo) return monte_carlo_3d(d, eps, budget.points, budget.seed, false);

    // r24 integrates to R^d / d with R^2 the smaller of the positivity bound (1 - r14^2)(1 - r23^2) and
    // the partial-transpose bound (1 - eps^2 r14^2)(1 - r23^2/eps^2); they cross at r23 = eps r14.
    const BigReal tol = budget.tolerance;
    const long dm1 = static_cast<long>(d) - 1;
    const BigReal half = BigReal(d) / 2;
    auto lower = [&](const BigReal& a, const BigReal& b) {
        BigReal u = (1 - a * a) * (1 - b * b);
        return BigReal(pow(a * b, dm1) * pow(u > 0 ? u : BigReal(0), half) / d);
    };
    auto upper = [&](const BigReal& a, const BigReal& b) {
        BigReal u = (1 - eps * eps * a * a) * (1 - b * b / (eps * eps));
        return BigReal(pow(a * b, dm1) * pow(u > 0 ? u : BigReal(0), half) / d);
    };
    auto zero = [](const BigReal&) { return BigReal(0); };
    auto cross = [&](const BigReal& a) { return BigReal(eps * a); };
    auto top = [&](const BigReal&) { return eps; };
    BigReal num = integrate_iterated(lower, 0, 1, zero, cross, tol, Endpoint::both, Endpoint::both) +
                  integrate_iterated(upper, 0, 1, cross, top, tol, Endpoint::both, Endpoint::both);
    BigReal den = chi_3d_normalizer(d);
    return {BigReal(num / den), BigReal(tol * abs(num / den))};
}

ReconstructionResult reconstruct_chi_3d_xstate(unsigned d, const BigReal& eps, ReconstructionMethod method,
                                               const ReconstructionBudget& budget) {
    if (d == 0) throw DomainError("reconstruction: d must be positive");
    if (!(eps > 0) || eps > 1) throw DomainError("reconstruction: eps must lie in (0, 1]");
    if (method == ReconstructionMethod::monte_carlo) return monte_carlo_3d(d, eps, budget.points, budget.seed, true);
    // with r24 = 0 the partial-transpose constraint is (eps^2 r14^2 - 1)(r23^2 - eps^2) > 0, i.e. r23 < eps
    const long dm1 = static_cast<long>(d) - 1;
    auto w = [&](const BigReal& a, const BigReal& b) { return BigReal(pow(a * b, dm1)); };
    auto zero = [](const BigReal&) { return BigReal(0); };
    auto top = [&](const BigReal&) { return eps; };
    auto one = [](const BigReal&) { return BigReal(1); };
    BigReal num = integrate_iterated(w, 0, 1, zero, top, budget.tolerance);
    BigReal den = integrate_iterated(w, 0, 1, zero, one, budget.tolerance);
    return {BigReal(num / den), BigReal(budget.tolerance * abs(num / den))};
}

BigReal reconstruct_chi1_piecewise(const BigReal& mu, const BigReal& tol) {
    if (mu < 1) throw DomainError("piecewise reconstruction needs mu >= 1");
    const BigReal pi = pi_value(), m2 = mu * mu;
    auto v1 = [&](const BigReal& s) {
        return BigReal(4 * (m2 * clamp_sqrt(1 - s * s) * clamp_asin(s / mu) + clamp_sqrt(m2 - s * s) * acos(s)) /
                       (pi * pi * m2));
    };
    auto v2 = [&](const BigReal& s) {
        return BigReal((2 * pi * clamp_sqrt(m2 - s * s) - 4 * m2 * clamp_sqrt(1 - s * s) * clamp_asin(s / mu) +
                        4 * clamp_sqrt(m2 - s * s) * clamp_asin(s)) /
                       (pi * pi * m2));
    };
    return BigReal(integrate_1d(v1, 0, 1, tol, Endpoint::right) + integrate_1d(v2, -1, 0, tol, Endpoint::left));
}

BigReal chi1_planar_integrand(const BigReal& mu, const BigReal& z13, const BigReal& z14) {
    const BigReal pi = pi_value(), c = clamp_sqrt(1 - z13 * z13);
    const BigReal ra = clamp_sqrt(1 - mu * mu * z14 * z14 - z13 * z13), rb = clamp_sqrt(1 - z13 * z13 - z14 * z14);
    const BigReal t1 = 2 * mu * ra * clamp_asin(z14 / c), t2 = 2 * rb * clamp_asin(mu * z14 / c);
    const BigReal sgn = z14 > 0 ? 1 : -1;
    return BigReal(3 * (sgn * (t1 - t2) + pi * rb) / (2 * pi * pi));
}

BigReal chi1_planar_integrand_mu2(const BigReal& z13, const BigReal& z14) {
    const BigReal pi = pi_value(), c = clamp_sqrt(1 - z13 * z13);
    const BigReal ra = clamp_sqrt(4 - 4 * z13 * z13 - z14 * z14), rb = clamp_sqrt(1 - z13 * z13 - z14 * z14);
    const BigReal t1 = 8 * rb * clamp_asin(z14 / (2 * c)), t2 = 2 * ra * clamp_asin(z14 / c);
    const BigReal sgn = z14 > 0 ? 1 : -1;
    return BigReal(3 * (pi * ra + sgn * (t1 - t2)) / (8 * pi * pi));
}

BigReal reconstruct_chi1_planar(const BigReal& mu, const BigReal& tol) {
    if (mu < 1) throw DomainError("planar reconstruction needs mu >= 1");
    auto f = [&](const BigReal& a, const BigReal& b) { return chi1_planar_integrand(mu, a, b); };
    auto zero = [](const BigReal&) { return BigReal(0); };
    auto hi = [&](const BigReal& a) { return BigReal(clamp_sqrt(1 - a * a) / mu); };
    auto lo = [&](const BigReal& a) { return BigReal(-clamp_sqrt(1 - a * a) / mu); };
    return BigReal(integrate_iterated(f, -1, 1, zero, hi, tol, Endpoint::both, Endpoint::right) +
                   integrate_iterated(f, -1, 1, lo, zero, tol, Endpoint::both, Endpoint::left));
}

ReducedSetReport reduced_set_probability(ReducedSetting setting, const BigReal& tol) {
    ReducedSetReport r;
    r.setting = setting;
    const BigReal pi = pi_value();
    std::function<BigReal(const BigReal&)> chi;
    JacobianKind jac = JacobianKind::seven_dim;
    bool above = false;
    switch (setting) {
        case ReducedSetting::sevenDim:
            chi = [](const BigReal& m) { return chi1_closed(m); };
            r.reference = BigReal("0.4197023");
            break;
        case ReducedSetting::elevenDim:
            jac = JacobianKind::eleven_dim;
            chi = [](const BigReal& m) { return BigReal(m * m * (4 - m * m) / 3); };
            r.reference = BigReal(BigReal(746149) / 21 - 3600 * pi * pi);
            break;
        case ReducedSetting::sevenDim_minor:
            chi = [](const BigReal& m) {
                return ReducedSetFunction{ReducedKind::sevenDim_minor, ReducedBranch::below_one}(m);
            };
            r.reference = to_real(Rational(71, 105));
            break;
        case ReducedSetting::elevenDim_minor:
            jac = JacobianKind::eleven_dim;
            above = true;
            chi = [](const BigReal& m) {
                return ReducedSetFunction{ReducedKind::elevenDim_minor, ReducedBranch::above_one}(m);
            };
            r.reference = to_real(Rational(126, 181));
            break;
    }
    BigReal num, den;
    if (above) {
        // mu = 1/u on (1, infinity)
        auto fn = [&](const BigReal& u) {
            BigReal m = 1 / u;
            return BigReal(jacobian_eval(jac, m) * chi(m) / (u * u));
        };
        auto fd = [&](const BigReal& u) { return BigReal(jacobian_eval(jac, BigReal(1 / u)) / (u * u)); };
        num = integrate_1d(fn, 0, 1, tol, Endpoint::both);
        den = integrate_1d(fd, 0, 1, tol, Endpoint::both);
    } else {
        auto fn = [&](const BigReal& m) { return BigReal(jacobian_eval(jac, m) * chi(m)); };
        num = integrate_1d(fn, 0, 1, tol, Endpoint::both);
        den = jacobian_integral(jac, tol);
    }
    r.value = num / den;
    r.deviation = abs(r.value - r.reference);
    return r;
}

AbsoluteSeparability absolute_separability_constants() {
    const BigReal pi = pi_value(), s2 = sqrt(BigReal(2)), at = atan(s2);
    AbsoluteSeparability a;
    a.rebit = (6928 - 2205 * pi) / (16 * s2);
    // plus sign on the last fraction; with minus the value is about -1.2e5
    a.qubit = 1 - (BigReal(3217542976) - BigReal(5120883075) * pi + BigReal(16386825840) * at) / (32768 * s2) +
              BigReal(29901918259) / 497664;
    a.quaterbit = BigReal(13) / BigReal("3043362286338048") *
                  (BigReal("806338156306739134839776") - BigReal("658857590468226345222144") * s2 +
                   BigReal("1048604423167357891775325") * s2 * pi - BigReal("3355534154135545253681040") * s2 * at);
    return a;
}

// ---------------------------------------------------------------------------------------------
// battery

bool BatteryReport::passed() const {
    for (const auto& c : checks)
        if (c.gating && !c.pass) return false;
    return true;
}

std::string BatteryReport::to_json() const {
    using nlohmann::ordered_json;
    ordered_json arr = ordered_json::array();
    std::size_t failed = 0;
    for (const auto& c : checks) {
        ordered_json j;
        j["check_id"] = c.check_id;
        j["suite"] = c.suite;
        j["expected"] = c.expected;
        j["computed"] = c.computed;
        j["abs_dev"] = c.abs_dev;
        j["pass"] = c.pass;
        j["gating"] = c.gating;
        arr.push_back(j);
        failed += c.gating && !c.pass;
    }
    ordered_json root;
    root["checks"] = arr;
    root["summary"] = {{"total", checks.size()}, {"failed", failed}, {"seconds", seconds}, {"pass", passed()}};
    return root.dump(2) + '\n';
}

namespace {

class Battery {
public:
    Battery(const BatteryOptions& o) : opt_(o), start_(std::chrono::steady_clock::now()) {}

    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

    // body fills computed/abs_dev/pass
    void run(const std::string& id, const std::string& suite, const std::string& expected,
             const std::function<void(CheckResult&)>& body, bool gating = true) {
        CheckResult c;
        c.check_id = id;
        c.suite = suite;
        c.expected = expected;
        c.gating = gating;
        if (elapsed() > opt_.budget_seconds) {
            c.computed = "budget exhausted";
            c.abs_dev = std::nan("");
        } else {
            try {
                body(c);
            } catch (const std::exception& e) {
                c.computed = std::string("error: ") + e.what();
                c.pass = false;
            }
        }
        report_.checks.push_back(c);
    }

    void real(const std::string& id, const std::string& suite, const BigReal& expected, double tol,
              const std::function<BigReal()>& f, bool relative = false, bool gating = true) {
        run(id, suite, to_string(expected, 20), [&](CheckResult& c) {
            BigReal v = f();
            BigReal dev = abs(v - expected);
            c.computed = to_string(v, 20);
            c.abs_dev = dev.convert_to<double>();
            BigReal bound = relative ? BigReal(tol * abs(expected)) : BigReal(tol);
            c.pass = dev < bound;
        }, gating);
    }

    void exact(const std::string& id, const Rational& expected, const std::function<Rational()>& f) {
        run(id, "exact", to_string(expected), [&](CheckResult& c) {
            Rational v = f();
            c.computed = to_string(v);
            c.abs_dev = abs(v - expected).convert_to<double>();
            c.pass = v == expected;
        });
    }

    BatteryReport finish() {
        report_.seconds = elapsed();
        return report_;
    }

    const BatteryOptions& opt_;

private:
    std::chrono::steady_clock::time_point start_;
    BatteryReport report_;
};

void exact_suite(Battery& b) {
    const std::pair<unsigned, Rational> dunkl[] = {{2, Rational(8, 33)}, {4, Rational(26, 323)},
                                                   {6, Rational(2999, 103385)}, {8, Rational(44482, 4091349)}};
    for (const auto& [d, v] : dunkl) b.exact("prob_dunkl_exact.d" + std::to_string(d), v, [d = d] { return prob_dunkl_exact(d); });
    const std::pair<unsigned, Rational> dens[] = {{1, Rational(16, 35)}, {2, Rational(256, 1575)},
                                                  {4, Rational(524288, 17342325)}};
    for (const auto& [d, v] : dens) b.exact("denominator_exact.d" + std::to_string(d), v, [d = d] { return denominator_exact(d); });

    // reference polynomials, coefficients of eps^d, eps^(d+2), ...
    const std::vector<std::pair<unsigned, std::vector<Rational>>> reference = {
        {2, {Rational(4, 3), Rational(-1, 3)}},
        {4, {Rational(84, 35), Rational(-64, 35), Rational(15, 35)}},
        {8, {Rational(12740, 1287), Rational(-25088, 1287), Rational(20160, 1287), Rational(-7680, 1287),
             Rational(1155, 1287)}}};
    const double perturb = b.opt_.chi2_coefficient_perturbation;
    for (const auto& [d, coeffs] : reference)
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            std::string id = "chi_coefficient.d" + std::to_string(d) + ".eps" + std::to_string(d + 2 * i);
            b.run(id, "exact", to_string(coeffs[i]), [&, d = d, i, c0 = coeffs[i]](CheckResult& c) {
                Rational v = chi_master_coefficients(d).at(i);
                if (d == 2 && i == 1 && perturb != 0) v += Rational(perturb);
                c.computed = to_string(v);
                c.abs_dev = abs(v - c0).convert_to<double>();
                c.pass = v == c0;
            });
        }
    for (unsigned d = 2; d <= 10; d += 2)
        b.run("chi_closed_coefficients.d" + std::to_string(d), "exact", "constant and eps^2 forms", [d](CheckResult& c) {
            auto coeffs = chi_master_coefficients(d);
            auto chk = chi_coefficient_checks(d);
            bool ok = chk.constant.rational() && chk.constant.as_rational() == coeffs.at(0) && chk.eps2.rational() &&
                      chk.eps2.as_rational() == coeffs.at(1);
            c.computed = ok ? "match" : "mismatch";
            c.pass = ok;
        });
    b.run("jacobian_taylor.jac_la_over_h_real", "exact", "80640 (1 - t^2) / t", [](CheckResult& c) {
        const unsigned order = 6;
        auto hr = jacobian_taylor(JacobianKind::h_real, order), la = jacobian_taylor(JacobianKind::jac_la, order);
        // 80640 (1 - (1+h)^2) / (1+h) = -80640 (2h + h^2) sum (-h)^n
        std::vector<Rational> f(order + 1, Rational(0));
        for (unsigned n = 0; n <= order; ++n) {
            Rational g = n % 2 ? Rational(-1) : Rational(1);
            if (n + 1 <= order) f[n + 1] += -80640 * 2 * g;
            if (n + 2 <= order) f[n + 2] += -80640 * g;
        }
        Rational worst = 0;
        for (unsigned n = 0; n <= order; ++n) {
            Rational prod = 0;
            for (unsigned j = 0; j <= n; ++j) prod += f[j] * hr[n - j];
            worst = max(worst, Rational(abs(prod - la[n])));
        }
        c.computed = worst == 0 ? "identical through order 6" : "max dev " + to_string(worst);
        c.abs_dev = worst.convert_to<double>();
        c.pass = worst == 0;
    });
}

void numeric_suite(Battery& b) {
    const BigReal pi = pi_value();
    const std::pair<Rational, Rational> concise[] = {{Rational(1, 2), Rational(29, 64)}, {Rational(1), Rational(8, 33)},
                                                     {Rational(3, 2), Rational(36061, 262144)},
                                                     {Rational(2), Rational(26, 323)}};
    for (const auto& [a, v] : concise)
        b.real("prob_concise.alpha" + to_string(a), "numeric", to_real(v), 1e-12,
               [a = a] { return prob_concise(a, BigReal("1e-16")); });
    const std::pair<unsigned, Rational> small[] = {{1, Rational(29, 64)}, {2, Rational(8, 33)}, {4, Rational(26, 323)}};
    for (const auto& [d, v] : small) {
        b.real("prob_via_t_integral.d" + std::to_string(d), "numeric", to_real(v), 1e-8,
               [d = d] { return prob_via_t_integral(d, BigReal("1e-10")); });
        b.real("prob_induced_6f5.d" + std::to_string(d), "numeric", to_real(v), 1e-6,
               [d = d] { return prob_induced_6f5(d, BigReal("1e-12")); });
    }
    for (unsigned d = 1; d <= 10; ++d)
        b.real("cross_formula.d" + std::to_string(d), "numeric", BigReal(0), 1e-6,
               [d] { return probability_report(d, BigReal("1e-10")).max_pairwise_dev; });

    b.run("chi1.master_vs_closed", "numeric", "sup < 1e-10", [](CheckResult& c) {
        BigReal worst = 0;
        for (int k = 1; k <= 19; ++k) {
            BigReal e = BigReal(k) / 20;
            worst = max(worst, BigReal(abs(chi_master(1, e, BigReal("1e-14")) - chi1_closed(e))));
        }
        c.computed = to_string(worst, 6);
        c.abs_dev = worst.convert_to<double>();
        c.pass = worst < BigReal("1e-10");
    });
    for (const char* m : {"1.5", "2", "3", "5"})
        b.real(std::string("chi1_piecewise.mu") + m, "numeric", chi1_closed(BigReal(1 / BigReal(m))), 1e-10,
               [m] { return reconstruct_chi1_piecewise(BigReal(m), BigReal("1e-14")); });
    b.real("chi1_piecewise.mu1", "numeric", BigReal(1), 1e-10, [] { return reconstruct_chi1_piecewise(BigReal(1), BigReal("1e-14")); });
    b.run("chi1_planar.mu2_forms", "numeric", "general form at mu = 2 equals the mu = 2 pair", [](CheckResult& c) {
        BigReal worst = 0;
        for (int i = 1; i < 20; ++i)
            for (int j = -19; j < 20; ++j) {
                if (j == 0) continue;
                BigReal z13 = BigReal(2 * i - 20) / 20, cap = sqrt(1 - z13 * z13);
                BigReal w = cap * j / 20;
                worst = max(worst, BigReal(abs(chi1_planar_integrand(2, z13, w / 2) / 2 - chi1_planar_integrand_mu2(z13, w))));
            }
        c.computed = to_string(worst, 6);
        c.abs_dev = worst.convert_to<double>();
        c.pass = worst < BigReal("1e-30");
    });
    b.real("chi1_planar.mu2", "numeric", chi1_closed(BigReal("0.5")), 1e-10,
           [] { return reconstruct_chi1_planar(BigReal(2), BigReal("1e-12")); });

    b.real("jacobian_integral.h_real", "numeric", BigReal(pi * pi / 2293760), 1e-10,
           [] { return jacobian_integral(JacobianKind::h_real, BigReal("1e-20")); }, true);
    b.real("jacobian_integral.jac_la", "numeric", to_real(Rational(16, 35)), 1e-10,
           [] { return jacobian_integral(JacobianKind::jac_la, BigReal("1e-20")); }, true);
    b.real("jacobian_integral.h_complex_scaled", "numeric", to_real(Rational(256, 1575)), 1e-10,
           [] { return BigReal(328007680 * jacobian_integral(JacobianKind::h_complex, BigReal("1e-20"))); }, true);
    b.real("jacobian_integral.seven_dim_whole", "numeric", to_real(Rational(1, 5040)), 1e-10,
           [] { return jacobian_integral(JacobianKind::seven_dim, BigReal("1e-20"), true); }, true);
    b.real("jacobian_integral.eleven_dim_whole", "numeric", to_real(Rational(1, 9979200)), 1e-10,
           [] { return jacobian_integral(JacobianKind::eleven_dim, BigReal("1e-20"), true); }, true);
    b.run("jacobian.ratio_real", "numeric", "80640 (1 - t^2) / t", [](CheckResult& c) {
        BigReal worst = 0;
        for (int i = 0; i < 100; ++i) {
            BigReal t = (BigReal(i) + BigReal("0.5")) / 100;
            BigReal r = jacobian_eval(JacobianKind::jac_la, t) / jacobian_eval(JacobianKind::h_real, t);
            BigReal e = 80640 * (1 - t * t) / t;
            worst = max(worst, BigReal(abs(r / e - 1)));
        }
        c.computed = "max rel dev " + to_string(worst, 6);
        c.abs_dev = worst.convert_to<double>();
        c.pass = worst < BigReal("1e-10");
    });
    b.run("jacobian.ratio_complex", "numeric", "210862080 (1 - t^2)^2 / t^2", [](CheckResult& c) {
        BigReal worst = 0;
        for (int i = 0; i < 100; ++i) {
            BigReal t = (BigReal(i) + BigReal("0.5")) / 100;
            BigReal r = jac_la_complex(t) / jacobian_eval(JacobianKind::h_complex, t);
            BigReal e = 210862080 * pow(1 - t * t, 2) / (t * t);
            worst = max(worst, BigReal(abs(r / e - 1)));
        }
        c.computed = "max rel dev " + to_string(worst, 6);
        c.abs_dev = worst.convert_to<double>();
        c.pass = worst < BigReal("1e-10");
    });
    b.run("jacobian.positive_grid", "numeric", "all five positive on 1000 points", [](CheckResult& c) {
        int bad = 0;
        for (JacobianKind k : {JacobianKind::h_real, JacobianKind::h_complex, JacobianKind::jac_la, JacobianKind::seven_dim,
                               JacobianKind::eleven_dim})
            for (int i = 1; i <= 1000; ++i)
                bad += !(jacobian_eval(k, BigReal(i) / 1001) > 0);
        c.computed = std::to_string(bad) + " nonpositive";
        c.abs_dev = bad;
        c.pass = bad == 0;
    });

    b.real("monotone.d2", "numeric", BigReal(1 - 256 / (27 * pi * pi)), 1e-6,
           [] { return prob_monotone_sqrt(2, BigReal("1e-10")).probability; });
    b.real("monotone.d1", "numeric", BigReal("0.26223"), 5e-5, [] { return prob_monotone_sqrt(1, BigReal("1e-10")).probability; });
    b.real("monotone.d1_denominator", "numeric", BigReal(2 * pi / 3), 1e-8,
           [] { return prob_monotone_sqrt(1, BigReal("1e-10")).denominator; });

    b.real("chi_3d.cubature.d2.eps0.5", "numeric", to_real(Rational(5, 16)), 1e-6,
           [] { return reconstruct_chi_3d(2, BigReal("0.5"), ReconstructionMethod::cubature).value; });
    for (unsigned d : {1u, 2u, 3u, 4u})
        b.real("chi_3d.cubature.d" + std::to_string(d) + ".eps1", "numeric", BigReal(1), 1e-8,
               [d] { return reconstruct_chi_3d(d, BigReal(1), ReconstructionMethod::cubature).value; });
    for (unsigned d : {1u, 2u, 4u})
        for (const char* e : {"0.3", "0.7"})
            b.real("chi_3d.xstate.d" + std::to_string(d) + ".eps" + e, "numeric", BigReal(pow(BigReal(e), static_cast<long>(d))), 1e-8,
                   [d, e] { return reconstruct_chi_3d_xstate(d, BigReal(e), ReconstructionMethod::cubature).value; });

    auto abs_sep = absolute_separability_constants();
    b.real("absolute_separability.rebit", "numeric", BigReal("0.0348338"), 1e-6, [&] { return abs_sep.rebit; });
    b.real("absolute_separability.qubit", "numeric", BigReal("0.00365826"), 1e-7, [&] { return abs_sep.qubit; });
    b.real("absolute_separability.quaterbit", "numeric", BigReal("0.0000401326"), 1e-9, [&] { return abs_sep.quaterbit; });

    b.real("reduced_set.sevenDim_minor", "numeric", to_real(Rational(71, 105)), 1e-8,
           [] { return reduced_set_probability(ReducedSetting::sevenDim_minor, BigReal("1e-14")).value; });
    b.real("reduced_set.elevenDim_minor", "numeric", to_real(Rational(126, 181)), 1e-8,
           [] { return reduced_set_probability(ReducedSetting::elevenDim_minor, BigReal("1e-14")).value; });
    // exploratory: the pairing behind these reference values is not known
    b.real("reduced_set.elevenDim", "numeric", BigReal(BigReal(746149) / 21 - 3600 * pi * pi), 1e-6,
           [] { return reduced_set_probability(ReducedSetting::elevenDim, BigReal("1e-14")).value; }, false, false);
    b.real("reduced_set.sevenDim", "numeric", BigReal("0.4197023"), 1e-6,
           [] { return reduced_set_probability(ReducedSetting::sevenDim, BigReal("1e-14")).value; }, false, false);

    b.run("defect.ratio", "numeric", "2 pi^2 / 3", [&](CheckResult& c) {
        BigReal worst = 0;
        for (const char* dl : {"0.1", "1", "3"}) {
            auto r = defect(BigReal(dl), BigReal("1e-20"));
            worst = max(worst, BigReal(abs(r.ratio - 2 * pi * pi / 3)));
        }
        c.computed = "max dev " + to_string(worst, 6);
        c.abs_dev = worst.convert_to<double>();
        c.pass = worst < BigReal("1e-12");
    });
}

struct Moment {
    double s = 0, s2 = 0;
    std::uint64_t n = 0;
    void add(double x) {
        s += x;
        s2 += x * x;
        ++n;
    }
    double mean() const { return s / n; }
    double se() const { return std::sqrt((s2 / n - mean() * mean()) / n); }
};

void mc_suite(Battery& b) {
    const std::uint64_t n = b.opt_.mc_samples;
    auto within = [](CheckResult& c, double value, double target, double se, double k) {
        c.computed = std::to_string(value) + " +- " + std::to_string(se);
        c.abs_dev = std::abs(value - target);
        c.pass = c.abs_dev < k * se;
    };

    b.run("moments.ginibre_real_m5.q11", "mc", "1/4", [&](CheckResult& c) {
        Moment m;
        for (std::uint64_t i = 0; i < n; ++i) {
            RngStream r(101, i);
            m.add(sample_hs_ginibre(FieldKind::real, 4, r).entries(0, 0).real());
        }
        within(c, m.mean(), 0.25, m.se(), 3);
    });
    b.run("moments.ginibre_complex_m4.q11", "mc", "1/4", [&](CheckResult& c) {
        Moment m;
        for (std::uint64_t i = 0; i < n; ++i) {
            RngStream r(102, i);
            m.add(sample_hs_ginibre(FieldKind::complex, 4, r).entries(0, 0).real());
        }
        within(c, m.mean(), 0.25, m.se(), 3);
    });
    b.run("moments.cholesky_alpha2.q11sq", "mc", "2/29", [&](CheckResult& c) {
        Moment m;
        RngStream r(103, 0);
        for (std::uint64_t i = 0; i < n; ++i) {
            double q = sample_cholesky_weighted(2.0, r).diag[0];
            m.add(q * q);
        }
        within(c, m.mean(), 2.0 / 29, m.se(), 3);
    });
    for (int mrows : {4, 5}) {
        const double exact = (2.0 * mrows) * (2.0 * mrows + 1) / ((8.0 * mrows) * (8.0 * mrows + 1));
        b.run("moments.pairing_m" + std::to_string(mrows), "mc", "Cholesky k = 2M-7 matches quaternionic Ginibre",
              [&, mrows, exact](CheckResult& c) {
                  Moment g, h;
                  RngStream rg(104, mrows), rh(105, mrows);
                  for (std::uint64_t i = 0; i < n; ++i) {
                      double q = sample_quaternion_ginibre_q11(mrows, rg);
                      g.add(q * q);
                      double s = sample_cholesky_weighted(2.0, rh, 2 * mrows - 7).diag[0];
                      h.add(s * s);
                  }
                  double se = std::sqrt(g.se() * g.se() + h.se() * h.se());
                  c.computed = std::to_string(g.mean()) + " vs " + std::to_string(h.mean()) + " (exact " +
                               std::to_string(exact) + ")";
                  c.abs_dev = std::abs(g.mean() - h.mean());
                  c.pass = c.abs_dev < 3 * se && std::abs(g.mean() - exact) < 3 * g.se() &&
                           std::abs(h.mean() - exact) < 3 * h.se();
              });
    }

    const double pi = std::acos(-1.0);
    const std::pair<Ensemble, double> stat[] = {{Ensemble::qubit4, 8.0 / 33},
                                                {Ensemble::rebit4, 29.0 / 64},
                                                {Ensemble::xstate_real, 16 / (3 * pi * pi)},
                                                {Ensemble::xstate_complex, 0.4}};
    for (const auto& [e, target] : stat)
        b.run("harness." + to_string(e), "mc", std::to_string(target), [&, e = e, target = target](CheckResult& c) {
            ExperimentConfig cfg;
            cfg.ensemble = e;
            cfg.sample_count = n;
            cfg.seed = 2024;
            auto r = run_experiment(cfg);
            within(c, r.p_hat, target, r.stderr_p, 3);
            if (e == Ensemble::qubit4 || e == Ensemble::rebit4) {
                auto rows = residual_curve(r.bins[0], reference_chi(e), 10000);
                double worst = 0;
                int used = 0;
                for (const auto& row : rows)
                    if (row.reliable) {
                        worst = std::max(worst, std::abs(row.residual));
                        ++used;
                    }
                c.computed += ", max residual " + std::to_string(worst) + " over " + std::to_string(used) + " bins";
                c.pass = c.pass && worst < 0.02;
            }
        });
    const std::pair<Ensemble, double> six[] = {{Ensemble::rebit_retrit6, 0.1318001}, {Ensemble::qubit_qutrit6, 0.027853}};
    for (const auto& [e, target] : six)
        b.run("harness." + to_string(e), "mc", std::to_string(target), [&, e = e, target = target](CheckResult& c) {
            ExperimentConfig cfg;
            cfg.ensemble = e;
            cfg.sample_count = n / 10;
            cfg.seed = 2024;
            cfg.axes = {};
            auto r = run_experiment(cfg);
            c.computed = std::to_string(r.p_hat) + " +- " + std::to_string(r.stderr_p);
            c.abs_dev = std::abs(r.p_hat - target);
            // the fixed 0.002 band is meant for 1e7 samples; smaller runs add their own noise
            c.pass = c.abs_dev < 0.002 + 3 * r.stderr_p;
            if (e == Ensemble::rebit_retrit6) {
                double f = *r.two_negative_fraction();
                c.computed += ", two negative " + std::to_string(f);
                c.pass = c.pass && std::abs(f - 0.0334197) < 0.002 + 3 * std::sqrt(f * (1 - f) / r.total);
            }
        });
    b.real("chi_3d.monte_carlo.d2.eps0.5", "mc", to_real(Rational(5, 16)), 5e-3, [&] {
        ReconstructionBudget bud;
        bud.points = 10 * n;
        return reconstruct_chi_3d(2, BigReal("0.5"), ReconstructionMethod::monte_carlo, bud).value;
    });
}

}  // namespace

BatteryReport run_full_battery(const BatteryOptions& options) {
    Battery b(options);
    if (options.exact) exact_suite(b);
    if (options.numeric) numeric_suite(b);
    if (options.mc) mc_suite(b);
    return b.finish();
}

}  // namespace sepscope
