#include "sepscope/quadrature.hpp"

#include <deque>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace sepscope {

namespace {

struct Node {
    BigReal x;
    BigReal w;
};

std::mutex cache_mutex;

const std::vector<Node>& legendre_nodes(unsigned n) {
    static std::map<std::pair<unsigned, unsigned>, std::vector<Node>> cache;
    const unsigned bits = current_precision_bits();
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto key = std::make_pair(n, bits);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    std::vector<Node> nodes;
    const BigReal pi = pi_value();
    const BigReal eps = working_epsilon() * 16;
    for (unsigned i = 1; i <= (n + 1) / 2; ++i) {
        BigReal x = cos(pi * (BigReal(i) - BigReal(1) / 4) / (BigReal(n) + BigReal(1) / 2));
        BigReal dp = 0;
        for (int it = 0; it < 200; ++it) {
            BigReal p0 = 1, p1 = x;
            for (unsigned k = 2; k <= n; ++k) {
                BigReal p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1);
            BigReal dx = p1 / dp;
            x -= dx;
            if (abs(dx) <= eps) break;
        }
        BigReal w = 2 / ((1 - x * x) * dp * dp);
        nodes.push_back({x, w});
        if (!(n % 2 == 1 && i == (n + 1) / 2)) nodes.push_back({BigReal(-x), w});
    }
    return cache.emplace(key, std::move(nodes)).first->second;
}

BigReal gl_panel(const RealFn& f, const BigReal& a, const BigReal& b, std::size_t& evals) {
    const auto& nodes = legendre_nodes(20);
    BigReal c = (a + b) / 2, h = (b - a) / 2, s = 0;
    for (const auto& nd : nodes) s += nd.w * f(c + h * nd.x);
    evals += nodes.size();
    return s * h;
}

// Normalized tanh-sinh abscissae on [-1, 1] for t > 0: complement 1 - x and weight.
struct TsLevel {
    std::vector<Node> nodes;  // x holds the complement 1 - |x|
};

struct TsTable {
    BigReal center_weight;
    std::vector<TsLevel> levels;
};

const TsTable& ts_table(int max_level) {
    static std::map<unsigned, TsTable> cache;
    const unsigned bits = current_precision_bits();
    std::lock_guard<std::mutex> lock(cache_mutex);
    TsTable& tab = cache[bits];
    if (static_cast<int>(tab.levels.size()) > max_level) return tab;

    const BigReal half_pi = pi_value() / 2;
    BigReal cutoff = 1;
    mpfr_mul_2si(cutoff.backend().data(), cutoff.backend().data(), -static_cast<long>(bits) - 24, MPFR_RNDN);
    tab.center_weight = half_pi;
    for (int lev = static_cast<int>(tab.levels.size()); lev <= max_level; ++lev) {
        TsLevel L;
        BigReal h = 1;
        mpfr_mul_2si(h.backend().data(), h.backend().data(), -lev, MPFR_RNDN);
        const long step = lev == 0 ? 1 : 2;
        for (long k = 1;; k += step) {
            BigReal t = h * k;
            BigReal u = half_pi * sinh(t);
            BigReal e2u = exp(2 * u);
            BigReal comp = 2 / (e2u + 1);
            BigReal ch = cosh(u);
            BigReal w = half_pi * cosh(t) / (ch * ch);
            if (w < cutoff) break;
            L.nodes.push_back({comp, w});
        }
        tab.levels.push_back(std::move(L));
    }
    return tab;
}

}  // namespace

QuadResult tanh_sinh(const RealFn& f, const BigReal& a, const BigReal& b, const BigReal& tol, int max_level) {
    const TsTable& tab = ts_table(max_level);
    const BigReal hw = (b - a) / 2;
    QuadResult r;
    BigReal sum = tab.center_weight * f((a + b) / 2);
    r.evaluations = 1;
    BigReal prev = 0;
    BigReal h = 1;
    for (int lev = 0; lev <= max_level; ++lev) {
        for (const auto& nd : tab.levels[lev].nodes) {
            BigReal off = hw * nd.x;
            BigReal xl = a + off, xr = b - off;
            if (xl > a) sum += nd.w * f(xl);
            if (xr < b) sum += nd.w * f(xr);
            r.evaluations += 2;
        }
        if (lev > 0) mpfr_mul_2si(h.backend().data(), h.backend().data(), -1, MPFR_RNDN);
        BigReal est = sum * h * hw;
        if (lev >= 3) {
            BigReal err = abs(est - prev);
            BigReal bound = tol * std::max(BigReal(abs(est)), tol);
            if (err <= bound) {
                r.value = est;
                r.error = err;
                return r;
            }
        }
        prev = est;
        r.value = est;
    }
    throw ConvergenceError("tanh-sinh level budget exhausted", r.value, BigReal(abs(r.value - prev)));
}

QuadResult gauss_legendre_adaptive(const RealFn& f, const BigReal& a, const BigReal& b, const BigReal& tol) {
    QuadResult r;
    std::size_t evals = 0;
    BigReal whole = gl_panel(f, a, b, evals);
    BigReal abs_tol = tol * std::max(BigReal(abs(whole)), tol);

    struct Panel {
        BigReal a, b, est, tol;
        int depth;
    };
    std::deque<Panel> work{{a, b, whole, abs_tol, 0}};
    BigReal total = 0, err = 0;
    const std::size_t budget = 400000;
    while (!work.empty()) {
        Panel p = std::move(work.front());
        work.pop_front();
        BigReal m = (p.a + p.b) / 2;
        BigReal l = gl_panel(f, p.a, m, evals), rr = gl_panel(f, m, p.b, evals);
        BigReal diff = abs(l + rr - p.est);
        if (diff <= p.tol || p.depth >= 60) {
            total += l + rr;
            err += diff;
            continue;
        }
        if (evals > budget) throw ConvergenceError("Gauss-Legendre budget exhausted", BigReal(total + l + rr), diff);
        work.push_back({p.a, m, l, p.tol / 2, p.depth + 1});
        work.push_back({m, p.b, rr, p.tol / 2, p.depth + 1});
    }
    r.value = total;
    r.error = err;
    r.evaluations = evals;
    return r;
}

QuadResult integrate_1d_report(const RealFn& f, const BigReal& a, const BigReal& b, const BigReal& tol,
                               Endpoint flags) {
    if (a == b) return {BigReal(0), BigReal(0), 0};
    if (b < a) {
        QuadResult r = integrate_1d_report(f, b, a, tol, flags);
        r.value = -r.value;
        return r;
    }
    if (flags != Endpoint::none) return tanh_sinh(f, a, b, tol);
    return gauss_legendre_adaptive(f, a, b, tol);
}

BigReal integrate_1d(const RealFn& f, const BigReal& a, const BigReal& b, const BigReal& tol, Endpoint flags) {
    return integrate_1d_report(f, a, b, tol, flags).value;
}

BigReal integrate_iterated(const RealFn2& f, const BigReal& a, const BigReal& b, const RealFn& lo, const RealFn& hi,
                           const BigReal& tol, Endpoint outer, Endpoint inner) {
    // inner integrals a notch tighter than the outer target
    const BigReal inner_tol = tol / 16;
    RealFn g = [&](const BigReal& x) {
        BigReal y0 = lo(x), y1 = hi(x);
        if (y1 <= y0) return BigReal(0);
        return integrate_1d([&](const BigReal& y) { return f(x, y); }, y0, y1, inner_tol, inner);
    };
    return integrate_1d(g, a, b, tol, outer);
}

BigReal integrate_2d(const RealFn2& f, const BigReal& tol, Endpoint outer, Endpoint inner) {
    return integrate_iterated(f, BigReal(-1), BigReal(1), [](const BigReal&) { return BigReal(-1); },
                              [](const BigReal& x) { return x; }, tol, outer, inner);
}

QuadResult integrate_real_line(const RealFn& f, const BigReal& tol, const BigReal& h0) {
    // values[k - kmin] = f(k h)
    QuadResult r;
    BigReal h = h0;
    long kmin = 0, kmax = 0;
    std::vector<BigReal> vals{f(BigReal(0))};
    r.evaluations = 1;

    auto extend = [&](BigReal& sum) {
        const BigReal small = tol * tol;
        for (int dir : {-1, 1}) {
            int quiet = 0;
            while (quiet < 4) {
                long k = dir < 0 ? kmin - 1 : kmax + 1;
                BigReal v = f(h * k);
                ++r.evaluations;
                if (dir < 0) {
                    vals.insert(vals.begin(), v);
                    kmin = k;
                } else {
                    vals.push_back(v);
                    kmax = k;
                }
                sum += v;
                if (abs(v) <= small * abs(sum) || v == 0)
                    ++quiet;
                else
                    quiet = 0;
                if (kmax - kmin > 4000000) throw ConvergenceError("real-line trapezoid did not decay", sum * h, sum);
            }
        }
    };

    BigReal sum = vals[0];
    extend(sum);
    BigReal prev = sum * h;
    for (int level = 0; level < 24; ++level) {
        // refine: interleave odd points
        std::vector<BigReal> nv;
        nv.reserve(2 * vals.size());
        BigReal hn = h / 2;
        for (long k = kmin; k <= kmax; ++k) {
            nv.push_back(vals[k - kmin]);
            if (k < kmax) {
                BigReal v = f(hn * (2 * k + 1));
                ++r.evaluations;
                sum += v;
                nv.push_back(v);
            }
        }
        vals.swap(nv);
        kmin *= 2;
        kmax *= 2;
        h = hn;
        extend(sum);
        BigReal est = sum * h;
        BigReal err = abs(est - prev);
        if (level >= 1 && err <= tol * std::max(BigReal(abs(est)), tol)) {
            r.value = est;
            r.error = err;
            return r;
        }
        prev = est;
    }
    throw ConvergenceError("real-line trapezoid budget exhausted", prev, prev);
}

}  // namespace sepscope
