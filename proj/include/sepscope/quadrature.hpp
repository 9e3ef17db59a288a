#pragma once

#include "sepscope/special.hpp"

#include <functional>

namespace sepscope {

using RealFn = std::function<BigReal(const BigReal&)>;
using RealFn2 = std::function<BigReal(const BigReal&, const BigReal&)>;

// Endpoints with a log or algebraic singularity.
enum class Endpoint : unsigned { none = 0, left = 1, right = 2, both = 3 };

struct QuadResult {
    BigReal value;
    BigReal error;
    std::size_t evaluations = 0;
};

// Converged when error <= tol * max(|I|, tol); ConvergenceError past the budget.
QuadResult integrate_1d_report(const RealFn& f, const BigReal& a, const BigReal& b, const BigReal& tol,
                               Endpoint flags = Endpoint::none);
BigReal integrate_1d(const RealFn& f, const BigReal& a, const BigReal& b, const BigReal& tol,
                     Endpoint flags = Endpoint::none);

// Double-exponential rule on [a, b].  Never evaluates at the endpoints.
QuadResult tanh_sinh(const RealFn& f, const BigReal& a, const BigReal& b, const BigReal& tol, int max_level = 11);

// Adaptive Gauss-Legendre panels with bisection.
QuadResult gauss_legendre_adaptive(const RealFn& f, const BigReal& a, const BigReal& b, const BigReal& tol);

// Iterated integral over {a <= x <= b, lo(x) <= y <= hi(x)}.
BigReal integrate_iterated(const RealFn2& f, const BigReal& a, const BigReal& b, const RealFn& lo, const RealFn& hi,
                           const BigReal& tol, Endpoint outer = Endpoint::none, Endpoint inner = Endpoint::none);

// Triangle -1 <= y <= x <= 1.
BigReal integrate_2d(const RealFn2& f, const BigReal& tol, Endpoint outer = Endpoint::none,
                     Endpoint inner = Endpoint::none);

// Trapezoid rule on the whole line for smooth integrands with fast decay.
QuadResult integrate_real_line(const RealFn& f, const BigReal& tol, const BigReal& h0 = BigReal(1) / 2);

}  // namespace sepscope
