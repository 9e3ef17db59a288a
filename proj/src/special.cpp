#include "sepscope/special.hpp"

namespace sepscope {

using boost::multiprecision::denominator;
using boost::multiprecision::numerator;

Rational pochhammer(const Rational& a, unsigned n) {
    Rational r = 1;
    for (unsigned i = 0; i < n; ++i) r *= a + i;
    return r;
}

BigReal pochhammer(const BigReal& a, unsigned n) {
    BigReal r = 1;
    for (unsigned i = 0; i < n; ++i) r *= a + i;
    return r;
}

Rational factorial(unsigned n) {
    BigInt r = 1;
    for (unsigned i = 2; i <= n; ++i) r *= i;
    return Rational(r);
}

Rational harmonic(unsigned n) {
    Rational h = 0;
    for (unsigned k = 1; k <= n; ++k) h += Rational(1, k);
    return h;
}

namespace {

void normalize(ClosedForm& c) {
    // keep sqrt3 in {0, 1}; whole powers of 3 go into the coefficient
    int whole = c.sqrt3 >= 0 ? c.sqrt3 / 2 : -((1 - c.sqrt3) / 2);
    c.sqrt3 -= 2 * whole;
    Rational three(3);
    if (whole > 0)
        for (int i = 0; i < whole; ++i) c.coeff *= three;
    else
        for (int i = 0; i < -whole; ++i) c.coeff /= three;
}

BigReal pow_int(const BigReal& x, int k) {
    BigReal r = 1;
    BigReal b = k >= 0 ? x : BigReal(1 / x);
    for (int i = 0; i < (k >= 0 ? k : -k); ++i) r *= b;
    return r;
}

}  // namespace

Rational ClosedForm::as_rational() const {
    if (!rational()) throw DomainError("closed form carries a transcendental factor");
    ClosedForm c = *this;
    normalize(c);
    return c.coeff;
}

BigReal ClosedForm::value() const {
    BigReal v = to_real(coeff);
    if (sqrt_pi) v *= pow_int(sqrt(pi_value()), sqrt_pi);
    if (sqrt3) v *= pow_int(sqrt(BigReal(3)), sqrt3);
    if (gamma_third) v *= pow_int(gamma_fn(BigReal(1) / 3), gamma_third);
    if (gamma_sixth) v *= pow_int(gamma_fn(BigReal(1) / 6), gamma_sixth);
    return v;
}

ClosedForm& ClosedForm::operator*=(const ClosedForm& o) {
    coeff *= o.coeff;
    sqrt_pi += o.sqrt_pi;
    sqrt3 += o.sqrt3;
    gamma_third += o.gamma_third;
    gamma_sixth += o.gamma_sixth;
    normalize(*this);
    return *this;
}

ClosedForm& ClosedForm::operator/=(const ClosedForm& o) {
    if (o.coeff == 0) throw DomainError("division by zero closed form");
    coeff /= o.coeff;
    sqrt_pi -= o.sqrt_pi;
    sqrt3 -= o.sqrt3;
    gamma_third -= o.gamma_third;
    gamma_sixth -= o.gamma_sixth;
    normalize(*this);
    return *this;
}

bool operator==(const ClosedForm& a, const ClosedForm& b) {
    ClosedForm x = a, y = b;
    normalize(x);
    normalize(y);
    if (x.coeff == 0 || y.coeff == 0) return x.coeff == y.coeff;
    return x.coeff == y.coeff && x.sqrt_pi == y.sqrt_pi && x.sqrt3 == y.sqrt3 &&
           x.gamma_third == y.gamma_third && x.gamma_sixth == y.gamma_sixth;
}

ClosedForm ClosedForm::pow(int k) const {
    ClosedForm r;
    for (int i = 0; i < (k >= 0 ? k : -k); ++i) r *= *this;
    return k >= 0 ? r : ClosedForm{} / r;
}

ClosedForm ClosedForm::of(const Rational& q) {
    ClosedForm c;
    c.coeff = q;
    return c;
}

ClosedForm ClosedForm::pi(int power) {
    ClosedForm c;
    c.sqrt_pi = 2 * power;
    return c;
}

ClosedForm ClosedForm::sqrt_three(int power) {
    ClosedForm c;
    c.sqrt3 = power;
    normalize(c);
    return c;
}

std::optional<ClosedForm> gamma_rational_closed(const Rational& a) {
    BigInt den = denominator(a);
    if (den != 1 && den != 2 && den != 3 && den != 6) return std::nullopt;
    if (den == 1 && a <= 0) return std::nullopt;

    // a = base + shift with base in (0, 1]
    BigInt fl = numerator(a) / den;
    if (numerator(a) < 0 && numerator(a) % den != 0) fl -= 1;
    Rational base = a - Rational(fl);
    if (base == 0) base = 1;
    Rational diff = a - base;
    long shift = BigInt(numerator(diff) / denominator(diff)).convert_to<long>();

    ClosedForm g;
    if (base == 1) {
    } else if (base == Rational(1, 2)) {
        g.sqrt_pi = 1;
    } else if (base == Rational(1, 3)) {
        g.gamma_third = 1;
    } else if (base == Rational(2, 3)) {
        // reflection: Gamma(1/3) Gamma(2/3) = 2 pi / sqrt(3)
        g.coeff = 2;
        g.sqrt_pi = 2;
        g.sqrt3 = -1;
        g.gamma_third = -1;
        normalize(g);
    } else if (base == Rational(1, 6)) {
        g.gamma_sixth = 1;
    } else if (base == Rational(5, 6)) {
        // Gamma(1/6) Gamma(5/6) = 2 pi
        g.coeff = 2;
        g.sqrt_pi = 2;
        g.gamma_sixth = -1;
    } else {
        return std::nullopt;
    }

    if (shift >= 0)
        g.coeff *= pochhammer(base, static_cast<unsigned>(shift));
    else
        g.coeff /= pochhammer(a, static_cast<unsigned>(-shift));
    return g;
}

BigReal dilog(const BigReal& x) {
    if (abs(x) > 1) throw DomainError("dilog: |x| > 1");
    BigReal r;
    mpfr_li2(r.backend().data(), x.backend().data(), MPFR_RNDN);
    return r;
}

BigReal gamma_fn(const BigReal& x) {
    BigReal r;
    mpfr_gamma(r.backend().data(), x.backend().data(), MPFR_RNDN);
    return r;
}

BigReal rgamma_fn(const BigReal& x) {
    if (x <= 0 && x == floor(x)) return BigReal(0);
    return 1 / gamma_fn(x);
}

BigReal lgamma_fn(const BigReal& x) {
    BigReal r;
    mpfr_lngamma(r.backend().data(), x.backend().data(), MPFR_RNDN);
    return r;
}

BigReal digamma_fn(const BigReal& x) {
    BigReal r;
    mpfr_digamma(r.backend().data(), x.backend().data(), MPFR_RNDN);
    return r;
}

void LevinU::add(const BigReal& term) {
    terms_.push_back(term);
    sums_.push_back(sums_.empty() ? term : BigReal(sums_.back() + term));
}

BigReal LevinU::estimate() const { return estimate(terms_.size()); }

BigReal LevinU::estimate(std::size_t n) const {
    if (n == 0) return BigReal(0);
    if (n > terms_.size()) n = terms_.size();
    for (std::size_t j = 0; j < n; ++j)
        if (terms_[j] == 0) return sums_[n - 1];
    // u variant, beta = 1: omega_j = (j + 1) a_j
    const std::size_t N = n - 1;
    BigReal num = 0, den = 0;
    BigReal binom = 1;
    const BigReal bN = BigReal(N + 1);
    for (std::size_t j = 0; j <= N; ++j) {
        BigReal ratio = pow(BigReal(j + 1) / bN, static_cast<long>(N) - 1);
        BigReal c = binom * ratio / (BigReal(j + 1) * terms_[j]);
        if (j % 2) c = -c;
        num += c * sums_[j];
        den += c;
        binom = binom * BigReal(N - j) / BigReal(j + 1);
    }
    return num / den;
}

std::optional<Rational> rationalize(const BigReal& x, unsigned bits, const BigInt& max_den) {
    BigReal tol = 1;
    mpfr_mul_2si(tol.backend().data(), tol.backend().data(), -static_cast<long>(bits / 2), MPFR_RNDN);
    // continued fraction convergents
    BigInt p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    BigReal r = x;
    for (int it = 0; it < 200; ++it) {
        BigReal fl = floor(r);
        BigInt a = fl.convert_to<BigInt>();
        BigInt p2 = a * p1 + p0, q2 = a * q1 + q0;
        if (q2 >= max_den) return std::nullopt;
        Rational cand(p2, q2);
        if (abs(x - to_real(cand)) < tol) return cand;
        BigReal frac = r - fl;
        if (frac == 0) return std::nullopt;
        r = 1 / frac;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    return std::nullopt;
}

}  // namespace sepscope
