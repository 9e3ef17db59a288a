#pragma once

#include "sepscope/precision.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sepscope {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Iterative method ran out of budget; carries what it had.
struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& what, BigReal best_estimate, BigReal achieved_error)
        : std::runtime_error(what), best(std::move(best_estimate)), achieved(std::move(achieved_error)) {}
    BigReal best;
    BigReal achieved;
};

Rational pochhammer(const Rational& a, unsigned n);
BigReal pochhammer(const BigReal& a, unsigned n);

Rational factorial(unsigned n);
Rational harmonic(unsigned n);

// coeff * sqrt(pi)^sqrt_pi * sqrt(3)^sqrt3 * Gamma(1/3)^g3 * Gamma(1/6)^g6.
// The two gamma exponents only cancel through reflection; closed() demands both zero.
struct ClosedForm {
    Rational coeff{1};
    int sqrt_pi = 0;
    int sqrt3 = 0;
    int gamma_third = 0;
    int gamma_sixth = 0;

    bool closed() const { return gamma_third == 0 && gamma_sixth == 0; }
    // Pure rational: closed with no pi or sqrt(3) residue left.
    bool rational() const { return closed() && sqrt_pi == 0 && sqrt3 % 2 == 0; }
    Rational as_rational() const;  // throws when !rational()
    BigReal value() const;

    ClosedForm& operator*=(const ClosedForm& o);
    ClosedForm& operator/=(const ClosedForm& o);
    friend ClosedForm operator*(ClosedForm a, const ClosedForm& b) { return a *= b; }
    friend ClosedForm operator/(ClosedForm a, const ClosedForm& b) { return a /= b; }
    friend bool operator==(const ClosedForm& a, const ClosedForm& b);
    ClosedForm pow(int k) const;

    static ClosedForm of(const Rational& q);
    static ClosedForm pi(int power = 1);
    static ClosedForm sqrt_three(int power = 1);
};

// Gamma at a rational with denominator 1, 2, 3 or 6; nullopt otherwise or at poles.
std::optional<ClosedForm> gamma_rational_closed(const Rational& a);

// Li2 for |x| <= 1.
BigReal dilog(const BigReal& x);

BigReal gamma_fn(const BigReal& x);
BigReal rgamma_fn(const BigReal& x);  // 1/Gamma, zero at poles
BigReal lgamma_fn(const BigReal& x);
BigReal digamma_fn(const BigReal& x);

// Levin u transform over partial sums; returns the estimate from the last n terms.
class LevinU {
public:
    void add(const BigReal& term);
    std::size_t size() const { return terms_.size(); }
    BigReal partial_sum() const { return sums_.empty() ? BigReal(0) : sums_.back(); }
    BigReal estimate() const;
    BigReal estimate(std::size_t n) const;

private:
    std::vector<BigReal> terms_;
    std::vector<BigReal> sums_;
};

// Accepts p/q only when |x - p/q| < 2^(-bits/2) and q < max_den.
std::optional<Rational> rationalize(const BigReal& x, unsigned bits, const BigInt& max_den = BigInt(1000000000));

}  // namespace sepscope
