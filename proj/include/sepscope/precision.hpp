#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <string>

namespace sepscope {

using BigInt = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;
using BigReal = boost::multiprecision::mpfr_float;

// Working precision in bits.  SEPSCOPE_PRECISION_BITS overrides the 256 default.
unsigned default_precision_bits();
unsigned current_precision_bits();

// Bits needed for a relative target plus the 64-bit guard margin.
unsigned bits_for_tolerance(double tol);

// Sets the working precision for every BigReal created in its lifetime.
class PrecisionScope {
public:
    explicit PrecisionScope(unsigned bits);
    ~PrecisionScope();
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    unsigned saved_digits10_;
};

// Copies keep their source precision; this re-rounds x to the current default.
BigReal promote(const BigReal& x);

BigReal pi_value();
BigReal to_real(const Rational& q);
BigReal to_real(const BigInt& n);

// Positive epsilon of the current working precision.
BigReal working_epsilon();

std::string to_string(const BigReal& x, int digits = 20);
std::string to_string(const Rational& q);

}  // namespace sepscope
