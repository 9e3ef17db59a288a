#include "sepscope/precision.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <sstream>

namespace sepscope {

namespace {

unsigned bits_to_digits10(unsigned bits) {
    return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

}  // namespace

unsigned default_precision_bits() {
    static const unsigned bits = [] {
        if (const char* env = std::getenv("SEPSCOPE_PRECISION_BITS")) {
            char* end = nullptr;
            long v = std::strtol(env, &end, 10);
            if (end != env && v >= 64 && v <= 1 << 16) return static_cast<unsigned>(v);
        }
        return 256u;
    }();
    return bits;
}

unsigned current_precision_bits() {
    BigReal probe(0);
    return static_cast<unsigned>(mpfr_get_prec(probe.backend().data()));
}

unsigned bits_for_tolerance(double tol) {
    if (!(tol > 0)) tol = 1e-30;
    unsigned target = static_cast<unsigned>(std::ceil(-std::log2(tol)));
    return std::max(target + 64u, 96u);
}

namespace {
const bool precision_initialized = [] {
    BigReal::default_precision(bits_to_digits10(default_precision_bits()));
    return true;
}();
}  // namespace

PrecisionScope::PrecisionScope(unsigned bits) : saved_digits10_(BigReal::default_precision()) {
    BigReal::default_precision(bits_to_digits10(bits));
}

PrecisionScope::~PrecisionScope() { BigReal::default_precision(saved_digits10_); }

BigReal promote(const BigReal& x) { return BigReal(x, BigReal::default_precision()); }

BigReal pi_value() {
    BigReal r;
    mpfr_const_pi(r.backend().data(), MPFR_RNDN);
    return r;
}

BigReal to_real(const Rational& q) {
    BigReal num(boost::multiprecision::numerator(q));
    BigReal den(boost::multiprecision::denominator(q));
    return num / den;
}

BigReal to_real(const BigInt& n) { return BigReal(n); }

BigReal working_epsilon() {
    BigReal e = 1;
    mpfr_mul_2si(e.backend().data(), e.backend().data(), -static_cast<long>(current_precision_bits()),
                 MPFR_RNDN);
    return e;
}

std::string to_string(const BigReal& x, int digits) {
    std::ostringstream os;
    os << std::setprecision(digits) << x;
    return os.str();
}

std::string to_string(const Rational& q) {
    std::ostringstream os;
    os << boost::multiprecision::numerator(q) << '/' << boost::multiprecision::denominator(q);
    return os.str();
}

}  // namespace sepscope
