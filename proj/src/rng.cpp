#include "sepscope/rng.hpp"

#include <cmath>

namespace sepscope {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u, kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u, kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter c, PhiloxKey k) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {}

void RngStream::refill() {
    PhiloxCounter ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                      static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
    PhiloxKey key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
    buf_ = philox4x32(ctr, key);
    ++block_;
    pos_ = 0;
}

RngStream::result_type RngStream::operator()() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
}

double RngStream::uniform() {
    std::uint64_t a = (*this)() >> 5, b = (*this)() >> 6;
    return (static_cast<double>(a * 67108864u + b) + 0.5) * 0x1p-53;
}

double RngStream::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u = uniform(), v = uniform();
    double r = std::sqrt(-2 * std::log(u));
    double t = 2 * M_PI * v;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
}

}  // namespace sepscope
