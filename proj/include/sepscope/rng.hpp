#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace sepscope {

// Philox4x32-10 counter-based generator.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;
PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key);

// Stream (seed, stream_id): key from the seed, counter words 2-3 from the stream id,
// words 0-1 count blocks.  Satisfies UniformRandomBitGenerator.
class RngStream {
public:
    using result_type = std::uint32_t;

    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    double uniform();  // in (0, 1), 53 bits
    double normal();   // Box-Muller

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

private:
    void refill();

    std::uint64_t seed_, stream_id_;
    std::uint64_t block_ = 0;
    PhiloxCounter buf_{};
    int pos_ = 4;
    bool have_spare_ = false;
    double spare_ = 0;
};

}  // namespace sepscope
