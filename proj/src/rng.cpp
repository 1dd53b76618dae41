#include "fepcd/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fepcd/errors.hpp"

namespace fepcd {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

std::uint64_t RngStream::next_u64() {
    // Each Philox block yields two 64-bit words; block index = position / 2.
    const std::uint64_t block_index = position_ >> 1;
    if ((position_ & 1u) == 0) {
        block_ = philox4x32_10(
            {static_cast<std::uint32_t>(block_index), static_cast<std::uint32_t>(block_index >> 32),
             static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)},
            {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    }
    const std::size_t half = (position_ & 1u) * 2;
    ++position_;
    return (std::uint64_t{block_[half + 1]} << 32) | block_[half];
}

std::uint64_t RngStream::below(std::uint64_t n) {
    if (n == 0) {
        throw PreconditionError("RngStream::below: n must be positive");
    }
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

RngStream RngStream::derive(std::uint64_t sub_stream) const {
    return {splitmix64(seed_ ^ splitmix64(stream_id_ + 0x632BE59BD9B4E019ull)), sub_stream};
}

bool bernoulli_sample(double p, RngStream& rng) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw PreconditionError("bernoulli_sample: p=" + std::to_string(p) + " outside [0,1]");
    }
    return rng.uniform() < p;
}

double gaussian_sample(double mean, RngStream& rng) {
    const double u1 = 1.0 - rng.uniform();  // (0, 1]
    const double u2 = rng.uniform();
    return mean + std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace fepcd
