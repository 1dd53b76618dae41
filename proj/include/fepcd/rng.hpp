#pragma once

#include <array>
#include <cstdint>

namespace fepcd {

// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Counter-based random stream addressed by (seed, stream_id).
///
/// The seed is the Philox key; the stream id and a 64-bit draw counter form the
/// Philox counter. Two streams with the same address produce the same sequence
/// regardless of what any other stream or thread does. A stream is a plain value:
/// copy it to fork an identical sequence, never share one between threads.
class RngStream {
public:
    RngStream() = default;
    RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    // Number of 64-bit draws consumed so far.
    std::uint64_t position() const { return position_; }

    std::uint64_t next_u64();

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n) by rejection; n > 0.
    std::uint64_t below(std::uint64_t n);

    // A fresh stream whose key is derived from this stream's address.
    RngStream derive(std::uint64_t sub_stream) const;

private:
    std::uint64_t seed_ = 0;
    std::uint64_t stream_id_ = 0;
    std::uint64_t position_ = 0;
    std::array<std::uint32_t, 4> block_{};
};

// Returns true with probability p; consumes exactly one uniform draw.
// Throws PreconditionError unless 0 <= p <= 1.
bool bernoulli_sample(double p, RngStream& rng);

// Normal(mean, 1) via Box-Muller; consumes two uniform draws.
double gaussian_sample(double mean, RngStream& rng);

// Fisher-Yates shuffle of 0..n-1.
template <typename Container>
void shuffle(Container& items, RngStream& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace fepcd
