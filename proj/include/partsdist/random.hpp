#pragma once

#include <cstdint>
#include <random>

namespace partsdist {

// Seeded random stream. Streams derived with split() are reproducible from the
// parent seed and the child index alone, so replicate k sees the same numbers
// regardless of how replicates are scheduled across threads.
class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0);

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    // Uniform on the open interval (0, 1).
    double uniform();

    RandomStream split(std::uint64_t child) const;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
};

}  // namespace partsdist
