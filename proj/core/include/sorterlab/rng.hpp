#pragma once

#include <cstdint>

namespace sorterlab {

// Counter-based generator: every draw is a pure function of (seed, stream,
// counter), so any counter can be sampled independently of draw order. Each
// output is one splitmix64 finalization of the packed key, which passes the
// usual statistical batteries (BigCrush for the underlying mix).
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream) {}

    // Deterministic uniform 64-bit value for this (seed, stream, counter).
    std::uint64_t bits(std::uint64_t counter) const;
    // Uniform double in (0, 1).
    double uniform(std::uint64_t counter) const;

    // Poisson sample with the given mean; consumes a contiguous block of
    // counters starting at `counter_base` (block size 4096, so spacing streams
    // or bases at least that far apart keeps draws independent).
    std::uint64_t poisson(double mean, std::uint64_t counter_base) const;

    // Standard normal via Box-Muller on two counters.
    double normal(std::uint64_t counter_base) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    static constexpr std::uint64_t counter_block = 4096;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

} // namespace sorterlab
