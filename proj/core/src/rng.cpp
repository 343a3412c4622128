#include "sorterlab/rng.hpp"

#include <cmath>

namespace sorterlab {

namespace {

std::uint64_t fin(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
    std::uint64_t key = fin(seed_ ^ 0xA3EC647659359ACDULL) + stream_ * 0x9E3779B97F4A7C15ULL;
    return fin(fin(key) ^ (counter * 0xD1342543DE82EF95ULL + 0x2545F4914F6CDD1DULL));
}

double CounterRng::uniform(std::uint64_t counter) const {
    // 53-bit mantissa, strictly inside (0, 1)
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter_base) const {
    const double u1 = uniform(counter_base);
    const double u2 = uniform(counter_base + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t CounterRng::poisson(double mean, std::uint64_t counter_base) const {
    if (mean <= 0.0) return 0;
    std::uint64_t c = counter_base;
    if (mean < 30.0) {
        // Knuth product-of-uniforms
        const double limit = std::exp(-mean);
        double prod = 1.0;
        std::uint64_t k = 0;
        while (c < counter_base + counter_block) {
            prod *= uniform(c++);
            if (prod <= limit) return k;
            ++k;
        }
        return k; // unreachable for mean < 30 in practice
    }
    // PTRS transformed rejection (Hormann), exact for mean >= 10
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    while (c + 1 < counter_base + counter_block) {
        const double u = uniform(c++) - 0.5;
        const double v = uniform(c++);
        const double us = 0.5 - std::abs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            kf * log_mean - mean - std::lgamma(kf + 1.0))
            return static_cast<std::uint64_t>(kf);
    }
    return static_cast<std::uint64_t>(mean); // unreachable fallback
}

} // namespace sorterlab
