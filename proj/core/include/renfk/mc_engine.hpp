#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

namespace renfk {

using Rng = std::mt19937_64;

/// Monte Carlo mean with its standard error.
struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t n_paths = 0;
    std::uint64_t seed = 0;
};

/// Path budget and stream layout. Paths are split into `workers` contiguous
/// blocks; block b draws from substream b. Results are reproducible for a
/// fixed (seed, n_paths, workers) and change when `workers` changes.
struct McOptions {
    std::uint64_t n_paths = 100'000;
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

/// Independent generator for substream `index` of `seed`.
inline Rng substream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      0x9e3779b9u};
    return Rng(seq);
}

inline double uniform01(Rng& rng) { return std::generate_canonical<double, 53>(rng); }

/// Running mean/variance (Welford), mergeable in a fixed order.
struct MomentAccumulator {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double x) {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }

    void merge(const MomentAccumulator& other) {
        if (other.count == 0) return;
        if (count == 0) {
            *this = other;
            return;
        }
        const double n1 = static_cast<double>(count);
        const double n2 = static_cast<double>(other.count);
        const double delta = other.mean - mean;
        const double n = n1 + n2;
        mean += delta * n2 / n;
        m2 += other.m2 + delta * delta * n1 * n2 / n;
        count += other.count;
    }

    Estimate estimate(std::uint64_t seed) const {
        Estimate e;
        e.mean = mean;
        e.n_paths = count;
        e.seed = seed;
        if (count > 1) {
            const double var = m2 / static_cast<double>(count - 1);
            e.std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(count));
        }
        return e;
    }
};

/// Runs `sample(rng, out)` once per path; `out` has `width` slots that the
/// sampler fills. Returns one Estimate per slot.
template <class Sampler>
std::vector<Estimate> run_paths(const McOptions& opts, std::size_t width, Sampler&& sample) {
    if (opts.workers == 0) throw std::invalid_argument("workers must be positive");
    const std::uint64_t blocks = opts.workers;
    std::vector<std::vector<MomentAccumulator>> partial(blocks, std::vector<MomentAccumulator>(width));

    auto run_block = [&](std::uint64_t b) {
        const std::uint64_t base = opts.n_paths / blocks;
        const std::uint64_t count = base + (b < opts.n_paths % blocks ? 1 : 0);
        Rng rng = substream(opts.seed, b);
        std::vector<double> out(width);
        auto& acc = partial[b];
        for (std::uint64_t p = 0; p < count; ++p) {
            std::fill(out.begin(), out.end(), 0.0);
            sample(rng, std::span<double>(out));
            for (std::size_t k = 0; k < width; ++k) acc[k].push(out[k]);
        }
    };

    if (blocks == 1) {
        run_block(0);
    } else {
        std::vector<std::exception_ptr> errors(blocks);
        {
            std::vector<std::jthread> threads;
            threads.reserve(blocks);
            for (std::uint64_t b = 0; b < blocks; ++b) {
                threads.emplace_back([&, b] {
                    try {
                        run_block(b);
                    } catch (...) {
                        errors[b] = std::current_exception();
                    }
                });
            }
        }
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    std::vector<Estimate> result(width);
    for (std::size_t k = 0; k < width; ++k) {
        MomentAccumulator total;
        for (std::uint64_t b = 0; b < blocks; ++b) total.merge(partial[b][k]);
        result[k] = total.estimate(opts.seed);
    }
    return result;
}

/// Scalar convenience wrapper: `sample(rng)` returns one path's value.
template <class Sampler>
Estimate run_paths(const McOptions& opts, Sampler&& sample) {
    return run_paths(opts, 1, [&](Rng& rng, std::span<double> out) { out[0] = sample(rng); })[0];
}

/// |a - b| in units of the combined standard error (0 when both are exact
/// and equal).
inline double z_score(double a, double b, double se) {
    const double diff = std::abs(a - b);
    if (se <= 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return diff / se;
}

}  // namespace renfk
