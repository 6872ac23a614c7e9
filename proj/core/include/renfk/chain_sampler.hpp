#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "renfk/finite_form.hpp"
#include "renfk/mc_engine.hpp"

namespace renfk {

/// Exact jump-and-hold simulation of a killed chain.
///
/// Holding times are exponential with rate -L_ii; a jump goes to j with
/// probability L_ij / (-L_ii) and to the cemetery with the remaining mass.
class ChainSampler {
public:
    static constexpr std::size_t cemetery = std::numeric_limits<std::size_t>::max();

    explicit ChainSampler(const FiniteChainSpec& spec);

    std::size_t size() const noexcept { return exit_rate_.size(); }
    double exit_rate(std::size_t i) const noexcept { return exit_rate_[i]; }

    double holding_time(std::size_t i, Rng& rng) const {
        const double q = exit_rate_[i];
        if (q <= 0.0) return std::numeric_limits<double>::infinity();
        return -std::log1p(-uniform01(rng)) / q;
    }

    /// Destination of a jump out of `i`, or `cemetery`.
    std::size_t jump(std::size_t i, Rng& rng) const;

    struct End {
        double time = 0.0;  ///< lifetime if killed, else the horizon
        bool killed = false;
        std::size_t state = cemetery;  ///< state at the horizon if alive
    };

    /// Simulates from `start` until killing or `horizon`, calling
    /// on_sojourn(state, begin, duration) for each sojourn (truncated at the
    /// horizon).
    template <class Visitor>
    End walk(std::size_t start, double horizon, Rng& rng, Visitor&& on_sojourn) const {
        std::size_t state = start;
        double t = 0.0;
        while (true) {
            const double hold = holding_time(state, rng);
            if (t + hold >= horizon) {
                if (horizon > t) on_sojourn(state, t, horizon - t);
                return End{horizon, false, state};
            }
            on_sojourn(state, t, hold);
            t += hold;
            state = jump(state, rng);
            if (state == cemetery) return End{t, true, cemetery};
        }
    }

private:
    std::vector<double> exit_rate_;
    // CSR layout of cumulative jump probabilities; the cemetery is the
    // implicit remainder after the last entry.
    std::vector<std::size_t> row_begin_;
    std::vector<std::size_t> target_;
    std::vector<double> cumulative_;
};

/// Time-inhomogeneous chain with piecewise-constant generators.
/// Piece p governs [until_{p-1}, until_p).
class PiecewiseChainSampler {
public:
    PiecewiseChainSampler(std::vector<double> until, const std::vector<FiniteChainSpec>& pieces);

    std::size_t size() const noexcept { return pieces_.front().size(); }
    std::size_t piece_at(double t) const noexcept;

    /// Like ChainSampler::walk but on absolute time [t0, horizon]; sojourns
    /// are split at generator breakpoints.
    template <class Visitor>
    ChainSampler::End walk(std::size_t start, double t0, double horizon, Rng& rng, Visitor&& on_sojourn) const {
        std::size_t state = start;
        double t = t0;
        std::size_t piece = piece_at(t0);
        while (true) {
            const double piece_end = std::min(horizon, until_[piece]);
            const double hold = pieces_[piece].holding_time(state, rng);
            if (t + hold >= piece_end) {
                if (piece_end > t) on_sojourn(state, t, piece_end - t);
                t = piece_end;
                if (piece_end >= horizon || piece + 1 >= pieces_.size()) return ChainSampler::End{horizon, false, state};
                ++piece;
                continue;
            }
            on_sojourn(state, t, hold);
            t += hold;
            state = pieces_[piece].jump(state, rng);
            if (state == ChainSampler::cemetery) return ChainSampler::End{t, true, ChainSampler::cemetery};
        }
    }

private:
    std::vector<double> until_;
    std::vector<ChainSampler> pieces_;
};

}  // namespace renfk
