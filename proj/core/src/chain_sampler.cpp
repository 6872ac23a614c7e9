#include "renfk/chain_sampler.hpp"

#include <algorithm>

#include "renfk/error.hpp"

namespace renfk {

ChainSampler::ChainSampler(const FiniteChainSpec& spec) {
    validate(spec);
    const auto n = static_cast<std::size_t>(spec.size());
    exit_rate_.resize(n);
    row_begin_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const double q = -spec.L(ii, ii);
        exit_rate_[i] = std::max(q, 0.0);
        double cum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double rate = spec.L(ii, static_cast<Eigen::Index>(j));
            if (j == i || rate <= 0.0 || q <= 0.0) continue;
            cum += rate / q;
            target_.push_back(j);
            cumulative_.push_back(std::min(cum, 1.0));
        }
        row_begin_[i + 1] = target_.size();
    }
}

std::size_t ChainSampler::jump(std::size_t i, Rng& rng) const {
    const double u = uniform01(rng);
    const auto first = cumulative_.begin() + static_cast<std::ptrdiff_t>(row_begin_[i]);
    const auto last = cumulative_.begin() + static_cast<std::ptrdiff_t>(row_begin_[i + 1]);
    const auto it = std::upper_bound(first, last, u);
    if (it == last) return cemetery;
    return target_[static_cast<std::size_t>(it - cumulative_.begin())];
}

PiecewiseChainSampler::PiecewiseChainSampler(std::vector<double> until, const std::vector<FiniteChainSpec>& pieces)
    : until_(std::move(until)) {
    if (until_.empty() || until_.size() != pieces.size()) throw InvalidInput("one breakpoint per generator piece required");
    for (std::size_t p = 1; p < until_.size(); ++p)
        if (!(until_[p] > until_[p - 1])) throw InvalidInput("generator breakpoints must increase");
    pieces_.reserve(pieces.size());
    for (const auto& spec : pieces) pieces_.emplace_back(spec);
    for (const auto& p : pieces_)
        if (p.size() != pieces_.front().size()) throw InvalidInput("generator pieces differ in state count");
}

std::size_t PiecewiseChainSampler::piece_at(double t) const noexcept {
    const auto it = std::upper_bound(until_.begin(), until_.end(), t);
    if (it == until_.end()) return until_.size() - 1;
    return static_cast<std::size_t>(it - until_.begin());
}

}  // namespace renfk
