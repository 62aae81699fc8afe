// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "taycast/tensor.hpp"

#include <span>
#include <string>
#include <vector>

namespace taycast {

enum class Submodule : int { self_attention = 0, cross_attention = 1, mlp = 2 };

const char* submodule_tag(Submodule sub);

/// One cached feature site: a (layer, submodule) pair.
struct SlotId {
    int layer = 0;
    Submodule sub = Submodule::self_attention;

    int index() const { return layer * 3 + static_cast<int>(sub); }
    static SlotId from_index(int idx);
    std::string name() const; // "l<layer>.<sa|ca|mlp>"

    bool operator==(const SlotId&) const = default;
};

/// Highest supported expansion order. Factorials and binomials are exact
/// integers up to kMaxTableOrder; cache orders beyond kMaxOrder are rejected.
inline constexpr int kMaxOrder = 6;
inline constexpr int kMaxTableOrder = 8;

double exact_factorial(int n);
double exact_binomial(int n, int k);

/// i-th forward finite difference computed directly from the binomial form,
/// sum_{j=0..i} (-1)^(i-j) C(i,j) F(t + jN). `history` is ordered oldest
/// first, so history.back() plays the role of F(t). This is the
/// non-incremental route and stays independent of TaylorCache::update.
FeatureTensor binomial_difference(std::span<const FeatureTensor> history, int i);

/// Extrapolation weights for the stored differences at a step offset of
/// s = k/N intervals past the anchor. Returned vector holds the weight of
/// diffs[i] at position i-1, for i = 1..m. Serialized predictions must
/// match across implementations, which pins the evaluation recurrence:
///
///   c_1 = -(s + 0) / 1,   c_i = c_{i-1} * -(s + i - 1) / i.
///
/// These are the degree-m forward-difference extrapolation weights, the
/// binomial C(-s, i) with alternating sign absorbed. With exact samples
/// they reproduce any degree-m polynomial trajectory exactly; m = 0 is
/// plain reuse and m = 1 the linear two-point formula.
std::vector<double> prediction_coefficients(double s, int m);

/// Per-slot store of a feature and its finite differences across full
/// activations, anchored at the most recent fully computed timestep.
/// Timesteps decrease over a run; updates with non-decreasing t are
/// rejected rather than remapped.
class TaylorCache {
public:
    TaylorCache(int order_m, int interval_n);

    /// Absorb a fully computed feature at timestep t. diffs[0] becomes the
    /// feature and each higher difference is rebuilt by the recursion
    /// new[i] = old[i-1] - new[i-1], realizing
    /// delta^i F(x_t) = delta^(i-1) F(x_{t+N}) - delta^(i-1) F(x_t).
    void update(const FeatureTensor& feature, double t);

    /// Extrapolate offset_k timesteps past the anchor using the effective
    /// order (warmup truncates the order until m+1 activations were seen).
    /// offset_k = 0 returns the anchor feature; m_eff = 0 returns it for
    /// every offset (plain reuse).
    FeatureTensor predict(int offset_k) const;

    int effective_order() const;

    int order() const { return order_m_; }
    int interval() const { return interval_n_; }
    long samples_seen() const { return samples_seen_; }
    double anchor_t() const { return anchor_t_; }
    const std::vector<FeatureTensor>& diffs() const { return diffs_; }

private:
    int order_m_;
    int interval_n_;
    std::vector<FeatureTensor> diffs_;
    double anchor_t_ = 0.0;
    long samples_seen_ = 0;
};

/// One TaylorCache per (layer, submodule) slot, indexed by SlotId.
class CacheSet {
public:
    CacheSet(int layers, int order_m, int interval_n);

    TaylorCache& at(SlotId slot) { return caches_.at(static_cast<std::size_t>(slot.index())); }
    const TaylorCache& at(SlotId slot) const { return caches_.at(static_cast<std::size_t>(slot.index())); }

    int layers() const { return layers_; }
    std::size_t slot_count() const { return caches_.size(); }

private:
    int layers_;
    std::vector<TaylorCache> caches_;
};

} // namespace taycast
