// SPDX-License-Identifier: Apache-2.0

#include "taycast/forecast.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace taycast {

const char* submodule_tag(Submodule sub) {
    switch (sub) {
        case Submodule::self_attention: return "sa";
        case Submodule::cross_attention: return "ca";
        case Submodule::mlp: return "mlp";
    }
    throw std::invalid_argument("submodule_tag: invalid submodule");
}

SlotId SlotId::from_index(int idx) {
    if (idx < 0) throw std::invalid_argument("SlotId::from_index: negative index");
    return SlotId{idx / 3, static_cast<Submodule>(idx % 3)};
}

std::string SlotId::name() const {
    return "l" + std::to_string(layer) + "." + submodule_tag(sub);
}

namespace {

struct FactorialTable {
    double value[kMaxTableOrder + 1];
    FactorialTable() {
        value[0] = 1.0;
        for (int n = 1; n <= kMaxTableOrder; ++n) value[n] = value[n - 1] * n;
    }
};

struct BinomialTable {
    double value[kMaxTableOrder + 1][kMaxTableOrder + 1] = {};
    BinomialTable() {
        for (int n = 0; n <= kMaxTableOrder; ++n) {
            value[n][0] = 1.0;
            for (int k = 1; k <= n; ++k) {
                value[n][k] = value[n - 1][k - 1] + (k <= n - 1 ? value[n - 1][k] : 0.0);
            }
        }
    }
};

const FactorialTable kFactorials;
const BinomialTable kBinomials;

} // namespace

double exact_factorial(int n) {
    if (n < 0 || n > kMaxTableOrder) {
        throw std::invalid_argument("exact_factorial: order " + std::to_string(n) +
                                    " outside table range [0," + std::to_string(kMaxTableOrder) + "]");
    }
    return kFactorials.value[n];
}

double exact_binomial(int n, int k) {
    if (n < 0 || n > kMaxTableOrder || k < 0 || k > n) {
        throw std::invalid_argument("exact_binomial: C(" + std::to_string(n) + "," +
                                    std::to_string(k) + ") outside table range");
    }
    return kBinomials.value[n][k];
}

FeatureTensor binomial_difference(std::span<const FeatureTensor> history, int i) {
    if (i < 0) throw std::invalid_argument("binomial_difference: negative order");
    if (i > kMaxTableOrder) {
        throw std::invalid_argument("binomial_difference: order " + std::to_string(i) +
                                    " exceeds table limit " + std::to_string(kMaxTableOrder));
    }
    if (static_cast<std::size_t>(i) >= history.size()) {
        std::ostringstream oss;
        oss << "binomial_difference: order " << i << " needs " << (i + 1)
            << " samples but history has " << history.size();
        throw std::invalid_argument(oss.str());
    }
    // history.back() is F(t); history[last - j] is F(t + jN).
    FeatureTensor acc = FeatureTensor::zeros(history.back().shape);
    const std::size_t last = history.size() - 1;
    for (int j = 0; j <= i; ++j) {
        const double sign = ((i - j) % 2 == 0) ? 1.0 : -1.0;
        acc = axpy(sign * exact_binomial(i, j), history[last - static_cast<std::size_t>(j)], acc);
    }
    return acc;
}

std::vector<double> prediction_coefficients(double s, int m) {
    if (m < 0) throw std::invalid_argument("prediction_coefficients: negative order");
    std::vector<double> coeffs(static_cast<std::size_t>(m));
    double c = 1.0;
    for (int i = 1; i <= m; ++i) {
        c = c * (-(s + static_cast<double>(i - 1)) / static_cast<double>(i));
        coeffs[static_cast<std::size_t>(i - 1)] = c;
    }
    return coeffs;
}

TaylorCache::TaylorCache(int order_m, int interval_n) : order_m_(order_m), interval_n_(interval_n) {
    if (order_m < 0 || order_m > kMaxOrder) {
        throw std::invalid_argument("TaylorCache: order " + std::to_string(order_m) +
                                    " outside supported range [0," + std::to_string(kMaxOrder) + "]");
    }
    if (interval_n < 1) {
        throw std::invalid_argument("TaylorCache: interval must be >= 1, got " + std::to_string(interval_n));
    }
}

void TaylorCache::update(const FeatureTensor& feature, double t) {
    if (!diffs_.empty()) {
        if (!feature.same_shape(diffs_.front())) {
            throw std::invalid_argument("TaylorCache::update: shape mismatch " +
                                        shape_string(feature.shape) + " vs cached " +
                                        shape_string(diffs_.front().shape));
        }
        if (!(t < anchor_t_)) {
            std::ostringstream oss;
            oss << "TaylorCache::update: timestep " << t << " does not decrease below anchor "
                << anchor_t_ << " (schedule corruption)";
            throw std::invalid_argument(oss.str());
        }
    }

    std::vector<FeatureTensor> next;
    next.reserve(static_cast<std::size_t>(order_m_) + 1);
    next.push_back(feature);
    const long depth = std::min(samples_seen_, static_cast<long>(order_m_));
    for (long i = 1; i <= depth; ++i) {
        next.push_back(axpy(-1.0, next[static_cast<std::size_t>(i - 1)],
                            diffs_[static_cast<std::size_t>(i - 1)]));
    }

    diffs_ = std::move(next);
    anchor_t_ = t;
    ++samples_seen_;
}

int TaylorCache::effective_order() const {
    const long warm = samples_seen_ > 0 ? samples_seen_ - 1 : 0;
    return static_cast<int>(std::min(static_cast<long>(order_m_), warm));
}

FeatureTensor TaylorCache::predict(int offset_k) const {
    if (samples_seen_ == 0) {
        throw std::logic_error("TaylorCache::predict: predict before any full activation");
    }
    if (offset_k < 0) {
        throw std::invalid_argument("TaylorCache::predict: negative offset " + std::to_string(offset_k));
    }

    const int m_eff = effective_order();
    if (m_eff == 0) return diffs_.front();

    const double s = static_cast<double>(offset_k) / static_cast<double>(interval_n_);
    const std::vector<double> coeffs = prediction_coefficients(s, m_eff);
    FeatureTensor result = diffs_.front();
    for (int i = 1; i <= m_eff; ++i) {
        result = axpy(coeffs[static_cast<std::size_t>(i - 1)], diffs_[static_cast<std::size_t>(i)], result);
    }
    return result;
}

CacheSet::CacheSet(int layers, int order_m, int interval_n) : layers_(layers) {
    if (layers < 1) throw std::invalid_argument("CacheSet: layers must be >= 1");
    caches_.reserve(static_cast<std::size_t>(layers) * 3);
    for (int i = 0; i < layers * 3; ++i) caches_.emplace_back(order_m, interval_n);
}

} // namespace taycast
