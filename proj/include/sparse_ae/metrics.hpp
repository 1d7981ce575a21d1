#ifndef SPARSE_AE_METRICS_HPP
#define SPARSE_AE_METRICS_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <vector>
#include <stdexcept>
#include <string>

#include "activations.hpp"
#include "model.hpp"
#include "numerics.hpp"

namespace sparse_ae {

struct SparsityReport {
    double avg_activation_fraction = 0.0;
    double dead_unit_fraction = 0.0;
    Vector per_unit_mean_a;
    Vector per_unit_var_a;  ///< population variance
    Vector per_unit_activation_fraction;
};

/**
 * Average activation fraction: share of (sample, unit) pairs with
 * h > delta_min (strict). A unit is dead when it never exceeds the threshold.
 */
inline SparsityReport sparsity_report(const Matrix& hidden, const Matrix& pre_act, double delta_min) {
    if (hidden.rows() != pre_act.rows() || hidden.cols() != pre_act.cols())
        throw std::invalid_argument("sparsity_report: H and A shapes differ");
    const Eigen::Index n = hidden.rows();
    const Eigen::Index m = hidden.cols();
    SparsityReport rep;
    rep.per_unit_activation_fraction = Vector::Zero(m);
    rep.per_unit_mean_a = Vector::Zero(m);
    rep.per_unit_var_a = Vector::Zero(m);
    if (n == 0 || m == 0) return rep;

    Eigen::Index active_total = 0;
    Eigen::Index dead = 0;
    std::vector<Eigen::Index> active(static_cast<std::size_t>(m), 0);
    for (Eigen::Index s = 0; s < n; ++s)
        for (Eigen::Index j = 0; j < m; ++j)
            if (hidden(s, j) > delta_min) ++active[static_cast<std::size_t>(j)];
    for (Eigen::Index j = 0; j < m; ++j) {
        const auto c = active[static_cast<std::size_t>(j)];
        active_total += c;
        if (c == 0) ++dead;
        rep.per_unit_activation_fraction[j] = static_cast<double>(c) / static_cast<double>(n);
    }
    rep.avg_activation_fraction = static_cast<double>(active_total) / (static_cast<double>(n) * m);
    rep.dead_unit_fraction = static_cast<double>(dead) / static_cast<double>(m);

    rep.per_unit_mean_a = pre_act.colwise().mean().transpose();
    const Matrix centered = pre_act.rowwise() - rep.per_unit_mean_a.transpose();
    rep.per_unit_var_a = centered.colwise().squaredNorm().transpose() / static_cast<double>(n);
    return rep;
}

/// Half-width 2 sigma_r sqrt(n) ||W_j|| of the reconstruction bias-gradient interval.
inline Vector bias_gradient_bound(double sigma_r, Eigen::Index n, const Matrix& W) {
    if (!(sigma_r >= 0.0)) throw std::invalid_argument("bias_gradient_bound: sigma_r must be >= 0");
    return (2.0 * sigma_r * std::sqrt(static_cast<double>(n))) * row_norms(W);
}

/// Root mean square of all residual entries (spread around zero, not around their mean).
inline double residual_std(const ForwardCache& cache) {
    if (cache.r.size() == 0) return 0.0;
    return std::sqrt(cache.r.squaredNorm() / static_cast<double>(cache.r.size()));
}

/**
 * Chebyshev lower bound on P(a <= a_min): max(0, 1 - var / (a_min - mean)^2).
 * Returns nullopt when mean >= a_min, where the bound does not apply.
 */
inline std::optional<double> chebyshev_sparsity_bound(double mean_a, double var_a, double a_min) {
    if (!(mean_a < a_min)) return std::nullopt;
    const double gap = a_min - mean_a;
    return std::max(0.0, 1.0 - var_a / (gap * gap));
}

/// Largest pre-activation whose activation does not exceed delta_min.
inline double a_min_for(const ActivationKind& kind, double delta_min) {
    auto out_of_range = [&](const char* range) {
        return std::domain_error("a_min_for: delta_min " + std::to_string(delta_min) + " outside " + range +
                                 " for " + to_string(kind.tag));
    };
    constexpr double inf = std::numeric_limits<double>::infinity();
    switch (kind.tag) {
        case ActivationTag::ReLU:
            if (delta_min < 0.0) throw out_of_range("[0, inf)");
            return delta_min;
        case ActivationTag::Sigmoid:
            if (delta_min < 0.0 || delta_min > 1.0) throw out_of_range("[0, 1]");
            if (delta_min == 0.0) return -inf;
            if (delta_min == 1.0) return inf;
            return std::log(delta_min / (1.0 - delta_min));
        case ActivationTag::Softplus:
            if (delta_min < 0.0) throw out_of_range("[0, inf)");
            if (delta_min == 0.0) return -inf;
            return std::log(std::expm1(delta_min));
        case ActivationTag::Tanh:
            if (delta_min < -1.0 || delta_min > 1.0) throw out_of_range("[-1, 1]");
            if (delta_min == -1.0) return -inf;
            if (delta_min == 1.0) return inf;
            return std::atanh(delta_min);
    }
    return 0.0;
}

}  // namespace sparse_ae

#endif  // SPARSE_AE_METRICS_HPP
