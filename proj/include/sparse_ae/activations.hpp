#ifndef SPARSE_AE_ACTIVATIONS_HPP
#define SPARSE_AE_ACTIVATIONS_HPP

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace sparse_ae {

enum class ActivationTag { ReLU, Sigmoid, Softplus, Tanh };

inline constexpr std::array<ActivationTag, 4> kAllActivations = {
    ActivationTag::ReLU, ActivationTag::Sigmoid, ActivationTag::Softplus, ActivationTag::Tanh};

/**
 * Encoder nonlinearity plus the threshold below which a unit counts as
 * de-activated. Tanh has no threshold in the sparsity framework; 0.1 is used
 * so its activation fractions are comparable with Sigmoid/Softplus.
 */
struct ActivationKind {
    ActivationTag tag = ActivationTag::ReLU;
    double delta_min = 0.0;

    static ActivationKind of(ActivationTag tag) {
        return {tag, tag == ActivationTag::ReLU ? 0.0 : 0.1};
    }

    bool non_decreasing() const { return true; }
    bool convex() const { return tag == ActivationTag::ReLU || tag == ActivationTag::Softplus; }
    bool negative_saturation_at_zero() const { return tag != ActivationTag::Tanh; }

    bool operator==(const ActivationKind&) const = default;
};

inline std::string to_string(ActivationTag tag) {
    switch (tag) {
        case ActivationTag::ReLU: return "ReLU";
        case ActivationTag::Sigmoid: return "Sigmoid";
        case ActivationTag::Softplus: return "Softplus";
        case ActivationTag::Tanh: return "Tanh";
    }
    return "?";
}

inline ActivationTag parse_activation(std::string_view name) {
    for (auto tag : kAllActivations) {
        const std::string canonical = to_string(tag);
        if (name.size() != canonical.size()) continue;
        bool same = true;
        for (std::size_t i = 0; i < name.size(); ++i)
            same = same && std::tolower(static_cast<unsigned char>(name[i])) ==
                               std::tolower(static_cast<unsigned char>(canonical[i]));
        if (same) return tag;
    }
    throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

namespace detail {

inline double logistic(double a) {
    if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
    const double e = std::exp(a);
    return e / (1.0 + e);
}

}  // namespace detail

inline double act(ActivationTag tag, double a) {
    switch (tag) {
        case ActivationTag::ReLU: return a > 0.0 ? a : 0.0;
        case ActivationTag::Sigmoid: return detail::logistic(a);
        case ActivationTag::Softplus: return std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a)));
        case ActivationTag::Tanh: return std::tanh(a);
    }
    return 0.0;
}

/// First derivative. ReLU uses 0 at the kink so dead units stay dead.
inline double act_d1(ActivationTag tag, double a) {
    switch (tag) {
        case ActivationTag::ReLU: return a > 0.0 ? 1.0 : 0.0;
        case ActivationTag::Sigmoid: {
            const double s = detail::logistic(a);
            return s * (1.0 - s);
        }
        case ActivationTag::Softplus: return detail::logistic(a);
        case ActivationTag::Tanh: {
            const double t = std::tanh(a);
            return 1.0 - t * t;
        }
    }
    return 0.0;
}

/// Second derivative. ReLU's Dirac mass at the origin is dropped: 0 everywhere.
inline double act_d2(ActivationTag tag, double a) {
    switch (tag) {
        case ActivationTag::ReLU: return 0.0;
        case ActivationTag::Sigmoid: {
            const double s = detail::logistic(a);
            return s * (1.0 - s) * (1.0 - 2.0 * s);
        }
        case ActivationTag::Softplus: {
            const double s = detail::logistic(a);
            return s * (1.0 - s);
        }
        case ActivationTag::Tanh: {
            const double t = std::tanh(a);
            return -2.0 * t * (1.0 - t * t);
        }
    }
    return 0.0;
}

inline double act(const ActivationKind& k, double a) { return act(k.tag, a); }
inline double act_d1(const ActivationKind& k, double a) { return act_d1(k.tag, a); }
inline double act_d2(const ActivationKind& k, double a) { return act_d2(k.tag, a); }

/// Elementwise application over a dense Eigen matrix, dispatching once per call.
template <typename Mat>
Mat apply_act(ActivationTag tag, const Mat& a) {
    Mat out(a.rows(), a.cols());
    const auto n = a.size();
    const double* in = a.data();
    double* o = out.data();
    switch (tag) {
        case ActivationTag::ReLU:
            for (Eigen::Index i = 0; i < n; ++i) o[i] = in[i] > 0.0 ? in[i] : 0.0;
            break;
        default:
            for (Eigen::Index i = 0; i < n; ++i) o[i] = act(tag, in[i]);
    }
    return out;
}

template <typename Mat>
Mat apply_act_d1(ActivationTag tag, const Mat& a) {
    Mat out(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.data()[i] = act_d1(tag, a.data()[i]);
    return out;
}

template <typename Mat>
Mat apply_act_d2(ActivationTag tag, const Mat& a) {
    Mat out(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.data()[i] = act_d2(tag, a.data()[i]);
    return out;
}

}  // namespace sparse_ae

#endif  // SPARSE_AE_ACTIVATIONS_HPP
