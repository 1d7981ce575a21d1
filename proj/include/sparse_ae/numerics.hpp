#ifndef SPARSE_AE_NUMERICS_HPP
#define SPARSE_AE_NUMERICS_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace sparse_ae {

/// Dense row-major matrix. Rows of W are the per-unit filters, so row access is the hot path.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }
inline bool all_finite(const Vector& v) { return v.allFinite(); }

/**
 * SplitMix64 finalizer. Used to derive independent stream seeds from a
 * master seed so that e.g. shuffling and corruption never share a stream.
 */
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/**
 * Reproducible random stream.
 *
 * Backed by std::mt19937_64, whose output sequence is fixed by the standard.
 * The std:: distributions are implementation-defined, so uniform/normal/index
 * are derived here directly from the raw 64-bit words.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random mantissa bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Unbiased integer in [0, n).
    std::size_t index(std::size_t n) {
        if (n == 0) throw std::invalid_argument("Rng::index: empty range");
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
        std::uint64_t v = 0;
        do {
            v = engine_();
        } while (v >= limit);
        return static_cast<std::size_t>(v % bound);
    }

    /// Independent child stream; the parent state is not consumed.
    Rng fork(std::uint64_t stream) const { return Rng(splitmix64(seed_ ^ splitmix64(stream + 1))); }

    Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols) {
        Matrix out(rows, cols);
        for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = normal();
        return out;
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = index(i);
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Weight-norm constraint applied to encoder rows after every update.
struct ConstraintKind {
    enum class Tag { None, UnitNorm, MaxNorm };
    Tag tag = Tag::None;
    double radius = 1.0;  ///< only meaningful for MaxNorm

    static ConstraintKind none() { return {}; }
    static ConstraintKind unit_norm() { return {Tag::UnitNorm, 1.0}; }
    static ConstraintKind max_norm(double c) {
        if (!(c > 0.0) || !std::isfinite(c))
            throw std::invalid_argument("max-norm radius must be positive, got " + std::to_string(c));
        return {Tag::MaxNorm, c};
    }

    bool operator==(const ConstraintKind&) const = default;
};

inline std::string to_string(const ConstraintKind& c) {
    switch (c.tag) {
        case ConstraintKind::Tag::None: return "none";
        case ConstraintKind::Tag::UnitNorm: return "unit_norm";
        case ConstraintKind::Tag::MaxNorm: {
            char buf[32];
            const auto res = std::to_chars(buf, buf + sizeof buf, c.radius);
            return "max_norm:" + std::string(buf, res.ptr);
        }
    }
    return "none";
}

/// Accepts `none`, `unit_norm`, `max_norm:<c>`.
inline ConstraintKind parse_constraint(std::string_view text) {
    if (text == "none" || text.empty()) return ConstraintKind::none();
    if (text == "unit_norm" || text == "unit") return ConstraintKind::unit_norm();
    constexpr std::string_view prefix = "max_norm:";
    if (text.substr(0, prefix.size()) == prefix)
        return ConstraintKind::max_norm(std::stod(std::string(text.substr(prefix.size()))));
    throw std::invalid_argument("unknown constraint '" + std::string(text) + "'");
}

/// Normalized (Glorot) uniform initialization on [-sqrt(6/(m+n)), +sqrt(6/(m+n))].
inline Matrix glorot_init(Eigen::Index m, Eigen::Index n, Rng& rng) {
    if (m < 1 || n < 1) throw std::invalid_argument("glorot_init: dimensions must be >= 1");
    const double bound = std::sqrt(6.0 / static_cast<double>(m + n));
    Matrix w(m, n);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
    return w;
}

inline Vector row_norms(const Matrix& w) { return w.rowwise().norm(); }

/// Rows already within this relative distance of the target norm are left untouched.
inline constexpr double kProjectionSlack = 1e-14;

/**
 * Project every row onto the constraint set. Zero rows stay zero under
 * UnitNorm: re-randomizing them would resurrect dead units.
 *
 * Rows whose norm is within kProjectionSlack of the target are not rescaled,
 * which makes the projection idempotent bit for bit.
 */
inline Matrix project_rows(Matrix w, const ConstraintKind& kind) {
    if (kind.tag == ConstraintKind::Tag::None) return w;
    for (Eigen::Index j = 0; j < w.rows(); ++j) {
        const double norm = w.row(j).norm();
        if (norm == 0.0) continue;
        if (kind.tag == ConstraintKind::Tag::UnitNorm) {
            if (std::abs(norm - 1.0) > kProjectionSlack) w.row(j) /= norm;
        } else if (norm > kind.radius * (1.0 + kProjectionSlack)) {
            w.row(j) /= norm / kind.radius;
        }
    }
    return w;
}

}  // namespace sparse_ae

#endif  // SPARSE_AE_NUMERICS_HPP
