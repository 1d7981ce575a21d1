#ifndef SPARSE_AE_MODEL_HPP
#define SPARSE_AE_MODEL_HPP

#include <stdexcept>
#include <string>

#include "activations.hpp"
#include "numerics.hpp"

namespace sparse_ae {

/**
 * Tied-weight auto-encoder parameters: encoder h = s(W x + b_enc), linear
 * decoder y = W^T h + b_dec. The decoder matrix is never stored.
 */
struct ModelParams {
    Matrix W;       ///< m x n
    Vector b_enc;   ///< m
    Vector b_dec;   ///< n

    Eigen::Index hidden() const { return W.rows(); }
    Eigen::Index visible() const { return W.cols(); }

    static ModelParams zeros(Eigen::Index m, Eigen::Index n) {
        return {Matrix::Zero(m, n), Vector::Zero(m), Vector::Zero(n)};
    }

    Eigen::Index size() const { return W.size() + b_enc.size() + b_dec.size(); }

    /// Flat coordinate access in the order W (row-major), b_enc, b_dec.
    double& coord(Eigen::Index i) {
        if (i < W.size()) return W.data()[i];
        i -= W.size();
        if (i < b_enc.size()) return b_enc[i];
        return b_dec[i - b_enc.size()];
    }
    double coord(Eigen::Index i) const { return const_cast<ModelParams&>(*this).coord(i); }

    void check_shapes() const {
        if (b_enc.size() != W.rows() || b_dec.size() != W.cols())
            throw std::invalid_argument("ModelParams: inconsistent shapes W " + std::to_string(W.rows()) + "x" +
                                        std::to_string(W.cols()) + ", b_enc " + std::to_string(b_enc.size()) +
                                        ", b_dec " + std::to_string(b_dec.size()));
    }
};

/// Same layout as ModelParams; holds dJ/dW, dJ/db_enc, dJ/db_dec.
struct Gradients {
    Matrix dW;
    Vector db_enc;
    Vector db_dec;

    static Gradients zeros_like(const ModelParams& p) {
        return {Matrix::Zero(p.W.rows(), p.W.cols()), Vector::Zero(p.b_enc.size()), Vector::Zero(p.b_dec.size())};
    }

    Gradients& operator+=(const Gradients& o) {
        dW += o.dW;
        db_enc += o.db_enc;
        db_dec += o.db_dec;
        return *this;
    }
    Gradients& operator*=(double s) {
        dW *= s;
        db_enc *= s;
        db_dec *= s;
        return *this;
    }

    Eigen::Index size() const { return dW.size() + db_enc.size() + db_dec.size(); }
    double coord(Eigen::Index i) const {
        if (i < dW.size()) return dW.data()[i];
        i -= dW.size();
        if (i < db_enc.size()) return db_enc[i];
        return db_dec[i - db_enc.size()];
    }
    double& coord(Eigen::Index i) {
        if (i < dW.size()) return dW.data()[i];
        i -= dW.size();
        if (i < db_enc.size()) return db_enc[i];
        return db_dec[i - db_enc.size()];
    }
    bool finite() const { return dW.allFinite() && db_enc.allFinite() && db_dec.allFinite(); }
};

/// Per-batch intermediates; one row per sample.
struct ForwardCache {
    Matrix a;  ///< pre-activations, batch x m
    Matrix h;  ///< hidden values, batch x m
    Matrix y;  ///< reconstructions, batch x n
    Matrix r;  ///< residuals target - y, batch x n
};

namespace detail {

inline void check_batch(const Matrix& batch, const ModelParams& params, const char* who) {
    params.check_shapes();
    if (batch.cols() != params.visible())
        throw std::invalid_argument(std::string(who) + ": batch has " + std::to_string(batch.cols()) +
                                    " columns, model expects " + std::to_string(params.visible()));
}

}  // namespace detail

inline Matrix pre_activations(const Matrix& batch, const ModelParams& params) {
    Matrix a;
    a.noalias() = batch * params.W.transpose();
    a.rowwise() += params.b_enc.transpose();
    return a;
}

/**
 * Forward pass where the encoder sees `input` but the residual is taken
 * against `target`. Plain AE uses input == target; explicit corruption feeds
 * the corrupted sample in and reconstructs the clean one.
 */
inline ForwardCache forward(const Matrix& input, const Matrix& target, const ModelParams& params,
                            const ActivationKind& kind) {
    detail::check_batch(input, params, "forward");
    if (target.rows() != input.rows() || target.cols() != input.cols())
        throw std::invalid_argument("forward: input and target shapes differ");
    ForwardCache c;
    c.a = pre_activations(input, params);
    c.h = apply_act(kind.tag, c.a);
    c.y.noalias() = c.h * params.W;
    c.y.rowwise() += params.b_dec.transpose();
    c.r = target - c.y;
    return c;
}

inline ForwardCache forward(const Matrix& batch, const ModelParams& params, const ActivationKind& kind) {
    return forward(batch, batch, params, kind);
}

/// Mean over samples of the squared residual norm.
inline double ae_loss(const ForwardCache& cache) {
    if (cache.r.rows() == 0) return 0.0;
    return cache.r.squaredNorm() / static_cast<double>(cache.r.rows());
}

/**
 * Gradient of ae_loss for a cache produced by forward(input, target, ...).
 * The encoder path uses `input`; the tied decoder path contributes h^T G.
 */
inline Gradients reconstruction_grads(const Matrix& input, const ModelParams& params, const ActivationKind& kind,
                                      const ForwardCache& cache) {
    const double inv_n = 1.0 / static_cast<double>(input.rows());
    const Matrix g = (-2.0 * inv_n) * cache.r;                         // dL/dy
    Matrix delta;                                                       // dL/da
    delta.noalias() = g * params.W.transpose();
    delta.array() *= apply_act_d1(kind.tag, cache.a).array();

    Gradients out;
    out.dW.noalias() = cache.h.transpose() * g;
    out.dW.noalias() += delta.transpose() * input;
    out.db_enc = delta.colwise().sum().transpose();
    out.db_dec = g.colwise().sum().transpose();
    return out;
}

inline Gradients ae_grads(const Matrix& batch, const ModelParams& params, const ActivationKind& kind,
                          const ForwardCache& cache) {
    return reconstruction_grads(batch, params, kind, cache);
}

}  // namespace sparse_ae

#endif  // SPARSE_AE_MODEL_HPP
