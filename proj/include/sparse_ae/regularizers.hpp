#ifndef SPARSE_AE_REGULARIZERS_HPP
#define SPARSE_AE_REGULARIZERS_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "activations.hpp"
#include "model.hpp"
#include "numerics.hpp"

namespace sparse_ae {

enum class ObjectiveKind { AE, DAE, CAE, mDAE, SAE, eDAE, GenericC1, GenericC2 };

inline constexpr std::array<ObjectiveKind, 8> kAllObjectives = {
    ObjectiveKind::AE,   ObjectiveKind::DAE,  ObjectiveKind::CAE,       ObjectiveKind::mDAE,
    ObjectiveKind::SAE,  ObjectiveKind::eDAE, ObjectiveKind::GenericC1, ObjectiveKind::GenericC2};

/// Monotone outer function for the mean-activation regularizer family.
enum class C2Function { Identity, NegLogOneMinus };

inline std::string to_string(ObjectiveKind k) {
    switch (k) {
        case ObjectiveKind::AE: return "AE";
        case ObjectiveKind::DAE: return "DAE";
        case ObjectiveKind::CAE: return "CAE";
        case ObjectiveKind::mDAE: return "mDAE";
        case ObjectiveKind::SAE: return "SAE";
        case ObjectiveKind::eDAE: return "eDAE";
        case ObjectiveKind::GenericC1: return "GenericC1";
        case ObjectiveKind::GenericC2: return "GenericC2";
    }
    return "?";
}

inline ObjectiveKind parse_objective(std::string_view name) {
    for (auto k : kAllObjectives)
        if (name == to_string(k)) return k;
    throw std::invalid_argument("unknown objective '" + std::string(name) + "'");
}

inline std::string to_string(C2Function f) { return f == C2Function::Identity ? "Identity" : "NegLogOneMinus"; }

inline C2Function parse_c2_function(std::string_view name) {
    if (name == "Identity") return C2Function::Identity;
    if (name == "NegLogOneMinus") return C2Function::NegLogOneMinus;
    throw std::invalid_argument("unknown GenericC2 function '" + std::string(name) + "'");
}

/**
 * Which objective to train and its knobs. For DAE and eDAE `coeff` is the
 * corruption variance sigma^2; for every other regularized kind it is the
 * multiplier lambda of the penalty.
 */
struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::AE;
    double coeff = 0.0;
    int dae_samples = 1;
    double sae_rho = 0.0;
    int c1_q = 2;
    int c1_p = 2;
    C2Function c2_f = C2Function::Identity;

    void validate() const {
        if (!(coeff >= 0.0) || !std::isfinite(coeff))
            throw std::invalid_argument("objective coefficient must be finite and >= 0");
        if (dae_samples < 1) throw std::invalid_argument("dae_samples must be >= 1");
        if (!(sae_rho >= 0.0 && sae_rho < 1.0)) throw std::invalid_argument("sae_rho must lie in [0, 1)");
        if (c1_q < 1) throw std::invalid_argument("GenericC1 q must be >= 1");
        if (c1_p < 0) throw std::invalid_argument("GenericC1 p must be >= 0");
    }
};

/// Raised when a penalty is evaluated outside its domain (e.g. SAE with a mean activation of 1).
class DomainError : public std::domain_error {
public:
    DomainError(const std::string& what, Eigen::Index unit) : std::domain_error(what), unit_(unit) {}
    Eigen::Index unit() const { return unit_; }

private:
    Eigen::Index unit_;
};

/// Scalar value and its gradient with respect to (W, b_enc, b_dec).
struct RegResult {
    double value = 0.0;
    Gradients grads;
};

namespace detail {

inline double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

inline double inv_rows(const Matrix& batch) { return 1.0 / static_cast<double>(batch.rows()); }

/**
 * Penalties that depend on the pre-activations only through per-sample
 * elementwise factors: given dR/da (batch x m, already scaled by 1/N) fold it
 * into W and b_enc through a = x W^T + b.
 */
inline void accumulate_preactivation_grad(const Matrix& dr_da, const Matrix& batch, Gradients& g) {
    g.dW.noalias() += dr_da.transpose() * batch;
    g.db_enc += dr_da.colwise().sum().transpose();
}

/**
 * Penalties of the form sum_j f(rho_j), rho_j the batch mean of h_j. Takes
 * f'(rho_j) and back-propagates through the mean.
 */
inline Gradients mean_activation_grads(const Matrix& batch, const ModelParams& params, const ActivationKind& kind,
                                       const Matrix& a, const Vector& df_drho) {
    Gradients g = Gradients::zeros_like(params);
    Matrix dr_da = apply_act_d1(kind.tag, a);
    dr_da.array().rowwise() *= (df_drho.transpose() * inv_rows(batch)).array();
    accumulate_preactivation_grad(dr_da, batch, g);
    return g;
}

}  // namespace detail

/**
 * R = E_x[ sum_j s'(a_j)^q ||W_j||^p ]. CAE is (q=2, p=2), the
 * marginalized DAE with isotropic corruption is (q=2, p=4).
 */
inline RegResult reg_generic_c1(const Matrix& batch, const ModelParams& params, const ActivationKind& kind, int q,
                                int p) {
    if (q < 1) throw std::invalid_argument("reg_generic_c1: q must be >= 1");
    if (p < 0) throw std::invalid_argument("reg_generic_c1: p must be >= 0");
    detail::check_batch(batch, params, "reg_generic_c1");
    const double inv_n = detail::inv_rows(batch);
    const Matrix a = pre_activations(batch, params);
    const Matrix d1 = apply_act_d1(kind.tag, a);
    const Matrix d2 = apply_act_d2(kind.tag, a);
    const Vector norms = row_norms(params.W);
    const Eigen::Index m = params.hidden();

    Vector weight_factor(m);  // ||W_j||^p
    for (Eigen::Index j = 0; j < m; ++j) weight_factor[j] = detail::ipow(norms[j], p);

    Matrix d1q(a.rows(), m);
    Matrix dr_da(a.rows(), m);
    for (Eigen::Index s = 0; s < a.rows(); ++s) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const double base = d1(s, j);
            const double pow_qm1 = detail::ipow(base, q - 1);
            d1q(s, j) = pow_qm1 * base;
            dr_da(s, j) = inv_n * q * pow_qm1 * d2(s, j) * weight_factor[j];
        }
    }
    const Vector mean_d1q = d1q.colwise().mean().transpose();

    RegResult out;
    out.value = mean_d1q.dot(weight_factor);
    out.grads = Gradients::zeros_like(params);
    detail::accumulate_preactivation_grad(dr_da, batch, out.grads);
    if (p >= 1) {
        for (Eigen::Index j = 0; j < m; ++j) {
            if (norms[j] == 0.0) continue;
            // d ||w||^p / dw = p ||w||^(p-2) w
            const double scale = mean_d1q[j] * p * detail::ipow(norms[j], p - 1) / norms[j];
            out.grads.dW.row(j) += scale * params.W.row(j);
        }
    }
    return out;
}

/// Contractive penalty ||dh/dx||_F^2 in closed form for tied linear decoding.
inline RegResult reg_cae(const Matrix& batch, const ModelParams& params, const ActivationKind& kind) {
    return reg_generic_c1(batch, params, kind, 2, 2);
}

/// Marginalized denoising penalty with per-dimension variance equal to the coefficient.
inline RegResult reg_mdae(const Matrix& batch, const ModelParams& params, const ActivationKind& kind) {
    return reg_generic_c1(batch, params, kind, 2, 4);
}

/**
 * Sparse AE penalty over batch-mean activations rho_j, natural logarithm.
 * rho == 0 gives -sum_j ln(1 - rho_j); rho > 0 the full KL(rho || rho_j).
 */
inline RegResult reg_sae(const Matrix& batch, const ModelParams& params, const ActivationKind& kind, double rho) {
    detail::check_batch(batch, params, "reg_sae");
    if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("reg_sae: target rho must lie in [0, 1)");
    const Matrix a = pre_activations(batch, params);
    const Vector mean_h = apply_act(kind.tag, a).colwise().mean().transpose();
    const Eigen::Index m = params.hidden();

    double value = 0.0;
    Vector df(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const double r = mean_h[j];
        if (!(r < 1.0))
            throw DomainError("reg_sae: mean activation of unit " + std::to_string(j) + " is " + std::to_string(r) +
                                  " (must be < 1)",
                              j);
        if (rho > 0.0 && !(r > 0.0))
            throw DomainError("reg_sae: mean activation of unit " + std::to_string(j) + " is " + std::to_string(r) +
                                  " (must be > 0 when rho > 0)",
                              j);
        if (rho == 0.0) {
            value -= std::log1p(-r);
            df[j] = 1.0 / (1.0 - r);
        } else {
            value += rho * std::log(rho / r) + (1.0 - rho) * std::log((1.0 - rho) / (1.0 - r));
            df[j] = -rho / r + (1.0 - rho) / (1.0 - r);
        }
    }
    return {value, detail::mean_activation_grads(batch, params, kind, a, df)};
}

/// R = sum_j f(E_x[h_j]) for a monotonically increasing f.
inline RegResult reg_generic_c2(const Matrix& batch, const ModelParams& params, const ActivationKind& kind,
                                C2Function f) {
    if (f == C2Function::NegLogOneMinus) return reg_sae(batch, params, kind, 0.0);
    detail::check_batch(batch, params, "reg_generic_c2");
    const Matrix a = pre_activations(batch, params);
    const Vector mean_h = apply_act(kind.tag, a).colwise().mean().transpose();
    return {mean_h.sum(), detail::mean_activation_grads(batch, params, kind, a, Vector::Ones(params.hidden()))};
}

/**
 * Second-order regularizer implied by isotropic Gaussian corruption, without
 * the residual-dependent term:
 *   E_x[ sum_j s'(a_j)^2 ||W_j||^4 + sum_{j != k} s'(a_j) s'(a_k) (W_j . W_k)^2 ].
 * Used for reporting and for bias-gradient analysis of DAE; never trained on.
 */
inline RegResult reg_dae_marginal(const Matrix& batch, const ModelParams& params, const ActivationKind& kind) {
    detail::check_batch(batch, params, "reg_dae_marginal");
    const double inv_n = detail::inv_rows(batch);
    const Matrix a = pre_activations(batch, params);
    const Matrix d1 = apply_act_d1(kind.tag, a);
    const Matrix d2 = apply_act_d2(kind.tag, a);
    Matrix gram;
    gram.noalias() = params.W * params.W.transpose();
    const Matrix gram_sq = gram.array().square().matrix();

    Matrix d1_gram;  // row s: (G o G) d_s
    d1_gram.noalias() = d1 * gram_sq;

    RegResult out;
    out.value = inv_n * (d1.array() * d1_gram.array()).sum();
    out.grads = Gradients::zeros_like(params);
    const Matrix dr_da = (2.0 * inv_n) * (d1_gram.array() * d2.array()).matrix();
    detail::accumulate_preactivation_grad(dr_da, batch, out.grads);
    Matrix moment;  // E[d d^T]
    moment.noalias() = inv_n * (d1.transpose() * d1);
    out.grads.dW.noalias() += 4.0 * (moment.array() * gram.array()).matrix() * params.W;
    return out;
}

/**
 * Explicit-corruption objective evaluated on the given standard-normal noise.
 * `noise` holds batch.rows() * K rows, sample-major: rows [s*K, (s+1)*K)
 * corrupt sample s. Corrupted input is x + sigma * z; the reconstruction
 * target stays x. Returns the full objective (reconstruction included).
 */
inline RegResult dae_loss_with_noise(const Matrix& batch, const ModelParams& params, const ActivationKind& kind,
                                     double sigma, const Matrix& noise) {
    detail::check_batch(batch, params, "dae_loss");
    const Eigen::Index n_rows = batch.rows();
    if (n_rows == 0 || noise.rows() % n_rows != 0 || noise.cols() != batch.cols())
        throw std::invalid_argument("dae_loss: noise block has incompatible shape");
    const Eigen::Index k = noise.rows() / n_rows;
    Matrix target(noise.rows(), batch.cols());
    for (Eigen::Index s = 0; s < n_rows; ++s) target.middleRows(s * k, k).rowwise() = batch.row(s);
    Matrix input = target + sigma * noise;
    const ForwardCache cache = forward(input, target, params, kind);
    return {ae_loss(cache), reconstruction_grads(input, params, kind, cache)};
}

/// Draws K i.i.d. N(0, sigma2 I) corruptions per sample, in sample-major order.
inline Matrix draw_corruption(Eigen::Index batch_rows, Eigen::Index dim, int k, Rng& rng) {
    return rng.normal_matrix(batch_rows * k, dim);
}

/**
 * Denoising objective with explicit Gaussian corruption, averaged over K
 * corruptions per sample and over the batch. sigma2 == 0 is the plain
 * reconstruction loss and consumes no randomness.
 */
inline RegResult dae_loss(const Matrix& batch, const ModelParams& params, const ActivationKind& kind, double sigma2,
                          int k, Rng& rng) {
    if (!(sigma2 >= 0.0)) throw std::invalid_argument("dae_loss: sigma2 must be >= 0");
    if (k < 1) throw std::invalid_argument("dae_loss: K must be >= 1");
    if (sigma2 == 0.0) {
        const ForwardCache cache = forward(batch, params, kind);
        return {ae_loss(cache), ae_grads(batch, params, kind, cache)};
    }
    const Matrix noise = draw_corruption(batch.rows(), batch.cols(), k, rng);
    return dae_loss_with_noise(batch, params, kind, std::sqrt(sigma2), noise);
}

/**
 * Second-order expansion of the denoising objective around the clean input:
 *   J_AE + sigma2 * E_x[ sum_j d_j^2 ||W_j||^4
 *                        + sum_{j != k} d_j d_k (W_j . W_k)^2
 *                        + sum_i (b_dec + W^T h - x)^T W^T (d2 o W^i o W^i) ]
 * with d = s'(a), d2 = s''(a) and W^i the i-th column of W. Value only.
 */
inline double dae_taylor_value(const Matrix& batch, const ModelParams& params, const ActivationKind& kind,
                               double sigma2) {
    const ForwardCache cache = forward(batch, params, kind);
    const double j_ae = ae_loss(cache);
    if (sigma2 == 0.0) return j_ae;
    const Eigen::Index m = params.hidden();
    const Eigen::Index n = params.visible();
    const Matrix d1 = apply_act_d1(kind.tag, cache.a);
    const Matrix d2 = apply_act_d2(kind.tag, cache.a);
    Matrix gram;
    gram.noalias() = params.W * params.W.transpose();

    double total = 0.0;
    for (Eigen::Index s = 0; s < batch.rows(); ++s) {
        double diag = 0.0;
        double cross = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            diag += d1(s, j) * d1(s, j) * gram(j, j) * gram(j, j);
            for (Eigen::Index k = 0; k < m; ++k)
                if (k != j) cross += d1(s, j) * d1(s, k) * gram(j, k) * gram(j, k);
        }
        // (b_dec + W^T h - x) is minus the residual.
        const Vector w_err = params.W * (-cache.r.row(s).transpose());
        double curvature = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double term = 0.0;
            for (Eigen::Index j = 0; j < m; ++j) term += w_err[j] * d2(s, j) * params.W(j, i) * params.W(j, i);
            curvature += term;
        }
        total += diag + cross + curvature;
    }
    return j_ae + sigma2 * total / static_cast<double>(batch.rows());
}

/**
 * Explicit first-order expansion of the denoising objective:
 *   E_x[ l(x, f(x)) + (x~ - x)^T grad_{x~} l |_{x~ = x} ].
 * `mean_noise` is batch x n: per sample, the mean of its K standard-normal
 * draws (the term is linear in the corruption). Gradients differentiate
 * through grad_{x~} l, including the s'' path.
 */
inline RegResult edae_with_noise(const Matrix& batch, const ModelParams& params, const ActivationKind& kind,
                                 double sigma, const Matrix& mean_noise) {
    detail::check_batch(batch, params, "reg_edae");
    if (mean_noise.rows() != batch.rows() || mean_noise.cols() != batch.cols())
        throw std::invalid_argument("reg_edae: noise shape mismatch");
    const double inv_n = detail::inv_rows(batch);
    const ForwardCache cache = forward(batch, params, kind);
    RegResult out{ae_loss(cache), ae_grads(batch, params, kind, cache)};
    if (sigma == 0.0) return out;

    const Matrix eps = sigma * mean_noise;
    const Matrix d1 = apply_act_d1(kind.tag, cache.a);
    const Matrix d2 = apply_act_d2(kind.tag, cache.a);
    Matrix u;  // W eps per sample
    u.noalias() = eps * params.W.transpose();
    Matrix v;  // W r per sample
    v.noalias() = cache.r * params.W.transpose();

    // Per sample: T = -2 sum_j d_j u_j v_j.
    const double term = -2.0 * (d1.array() * u.array() * v.array()).sum();
    out.value += inv_n * term;

    const Matrix beta = (-2.0 * inv_n) * (d1.array() * v.array()).matrix();   // dT/du
    const Matrix gamma = (-2.0 * inv_n) * (d1.array() * u.array()).matrix();  // dT/dv
    Matrix rho;                                                                // dT/dr = W^T gamma
    rho.noalias() = gamma * params.W;
    Matrix back;  // W rho, pulled back to h through y = W^T h
    back.noalias() = rho * params.W.transpose();
    const Matrix dt_da =
        ((-2.0 * inv_n) * (u.array() * v.array() * d2.array()) - back.array() * d1.array()).matrix();

    out.grads.dW.noalias() += beta.transpose() * eps;
    out.grads.dW.noalias() += gamma.transpose() * cache.r;
    out.grads.dW.noalias() -= cache.h.transpose() * rho;
    detail::accumulate_preactivation_grad(dt_da, batch, out.grads);
    out.grads.db_dec -= rho.colwise().sum().transpose();
    return out;
}

inline Matrix mean_corruption(Eigen::Index batch_rows, Eigen::Index dim, int k, Rng& rng) {
    const Matrix draws = draw_corruption(batch_rows, dim, k, rng);
    Matrix mean(batch_rows, dim);
    for (Eigen::Index s = 0; s < batch_rows; ++s) mean.row(s) = draws.middleRows(s * k, k).colwise().mean();
    return mean;
}

/// First-order explicit denoising objective with K corruptions per sample. Full objective value.
inline RegResult reg_edae(const Matrix& batch, const ModelParams& params, const ActivationKind& kind, double sigma2,
                          int k, Rng& rng) {
    if (!(sigma2 >= 0.0)) throw std::invalid_argument("reg_edae: sigma2 must be >= 0");
    if (k < 1) throw std::invalid_argument("reg_edae: K must be >= 1");
    if (sigma2 == 0.0) {
        const ForwardCache cache = forward(batch, params, kind);
        return {ae_loss(cache), ae_grads(batch, params, kind, cache)};
    }
    const Matrix mean = mean_corruption(batch.rows(), batch.cols(), k, rng);
    return edae_with_noise(batch, params, kind, std::sqrt(sigma2), mean);
}

/// Deterministic penalty R (without coefficient) for the regularized kinds that have one.
inline RegResult regularizer(const ObjectiveSpec& spec, const Matrix& batch, const ModelParams& params,
                             const ActivationKind& kind) {
    switch (spec.kind) {
        case ObjectiveKind::CAE: return reg_cae(batch, params, kind);
        case ObjectiveKind::mDAE: return reg_mdae(batch, params, kind);
        case ObjectiveKind::SAE: return reg_sae(batch, params, kind, spec.sae_rho);
        case ObjectiveKind::GenericC1: return reg_generic_c1(batch, params, kind, spec.c1_q, spec.c1_p);
        case ObjectiveKind::GenericC2: return reg_generic_c2(batch, params, kind, spec.c2_f);
        case ObjectiveKind::DAE: return reg_dae_marginal(batch, params, kind);
        case ObjectiveKind::AE:
        case ObjectiveKind::eDAE: break;
    }
    throw std::invalid_argument("objective " + to_string(spec.kind) + " has no deterministic regularizer");
}

/**
 * dR/db_enc alone: no reconstruction term, no coefficient. For DAE this is
 * the bias gradient of its marginal second-order penalty.
 */
inline Vector bias_reg_gradient(const ObjectiveSpec& spec, const Matrix& batch, const ModelParams& params,
                                const ActivationKind& kind) {
    return regularizer(spec, batch, params, kind).grads.db_enc;
}

/// Full training objective J and its gradient on one batch.
inline RegResult evaluate_objective(const ObjectiveSpec& spec, const Matrix& batch, const ModelParams& params,
                                    const ActivationKind& kind, Rng& corruption_rng) {
    switch (spec.kind) {
        case ObjectiveKind::DAE: return dae_loss(batch, params, kind, spec.coeff, spec.dae_samples, corruption_rng);
        case ObjectiveKind::eDAE: return reg_edae(batch, params, kind, spec.coeff, spec.dae_samples, corruption_rng);
        default: break;
    }
    const ForwardCache cache = forward(batch, params, kind);
    RegResult out{ae_loss(cache), ae_grads(batch, params, kind, cache)};
    if (spec.kind == ObjectiveKind::AE || spec.coeff == 0.0) return out;
    RegResult reg = regularizer(spec, batch, params, kind);
    reg.grads *= spec.coeff;
    out.value += spec.coeff * reg.value;
    out.grads += reg.grads;
    return out;
}

}  // namespace sparse_ae

#endif  // SPARSE_AE_REGULARIZERS_HPP
