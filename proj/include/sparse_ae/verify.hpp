#ifndef SPARSE_AE_VERIFY_HPP
#define SPARSE_AE_VERIFY_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <json.hpp>

#include "activations.hpp"
#include "data.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "numerics.hpp"
#include "optimizer.hpp"
#include "regularizers.hpp"

// Independent cross-checks of the training code. Nothing here is used to train.

namespace sparse_ae {

enum class CheckStatus { Pass, Fail, Inconclusive };

inline std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::Fail: return "fail";
        case CheckStatus::Inconclusive: return "inconclusive";
    }
    return "?";
}

/**
 * Outcome of one check. `max_rel_error` is the check's figure of merit and
 * `tolerance` its limit; for a conclusive check, passed() <=> max_rel_error <= tolerance.
 */
struct CheckReport {
    std::string name;
    CheckStatus status = CheckStatus::Fail;
    double max_rel_error = 0.0;
    double tolerance = 0.0;
    std::string details;

    bool passed() const { return status == CheckStatus::Pass; }

    static CheckReport judge(std::string name, double metric, double tolerance, std::string details) {
        const bool ok = metric <= tolerance;  // NaN fails
        return {std::move(name), ok ? CheckStatus::Pass : CheckStatus::Fail, metric, tolerance, std::move(details)};
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["name"] = name;
        j["status"] = to_string(status);
        j["passed"] = passed();
        j["max_rel_error"] = std::isfinite(max_rel_error) ? nlohmann::json(max_rel_error) : nlohmann::json(nullptr);
        j["tolerance"] = tolerance;
        j["details"] = details;
        return j;
    }
    std::string to_json_line() const { return to_json().dump(); }
};

// ---------------------------------------------------------------------------
// Finite differences

/// Default central-difference step for coordinate value theta.
inline double fd_step(double theta, double base = 1e-5) { return base * std::max(1.0, std::abs(theta)); }

/// Central differences of a black-box function of a flat vector.
inline Vector finite_diff(const std::function<double(const Vector&)>& f, Vector theta, double base_step = 1e-5) {
    if (!(base_step > 0.0)) throw std::invalid_argument("finite_diff: step must be > 0");
    Vector g(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double orig = theta[i];
        const double h = fd_step(orig, base_step);
        theta[i] = orig + h;
        const double fp = f(theta);
        theta[i] = orig - h;
        const double fm = f(theta);
        theta[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

/// Central differences of an objective over every model coordinate.
inline Gradients finite_diff_grads(const std::function<double(const ModelParams&)>& objective, ModelParams params,
                                   double base_step = 1e-5) {
    if (!(base_step > 0.0)) throw std::invalid_argument("finite_diff_grads: step must be > 0");
    Gradients g = Gradients::zeros_like(params);
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        double& c = params.coord(i);
        const double orig = c;
        const double h = fd_step(orig, base_step);
        c = orig + h;
        const double fp = objective(params);
        c = orig - h;
        const double fm = objective(params);
        c = orig;
        g.coord(i) = (fp - fm) / (2.0 * h);
    }
    return g;
}

/**
 * Largest entrywise relative error |a - b| / max(|a|, |b|, floor), where the
 * floor is 1e-3 of the largest magnitude in either vector so that entries
 * that are zero up to cancellation do not dominate.
 */
inline double max_relative_error(const Gradients& analytic, const Gradients& numeric) {
    if (analytic.size() != numeric.size()) throw std::invalid_argument("max_relative_error: size mismatch");
    double scale = 0.0;
    for (Eigen::Index i = 0; i < analytic.size(); ++i)
        scale = std::max({scale, std::abs(analytic.coord(i)), std::abs(numeric.coord(i))});
    const double floor = std::max(1e-3 * scale, 1e-8);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < analytic.size(); ++i) {
        const double a = analytic.coord(i);
        const double b = numeric.coord(i);
        const double err = std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
        if (!(err <= worst)) worst = err;  // propagates NaN
    }
    return worst;
}

/// Central-difference Jacobian dh/dx (m x n) at a single input.
inline Matrix numeric_encoder_jacobian(const Vector& x, const ModelParams& params, const ActivationKind& kind,
                                       double base_step = 1e-5) {
    if (!(base_step > 0.0)) throw std::invalid_argument("numeric_encoder_jacobian: step must be > 0");
    params.check_shapes();
    if (x.size() != params.visible()) throw std::invalid_argument("numeric_encoder_jacobian: x has wrong size");
    auto hidden = [&](const Vector& in) {
        Vector a = params.W * in + params.b_enc;
        for (Eigen::Index j = 0; j < a.size(); ++j) a[j] = act(kind.tag, a[j]);
        return a;
    };
    Matrix jac(params.hidden(), params.visible());
    Vector probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = fd_step(x[i], base_step);
        probe[i] = x[i] + h;
        const Vector hp = hidden(probe);
        probe[i] = x[i] - h;
        const Vector hm = hidden(probe);
        probe[i] = x[i];
        jac.col(i) = (hp - hm) / (2.0 * h);
    }
    return jac;
}

// ---------------------------------------------------------------------------
// Random gradient-check instances

struct Instance {
    Matrix batch;
    ModelParams params;
};

inline Instance random_instance(Eigen::Index n, Eigen::Index m, Eigen::Index rows, Rng& rng) {
    Instance inst;
    inst.batch = rng.normal_matrix(rows, n);
    inst.params.W = 0.5 * rng.normal_matrix(m, n);
    inst.params.b_enc = 0.5 * rng.normal_matrix(m, 1);
    inst.params.b_dec = 0.5 * rng.normal_matrix(n, 1);
    return inst;
}

/**
 * Resets each encoder bias so that unit j is either active or inactive on
 * every sample with |a_j| >= margin_scale * ||W_j||. With margin_scale well
 * above the corruption std, corrupted inputs stay off the ReLU kink too.
 */
inline void move_off_kink(Instance& inst, double margin_scale, Rng& rng) {
    const Matrix wx = inst.batch * inst.params.W.transpose();
    for (Eigen::Index j = 0; j < inst.params.hidden(); ++j) {
        const double margin = margin_scale * inst.params.W.row(j).norm();
        const bool active = rng.uniform() < 0.5;
        inst.params.b_enc[j] = active ? margin - wx.col(j).minCoeff() : -margin - wx.col(j).maxCoeff();
    }
}

/// Full objective as a function of parameters with a frozen corruption stream.
inline std::function<double(const ModelParams&)> frozen_objective(const ObjectiveSpec& spec, const Matrix& batch,
                                                                  const ActivationKind& kind, const Rng& rng) {
    return [spec, batch, kind, rng](const ModelParams& p) {
        Rng copy = rng;
        return evaluate_objective(spec, batch, p, kind, copy).value;
    };
}

/// Largest batch-mean activation accepted for the -ln(1 - rho) penalties.
inline constexpr double kMaxMeanActivation = 0.9;

/**
 * True when the instance is safely inside the region where central
 * differences are accurate: every pre-activation the objective touches is at
 * least `margin` away from the ReLU kink (corrupted inputs included), and the
 * -ln(1 - rho) penalties stay away from their pole at rho = 1.
 */
inline bool kink_free(const ObjectiveSpec& spec, const Instance& inst, const ActivationKind& kind, const Rng& rng,
                      double margin) {
    const bool log_penalty = spec.kind == ObjectiveKind::SAE ||
                             (spec.kind == ObjectiveKind::GenericC2 && spec.c2_f == C2Function::NegLogOneMinus);
    if (log_penalty) {
        const Matrix h = apply_act(kind.tag, pre_activations(inst.batch, inst.params));
        if ((h.colwise().mean().array() > kMaxMeanActivation).any()) return false;
    }
    if (kind.tag != ActivationTag::ReLU) return true;
    auto clear = [&](const Matrix& a) { return (a.array().abs() >= margin).all(); };
    if (!clear(pre_activations(inst.batch, inst.params))) return false;
    if (spec.kind == ObjectiveKind::DAE && spec.coeff > 0.0) {
        Rng copy = rng;
        const Matrix noise = draw_corruption(inst.batch.rows(), inst.batch.cols(), spec.dae_samples, copy);
        const Eigen::Index k = spec.dae_samples;
        Matrix input(noise.rows(), noise.cols());
        for (Eigen::Index s = 0; s < inst.batch.rows(); ++s)
            input.middleRows(s * k, k) =
                (std::sqrt(spec.coeff) * noise.middleRows(s * k, k)).rowwise() + inst.batch.row(s);
        if (!clear(pre_activations(input, inst.params))) return false;
    }
    return true;
}

struct GradientCheckOptions {
    Eigen::Index n = 7;
    Eigen::Index m = 5;
    Eigen::Index rows = 3;
    int instances = 100;
    double tolerance = 1e-6;
    double kink_margin = 1e-3;
    int max_resamples = 1000;
};

/**
 * Analytic versus central-difference gradients of the full objective on
 * seeded random instances. Instances outside the penalty's domain or too
 * close to a ReLU kink are redrawn.
 */
inline CheckReport gradient_check(const ObjectiveSpec& spec, const ActivationKind& kind, Rng& rng,
                                  const GradientCheckOptions& opt = {}) {
    double worst = 0.0;
    int redrawn = 0;
    for (int t = 0; t < opt.instances; ++t) {
        for (int attempt = 0;; ++attempt) {
            if (attempt > opt.max_resamples)
                throw std::runtime_error("gradient_check: could not draw a valid instance for " +
                                         to_string(spec.kind));
            Instance inst = random_instance(opt.n, opt.m, opt.rows, rng);
            const Rng noise_rng = rng.fork(static_cast<std::uint64_t>(t) * 1000003u + attempt);
            if (!kink_free(spec, inst, kind, noise_rng, opt.kink_margin)) {
                ++redrawn;
                continue;
            }
            RegResult analytic;
            try {
                Rng copy = noise_rng;
                analytic = evaluate_objective(spec, inst.batch, inst.params, kind, copy);
            } catch (const DomainError&) {
                ++redrawn;
                continue;
            }
            const Gradients numeric =
                finite_diff_grads(frozen_objective(spec, inst.batch, kind, noise_rng), inst.params);
            const double err = max_relative_error(analytic.grads, numeric);
            if (!(err <= worst)) worst = err;
            break;
        }
    }
    std::ostringstream os;
    os << opt.instances << " instances (n=" << opt.n << ", m=" << opt.m << ", batch=" << opt.rows << "), " << redrawn
       << " redrawn";
    std::string name = "grad/" + to_string(spec.kind);
    if (spec.kind == ObjectiveKind::GenericC1) name += "(q=" + std::to_string(spec.c1_q) + ",p=" + std::to_string(spec.c1_p) + ")";
    if (spec.kind == ObjectiveKind::GenericC2) name += "(" + to_string(spec.c2_f) + ")";
    name += "/" + to_string(kind.tag);
    return CheckReport::judge(std::move(name), worst, opt.tolerance, os.str());
}

/// The objective configurations exercised by the gradient suite.
inline std::vector<ObjectiveSpec> gradient_suite_objectives() {
    std::vector<ObjectiveSpec> out;
    auto add = [&](ObjectiveKind k, double coeff) {
        ObjectiveSpec s;
        s.kind = k;
        s.coeff = coeff;
        out.push_back(s);
        return &out.back();
    };
    add(ObjectiveKind::AE, 0.0);
    add(ObjectiveKind::DAE, 0.1)->dae_samples = 2;
    add(ObjectiveKind::CAE, 0.7);
    add(ObjectiveKind::mDAE, 0.7);
    add(ObjectiveKind::SAE, 0.7)->sae_rho = 0.0;
    add(ObjectiveKind::eDAE, 0.1)->dae_samples = 2;
    for (int q : {1, 2, 3})
        for (int p : {0, 2, 4}) {
            ObjectiveSpec* s = add(ObjectiveKind::GenericC1, 0.7);
            s->c1_q = q;
            s->c1_p = p;
        }
    add(ObjectiveKind::GenericC2, 0.7)->c2_f = C2Function::Identity;
    add(ObjectiveKind::GenericC2, 0.7)->c2_f = C2Function::NegLogOneMinus;
    return out;
}

/// Contractive penalty against the squared Frobenius norm of numeric Jacobians.
inline CheckReport cae_jacobian_check(Rng& rng, int instances = 50, double tolerance = 1e-6,
                                      Eigen::Index n = 7, Eigen::Index m = 5, Eigen::Index rows = 3) {
    double worst = 0.0;
    for (int t = 0; t < instances; ++t) {
        for (ActivationTag tag : kAllActivations) {
            const ActivationKind kind = ActivationKind::of(tag);
            Instance inst;
            do {
                inst = random_instance(n, m, rows, rng);
            } while (!kink_free(ObjectiveSpec{}, inst, kind, rng, 1e-3));
            double oracle = 0.0;
            for (Eigen::Index s = 0; s < rows; ++s)
                oracle += numeric_encoder_jacobian(inst.batch.row(s).transpose(), inst.params, kind).squaredNorm();
            oracle /= static_cast<double>(rows);
            const double value = reg_cae(inst.batch, inst.params, kind).value;
            const double err = std::abs(value - oracle) / std::max({std::abs(value), std::abs(oracle), 1e-300});
            if (!(err <= worst)) worst = err;
        }
    }
    return CheckReport::judge("cae_jacobian", worst, tolerance,
                              std::to_string(instances) + " instances per activation");
}

/**
 * Marginalized denoising penalty against the explicit double sum
 * sum_i sum_j s'(a_j)^2 W_ji^2 * sum_k W_jk^2, computed entry by entry.
 */
inline double mdae_double_sum(const Matrix& batch, const ModelParams& params, const ActivationKind& kind) {
    double total = 0.0;
    for (Eigen::Index s = 0; s < batch.rows(); ++s) {
        for (Eigen::Index j = 0; j < params.hidden(); ++j) {
            double a = params.b_enc[j];
            for (Eigen::Index i = 0; i < params.visible(); ++i) a += params.W(j, i) * batch(s, i);
            const double d = act_d1(kind.tag, a);
            double row_sq = 0.0;
            for (Eigen::Index k = 0; k < params.visible(); ++k) row_sq += params.W(j, k) * params.W(j, k);
            for (Eigen::Index i = 0; i < params.visible(); ++i) total += d * d * params.W(j, i) * params.W(j, i) * row_sq;
        }
    }
    return total / static_cast<double>(batch.rows());
}

inline CheckReport mdae_closed_form_check(Rng& rng, int instances = 50, double tolerance = 1e-12,
                                          Eigen::Index n = 7, Eigen::Index m = 5, Eigen::Index rows = 3) {
    double worst = 0.0;
    for (int t = 0; t < instances; ++t) {
        for (ActivationTag tag : kAllActivations) {
            const ActivationKind kind = ActivationKind::of(tag);
            const Instance inst = random_instance(n, m, rows, rng);
            const double oracle = mdae_double_sum(inst.batch, inst.params, kind);
            const double value = reg_mdae(inst.batch, inst.params, kind).value;
            const double err = std::abs(value - oracle) / std::max({std::abs(value), std::abs(oracle), 1e-300});
            if (!(err <= worst)) worst = err;
        }
    }
    return CheckReport::judge("mdae_closed_form", worst, tolerance,
                              std::to_string(instances) + " instances per activation");
}

// ---------------------------------------------------------------------------
// Monte-Carlo denoising versus its second-order expansion

/// How the corruption draws for the Monte-Carlo estimate are generated.
enum class NoiseScheme {
    IID,
    /// Per sample: half the draws are rescaled so their second moment is exactly I, then
    /// mirrored (z, -z). All odd moments and the covariance then match the Gaussian exactly.
    MomentMatched,
};

/// K standard-normal corruptions per sample, sample-major, under the given scheme.
inline Matrix corruption_block(Eigen::Index rows, Eigen::Index dim, int k, Rng& rng, NoiseScheme scheme) {
    if (scheme == NoiseScheme::IID) return draw_corruption(rows, dim, k, rng);
    if (k % 2 != 0 || k / 2 < dim) throw std::invalid_argument("corruption_block: K must be even and >= 2 * dim");
    const Eigen::Index half = k / 2;
    Matrix out(rows * k, dim);
    for (Eigen::Index s = 0; s < rows; ++s) {
        Matrix z = rng.normal_matrix(half, dim);
        const Matrix second = (z.transpose() * z) / static_cast<double>(half);
        const Eigen::LLT<Matrix> llt(second);
        // z <- z L^{-T}
        const Matrix zt = llt.matrixL().solve(z.transpose());
        out.middleRows(s * k, half) = zt.transpose();
        out.middleRows(s * k + half, half) = -zt.transpose();
    }
    return out;
}

struct McEstimate {
    double value = 0.0;
    double standard_error = 0.0;  ///< as if the draws were i.i.d.
};

/// Mean reconstruction loss over the corrupted copies, with its standard error.
inline McEstimate mc_dae_value(const Matrix& batch, const ModelParams& params, const ActivationKind& kind,
                               double sigma, const Matrix& noise) {
    const Eigen::Index rows = batch.rows();
    const Eigen::Index k = noise.rows() / rows;
    Matrix input(noise.rows(), noise.cols());
    for (Eigen::Index s = 0; s < rows; ++s) input.middleRows(s * k, k) = (sigma * noise.middleRows(s * k, k)).rowwise() + batch.row(s);
    Matrix target(noise.rows(), noise.cols());
    for (Eigen::Index s = 0; s < rows; ++s) target.middleRows(s * k, k).rowwise() = batch.row(s);
    const ForwardCache cache = forward(input, target, params, kind);
    // Per-draw loss; each sample's K draws share weight 1/N.
    const Vector per_draw = cache.r.rowwise().squaredNorm();
    McEstimate est;
    est.value = per_draw.mean();  // equal block sizes: the batch mean of per-sample means
    double var_sum = 0.0;
    for (Eigen::Index s = 0; s < rows; ++s) {
        const auto block = per_draw.segment(s * k, k);
        const double mean = block.mean();
        var_sum += (block.array() - mean).square().sum() / static_cast<double>(k - 1);
    }
    // Var of the overall mean: sum_s Var(block mean) / N^2.
    est.standard_error = std::sqrt(var_sum / static_cast<double>(k)) / static_cast<double>(rows);
    return est;
}

/**
 * Residual |MC - expansion| at each sigma, with the same underlying draws for
 * every sigma. Passes when the residual shrinks by at least `min_shrink`
 * between consecutive sigmas. Figure of merit: max over pairs of
 * 1 / shrink, tolerance 1 / min_shrink.
 */
inline CheckReport mc_dae_check(const Matrix& batch, const ModelParams& params, const ActivationKind& kind,
                                const std::vector<double>& sigmas, int k, Rng& rng,
                                NoiseScheme scheme = NoiseScheme::MomentMatched, double min_shrink = 3.0) {
    if (k < 10000) throw std::invalid_argument("mc_dae_check: K must be >= 1e4");
    if (!std::is_sorted(sigmas.rbegin(), sigmas.rend())) throw std::invalid_argument("mc_dae_check: sigmas must be descending");
    const Matrix noise = corruption_block(batch.rows(), batch.cols(), k, rng, scheme);
    std::vector<double> residual;
    std::ostringstream os;
    os.precision(6);
    for (double sigma : sigmas) {
        const McEstimate mc = sigma == 0.0 ? McEstimate{dae_taylor_value(batch, params, kind, 0.0), 0.0}
                                           : mc_dae_value(batch, params, kind, sigma, noise);
        const double taylor = dae_taylor_value(batch, params, kind, sigma * sigma);
        residual.push_back(std::abs(mc.value - taylor));
        os << "sigma=" << sigma << " residual=" << residual.back() << " se=" << mc.standard_error << "; ";
    }
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < residual.size(); ++i) {
        const double inv_shrink = residual[i] == 0.0 ? (residual[i + 1] == 0.0 ? 0.0 : INFINITY)
                                                     : residual[i + 1] / residual[i];
        if (!(inv_shrink <= worst)) worst = inv_shrink;
    }
    return CheckReport::judge("mc_dae_shrink/" + to_string(kind.tag), worst, 1.0 / min_shrink, os.str());
}

/**
 * |MC - expansion| in units of the Monte-Carlo standard error, i.i.d. draws.
 * For ReLU away from the kink the loss is exactly quadratic in the noise so
 * only Monte-Carlo error remains.
 */
inline CheckReport mc_dae_agreement(const Matrix& batch, const ModelParams& params, const ActivationKind& kind,
                                    const std::vector<double>& sigmas, int k, Rng& rng, double max_se = 3.0) {
    if (k < 10000) throw std::invalid_argument("mc_dae_agreement: K must be >= 1e4");
    const Matrix noise = corruption_block(batch.rows(), batch.cols(), k, rng, NoiseScheme::IID);
    double worst = 0.0;
    std::ostringstream os;
    os.precision(6);
    for (double sigma : sigmas) {
        if (sigma == 0.0) continue;
        const McEstimate mc = mc_dae_value(batch, params, kind, sigma, noise);
        const double taylor = dae_taylor_value(batch, params, kind, sigma * sigma);
        const double z = std::abs(mc.value - taylor) / mc.standard_error;
        if (!(z <= worst)) worst = z;
        os << "sigma=" << sigma << " |mc-taylor|/se=" << z << "; ";
    }
    return CheckReport::judge("mc_dae_within_se/" + to_string(kind.tag), worst, max_se, os.str());
}

// ---------------------------------------------------------------------------
// Whitening and bias-gradient bounds

/// Sample-moment deviations of a dataset from zero mean and identity covariance.
struct WhiteningDeviation {
    double max_abs_mean = 0.0;
    double max_abs_cov_dev = 0.0;
};

inline WhiteningDeviation whitening_deviation(const Matrix& x) {
    const Eigen::Index n = x.rows();
    const Vector mean = x.colwise().mean().transpose();
    const Matrix centered = x.rowwise() - mean.transpose();
    const Matrix cov = (centered.transpose() * centered) / static_cast<double>(n);
    const Matrix dev = cov - Matrix::Identity(x.cols(), x.cols());
    return {mean.cwiseAbs().maxCoeff(), dev.cwiseAbs().maxCoeff()};
}

/**
 * Per-unit |Var[a_j] - ||W_j||^2| in units of the standard error of the
 * population variance estimate, sqrt((m4 - var^2) / N). Returns the maximum.
 */
inline double variance_identity_zscore(const Matrix& data, const ModelParams& params) {
    const Matrix a = pre_activations(data, params);
    const double count = static_cast<double>(a.rows());
    const Vector norms = row_norms(params.W);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        const auto col = a.col(j).array();
        const double mean = col.mean();
        const double var = (col - mean).square().mean();
        const double m4 = (col - mean).square().square().mean();
        const double se = std::sqrt(std::max(m4 - var * var, 0.0) / count);
        const double diff = std::abs(var - norms[j] * norms[j]);
        const double z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : INFINITY);
        if (!(z <= worst)) worst = z;
    }
    return worst;
}

/// max_j |dJ_AE/db_enc_j| / (2 sigma_r sqrt(n) ||W_j||) on the given data.
inline double bias_gradient_ratio(const Matrix& data, const ModelParams& params, const ActivationKind& kind) {
    const ForwardCache cache = forward(data, params, kind);
    const Gradients g = ae_grads(data, params, kind, cache);
    const Vector bound = bias_gradient_bound(residual_std(cache), params.visible(), params.W);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < bound.size(); ++j) {
        const double num = std::abs(g.db_enc[j]);
        const double r = bound[j] > 0.0 ? num / bound[j] : (num == 0.0 ? 0.0 : INFINITY);
        if (!(r <= worst)) worst = r;
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Descent certificates

/// Trajectory of full-data per-unit statistics recorded by certify_bias_descent.
struct CertificateTrace {
    TrainHistory trajectory;                     ///< one record per state, before step 0 through after the last
    std::vector<std::vector<bool>> hypothesis;   ///< [step][unit]: hypothesis held before that step
    std::vector<std::vector<bool>> decreased;    ///< [step][unit]: E[a_j] strictly decreased over that step
};

struct DescentCertificate {
    CheckReport report;
    CertificateTrace trace;
};

/**
 * Takes `window` full-batch gradient steps from the trainer's
 * initialization. Before each step, unit j satisfies the hypothesis when
 * lambda * dR/db_j exceeds the reconstruction bias-gradient bound
 * 2 sigma_r sqrt(n) ||W_j||. Every such unit must show a strictly lower
 * full-data mean pre-activation after the step. Also checks Var[a_j] =
 * ||W_j||^2 within 3 standard errors at every state.
 *
 * Momentum is not used: the claim concerns single gradient steps.
 */
inline DescentCertificate certify_bias_descent(const TrainConfig& config, const Dataset& data, int window) {
    config.validate();
    if (window < 1) throw std::invalid_argument("certify_bias_descent: window must be >= 1");
    if (config.constraint.tag != ConstraintKind::Tag::UnitNorm)
        throw std::invalid_argument("certify_bias_descent: requires the unit-norm constraint");
    if (config.objective.kind == ObjectiveKind::AE || config.objective.kind == ObjectiveKind::eDAE)
        throw std::invalid_argument("certify_bias_descent: objective " + to_string(config.objective.kind) +
                                    " has no deterministic bias gradient");

    const Matrix& x = data.samples;
    Trainer init(config, data);
    ModelParams params = init.params();
    Rng corruption = Rng(config.seed).fork(static_cast<std::uint64_t>(Stream::Corruption));
    const ActivationKind& kind = config.activation;
    const double lambda = config.objective.coeff;

    DescentCertificate res;
    auto record = [&](int step) {
        EpochRecord rec = evaluate_epoch(config, data, params, step);
        res.trace.trajectory.records.push_back(std::move(rec));
    };
    record(0);
    double worst_var_z = variance_identity_zscore(x, params);
    long satisfied = 0, violations = 0;
    for (int t = 0; t < window; ++t) {
        const ForwardCache cache = forward(x, params, kind);
        const Vector bound = bias_gradient_bound(residual_std(cache), params.visible(), params.W);
        const Vector reg_bias = bias_reg_gradient(config.objective, x, params, kind);
        std::vector<bool> hyp(static_cast<std::size_t>(params.hidden()));
        for (Eigen::Index j = 0; j < params.hidden(); ++j) hyp[j] = lambda * reg_bias[j] > bound[j];

        const Vector before = res.trace.trajectory.records.back().per_unit_mean_a;
        const RegResult eval = evaluate_objective(config.objective, x, params, kind, corruption);
        if (!std::isfinite(eval.value) || !eval.grads.finite())
            throw TrainingError(t, 0, "certificate objective is not finite");
        Velocity v = Gradients::zeros_like(params);
        sgd_momentum_update(params, eval.grads, v, config.learning_rate, 0.0, config.constraint);
        record(t + 1);
        worst_var_z = std::max(worst_var_z, variance_identity_zscore(x, params));

        const Vector& after = res.trace.trajectory.records.back().per_unit_mean_a;
        std::vector<bool> dec(hyp.size());
        for (std::size_t j = 0; j < hyp.size(); ++j) {
            dec[j] = after[static_cast<Eigen::Index>(j)] < before[static_cast<Eigen::Index>(j)];
            if (hyp[j]) {
                ++satisfied;
                if (!dec[j]) ++violations;
            }
        }
        res.trace.hypothesis.push_back(std::move(hyp));
        res.trace.decreased.push_back(std::move(dec));
    }
    res.trace.trajectory.final_params = params;

    const long total = static_cast<long>(window) * params.hidden();
    std::ostringstream os;
    os << "window=" << window << " steps, hypothesis held for " << satisfied << "/" << total
       << " unit-steps, violations=" << violations << ", max Var[a]-||W||^2 z-score=" << worst_var_z;
    if (satisfied == 0) {
        res.report = {"bias_descent", CheckStatus::Inconclusive, 0.0, 0.0, os.str() + " (hypothesis never satisfied)"};
        return res;
    }
    const double frac = static_cast<double>(violations) / static_cast<double>(satisfied);
    res.report = CheckReport::judge("bias_descent", frac, 0.0, os.str());
    if (res.report.passed() && !(worst_var_z <= 3.0)) {
        res.report.status = CheckStatus::Fail;
        res.report.details += " (variance identity outside 3 standard errors)";
    }
    return res;
}

/**
 * Chebyshev de-activation bound p_j per record, non-decreasing between
 * consecutive records for at least `min_fraction` of the units that have an
 * applicable pair (E[a_j] < a_min at both ends). When `step_mask` is given,
 * only transitions t -> t+1 with step_mask[t] true are considered. Figure of
 * merit: fraction of applicable units with a decrease.
 */
inline CheckReport certify_chebyshev_monotone(const TrainHistory& history, const ActivationKind& kind, double delta_min,
                                    const std::vector<bool>& step_mask = {}, double min_fraction = 0.95,
                                    double slack = 1e-12) {
    const double a_min = a_min_for(kind, delta_min);
    const auto& recs = history.records;
    if (recs.empty()) return {"chebyshev_monotone", CheckStatus::Inconclusive, 0.0, 1.0 - min_fraction, "empty history"};
    const Eigen::Index m = recs.front().per_unit_mean_a.size();
    long applicable = 0, failing = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
        bool any = false, bad = false;
        for (std::size_t t = 0; t + 1 < recs.size(); ++t) {
            if (!step_mask.empty() && (t >= step_mask.size() || !step_mask[t])) continue;
            const auto p0 = chebyshev_sparsity_bound(recs[t].per_unit_mean_a[j], recs[t].per_unit_var_a[j], a_min);
            const auto p1 =
                chebyshev_sparsity_bound(recs[t + 1].per_unit_mean_a[j], recs[t + 1].per_unit_var_a[j], a_min);
            if (!p0 || !p1) continue;
            any = true;
            if (*p1 < *p0 - slack) bad = true;
        }
        if (any) {
            ++applicable;
            if (bad) ++failing;
        }
    }
    std::ostringstream os;
    os << "a_min=" << a_min << ", applicable units " << applicable << "/" << m << ", with a decrease " << failing;
    if (applicable == 0) return {"chebyshev_monotone", CheckStatus::Inconclusive, 0.0, 1.0 - min_fraction, os.str()};
    return CheckReport::judge("chebyshev_monotone", static_cast<double>(failing) / static_cast<double>(applicable),
                              1.0 - min_fraction, os.str());
}

}  // namespace sparse_ae

#endif  // SPARSE_AE_VERIFY_HPP
