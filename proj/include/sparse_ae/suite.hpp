#ifndef SPARSE_AE_SUITE_HPP
#define SPARSE_AE_SUITE_HPP

#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "data.hpp"
#include "metrics.hpp"
#include "optimizer.hpp"
#include "verify.hpp"

namespace sparse_ae {

enum class SuiteScale { Quick, Full };

inline SuiteScale parse_suite_scale(std::string_view s) {
    if (s == "quick") return SuiteScale::Quick;
    if (s == "full") return SuiteScale::Full;
    throw std::invalid_argument("scale must be 'quick' or 'full', got '" + std::string(s) + "'");
}

/// Central differences of |theta|^2 at (1, 2): exact on quadratics.
inline CheckReport fd_quadratic_check() {
    const Vector g = finite_diff([](const Vector& t) { return t.squaredNorm(); }, Vector{{1.0, 2.0}});
    const double err = std::max(std::abs(g[0] - 2.0) / 2.0, std::abs(g[1] - 4.0) / 4.0);
    return CheckReport::judge("fd_quadratic", err, 1e-9, "gradient of |theta|^2 at (1, 2)");
}

/// Every objective configuration under every activation.
inline std::vector<CheckReport> gradient_checks(int instances, std::uint64_t seed) {
    std::vector<CheckReport> out;
    GradientCheckOptions opt;
    opt.instances = instances;
    Rng root(seed);
    std::uint64_t stream = 0;
    for (const ObjectiveSpec& spec : gradient_suite_objectives())
        for (ActivationTag tag : kAllActivations) {
            Rng rng = root.fork(stream++);
            out.push_back(gradient_check(spec, ActivationKind::of(tag), rng, opt));
        }
    return out;
}

/**
 * Synthetic whitening contract (sample mean <= 1e-10, covariance deviation
 * <= 1e-8) and Var[a_j] = ||W_j||^2 within 3 standard errors for a random
 * encoder on that data.
 */
inline std::vector<CheckReport> whitening_checks(std::uint64_t seed, Eigen::Index n = 64, Eigen::Index count = 10000,
                                                 Eigen::Index m = 32) {
    Rng rng(seed);
    const Dataset d = synth_whitened_gaussian(n, count, rng);
    const WhiteningDeviation dev = whitening_deviation(d.samples);
    std::vector<CheckReport> out;
    const std::string shape = "N=" + std::to_string(count) + ", n=" + std::to_string(n);
    out.push_back(CheckReport::judge("whitening_mean", dev.max_abs_mean, 1e-10, shape));
    out.push_back(CheckReport::judge("whitening_cov", dev.max_abs_cov_dev, 1e-8, shape));
    ModelParams p = ModelParams::zeros(m, n);
    p.W = glorot_init(m, n, rng);
    p.b_enc = rng.normal_matrix(m, 1);
    out.push_back(CheckReport::judge("variance_identity_z", variance_identity_zscore(d.samples, p), 3.0,
                                     std::to_string(m) + " units, Glorot W, random b"));
    return out;
}

/**
 * |dJ_AE/db_j| against 2 sigma_r sqrt(n) ||W_j|| * slack on the full
 * whitened training set at the end of each of `checkpoints` epochs.
 */
inline CheckReport bias_bound_check(std::uint64_t seed, int checkpoints = 20, double slack = 1.05,
                                    ActivationTag tag = ActivationTag::Sigmoid) {
    Rng rng(seed);
    const Dataset d = synth_whitened_gaussian(16, 2000, rng);
    TrainConfig c;
    c.epochs = checkpoints;
    c.hidden_units = 32;
    c.activation = ActivationKind::of(tag);
    c.objective.kind = ObjectiveKind::AE;
    c.seed = seed;
    Trainer t(c, d);
    double worst = 0.0;
    for (int e = 0; e < checkpoints; ++e) {
        t.run_epoch();
        worst = std::max(worst, bias_gradient_ratio(d.samples, t.params(), c.activation));
    }
    std::ostringstream os;
    os << checkpoints << " checkpoints, " << to_string(tag) << ", max |dJ/db| / bound = " << worst;
    return CheckReport::judge("bias_gradient_bound/" + to_string(tag), worst, slack, os.str());
}

/// Random instance for the Monte-Carlo check; ReLU instances are moved off the kink.
inline Instance mc_instance(ActivationTag tag, double max_sigma, Rng& rng) {
    Instance inst = random_instance(7, 5, 4, rng);
    if (tag == ActivationTag::ReLU) move_off_kink(inst, 8.0 * max_sigma, rng);
    return inst;
}

inline std::vector<CheckReport> mc_dae_checks(std::uint64_t seed, int k = 100000) {
    std::vector<CheckReport> out;
    Rng rng(seed);
    const std::vector<double> sigmas = {0.05, 0.025};
    {
        Rng r = rng.fork(0);
        const Instance inst = mc_instance(ActivationTag::Sigmoid, sigmas.front(), r);
        out.push_back(mc_dae_check(inst.batch, inst.params, ActivationKind::of(ActivationTag::Sigmoid), sigmas, k, r));
    }
    {
        Rng r = rng.fork(1);
        const Instance inst = mc_instance(ActivationTag::ReLU, sigmas.front(), r);
        out.push_back(mc_dae_agreement(inst.batch, inst.params, ActivationKind::of(ActivationTag::ReLU), sigmas, k, r));
    }
    return out;
}

/// Descent-certificate setup: whitened data, Sigmoid, unit norm, sum of mean activations.
inline TrainConfig certificate_config(std::uint64_t seed, double lambda = 1000.0, double lr = 0.001) {
    TrainConfig c;
    c.hidden_units = 32;
    c.learning_rate = lr;
    c.momentum = 0.0;
    c.constraint = ConstraintKind::unit_norm();
    c.activation = ActivationKind::of(ActivationTag::Sigmoid);
    c.objective.kind = ObjectiveKind::GenericC2;
    c.objective.c2_f = C2Function::Identity;
    c.objective.coeff = lambda;
    c.seed = seed;
    return c;
}

/**
 * Bias-descent certificate over `window` full-batch steps, a coverage
 * check that the hypothesis held for every unit at every step, and the
 * Chebyshev-bound certificate on the same trajectory.
 */
inline std::vector<CheckReport> certificate_checks(std::uint64_t seed, int window = 50) {
    Rng rng(seed);
    const Dataset d = synth_whitened_gaussian(16, 2000, rng);
    const TrainConfig c = certificate_config(seed);
    const DescentCertificate cert = certify_bias_descent(c, d, window);
    std::vector<CheckReport> out{cert.report};

    long held = 0, total = 0;
    std::vector<bool> step_mask;
    for (const auto& step : cert.trace.hypothesis) {
        bool any = false;
        for (bool h : step) {
            held += h;
            ++total;
            any = any || h;
        }
        step_mask.push_back(any);
    }
    const double missing = total ? 1.0 - static_cast<double>(held) / static_cast<double>(total) : 1.0;
    out.push_back(CheckReport::judge("bias_descent_coverage", missing, 0.0,
                                     std::to_string(held) + "/" + std::to_string(total) + " unit-steps"));
    out.push_back(certify_chebyshev_monotone(cert.trace.trajectory, c.activation, c.activation.delta_min, step_mask));
    return out;
}

/**
 * Oracle and certificate suite. Quick: finite-difference sanity, gradient
 * checks (20 instances each), Jacobian and double-sum oracles, whitening and
 * bias-gradient bound checks. Full: 100 gradient instances, 50 oracle instances, plus the
 * Monte-Carlo denoising check and the descent certificates.
 */
inline std::vector<CheckReport> run_verification_suite(SuiteScale scale, std::uint64_t seed,
                                                       const std::function<void(const CheckReport&)>& on_report = {}) {
    std::vector<CheckReport> out;
    auto add = [&](CheckReport r) {
        if (on_report) on_report(r);
        out.push_back(std::move(r));
    };
    auto add_all = [&](std::vector<CheckReport> rs) {
        for (auto& r : rs) add(std::move(r));
    };
    const bool full = scale == SuiteScale::Full;
    const Rng root(seed);
    add(fd_quadratic_check());
    add_all(gradient_checks(full ? 100 : 20, root.fork(1).next_u64()));
    {
        Rng r = root.fork(2);
        add(cae_jacobian_check(r, full ? 50 : 10));
    }
    {
        Rng r = root.fork(3);
        add(mdae_closed_form_check(r, full ? 50 : 10));
    }
    add_all(whitening_checks(root.fork(4).next_u64()));
    add(bias_bound_check(root.fork(5).next_u64(), 20, 1.05, ActivationTag::Sigmoid));
    add(bias_bound_check(root.fork(5).next_u64(), 20, 1.05, ActivationTag::ReLU));
    if (full) {
        add_all(mc_dae_checks(root.fork(6).next_u64()));
        add_all(certificate_checks(root.fork(7).next_u64()));
    }
    return out;
}

}  // namespace sparse_ae

#endif  // SPARSE_AE_SUITE_HPP
