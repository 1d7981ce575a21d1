#ifndef SPARSE_AE_OPTIMIZER_HPP
#define SPARSE_AE_OPTIMIZER_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "activations.hpp"
#include "data.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "numerics.hpp"
#include "regularizers.hpp"

namespace sparse_ae {

struct TrainConfig {
    int epochs = 15;
    int batch_size = 50;
    double learning_rate = 0.003;
    double momentum = 0.9;
    ConstraintKind constraint = ConstraintKind::unit_norm();
    ObjectiveSpec objective;
    ActivationKind activation = ActivationKind::of(ActivationTag::ReLU);
    int hidden_units = 256;
    std::uint64_t seed = 1;

    void validate() const {
        if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
        if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
        if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
        if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must lie in [0, 1)");
        if (hidden_units < 1) throw std::invalid_argument("hidden_units must be >= 1");
        objective.validate();
    }
};

/// Full-training-set measurements taken at the end of an epoch.
struct EpochRecord {
    int epoch = 0;
    double recon_loss = 0.0;
    double reg_value = 0.0;  ///< unscaled penalty R; see epoch_regularizer_value
    double avg_activation_fraction = 0.0;
    double dead_unit_fraction = 0.0;
    double mean_pre_activation = 0.0;  ///< mean over units of E_x[a_j]
    Vector per_unit_mean_a;
    Vector per_unit_var_a;
};

struct TrainHistory {
    std::vector<EpochRecord> records;
    ModelParams final_params;
};

/// Thrown when the objective stops being finite; names the epoch and batch.
class TrainingError : public std::runtime_error {
public:
    TrainingError(int epoch, std::size_t batch, const std::string& what)
        : std::runtime_error("epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) + ": " + what),
          epoch_(epoch),
          batch_(batch) {}
    int epoch() const { return epoch_; }
    std::size_t batch() const { return batch_; }

private:
    int epoch_;
    std::size_t batch_;
};

/// Momentum buffer; same layout as the parameters.
using Velocity = Gradients;

/**
 * Classical momentum: v' = mu v - lr g, theta' = theta + v', then W rows are
 * projected onto the constraint set. Biases and the velocity are never
 * projected.
 */
inline void sgd_momentum_update(ModelParams& params, const Gradients& grads, Velocity& velocity, double lr, double mu,
                                const ConstraintKind& constraint) {
    velocity.dW = mu * velocity.dW - lr * grads.dW;
    velocity.db_enc = mu * velocity.db_enc - lr * grads.db_enc;
    velocity.db_dec = mu * velocity.db_dec - lr * grads.db_dec;
    params.W += velocity.dW;
    params.b_enc += velocity.db_enc;
    params.b_dec += velocity.db_dec;
    params.W = project_rows(std::move(params.W), constraint);
}

inline std::pair<ModelParams, Velocity> sgd_momentum_step(ModelParams params, const Gradients& grads,
                                                          Velocity velocity, double lr, double mu,
                                                          const ConstraintKind& constraint) {
    sgd_momentum_update(params, grads, velocity, lr, mu, constraint);
    return {std::move(params), std::move(velocity)};
}

/**
 * Penalty value recorded per epoch: R for the deterministic regularizers, the
 * marginal second-order penalty for DAE, 0 for AE and eDAE (whose extra term
 * is zero-mean noise).
 */
inline double epoch_regularizer_value(const ObjectiveSpec& spec, const Matrix& data, const ModelParams& params,
                                      const ActivationKind& kind) {
    if (spec.kind == ObjectiveKind::AE || spec.kind == ObjectiveKind::eDAE) return 0.0;
    return regularizer(spec, data, params, kind).value;
}

inline EpochRecord evaluate_epoch(const TrainConfig& config, const Dataset& data, const ModelParams& params,
                                  int epoch) {
    const ForwardCache cache = forward(data.samples, params, config.activation);
    const SparsityReport rep = sparsity_report(cache.h, cache.a, config.activation.delta_min);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.recon_loss = ae_loss(cache);
    rec.reg_value = epoch_regularizer_value(config.objective, data.samples, params, config.activation);
    rec.avg_activation_fraction = rep.avg_activation_fraction;
    rec.dead_unit_fraction = rep.dead_unit_fraction;
    rec.mean_pre_activation = rep.per_unit_mean_a.size() ? rep.per_unit_mean_a.mean() : 0.0;
    rec.per_unit_mean_a = rep.per_unit_mean_a;
    rec.per_unit_var_a = rep.per_unit_var_a;
    return rec;
}

/// Random stream identifiers derived from the config seed.
enum class Stream : std::uint64_t { Init = 0, Shuffle = 1, Corruption = 2 };

/**
 * Minibatch SGD driver. Initialization: Glorot W (projected when
 * constrained), zero biases. Shuffling and corruption draw from separate
 * streams so changing K never perturbs the data order.
 */
class Trainer {
public:
    using StepObserver = std::function<void(const Trainer&, int epoch, std::size_t batch)>;

    Trainer(TrainConfig config, const Dataset& data)
        : config_(std::move(config)),
          data_(data),
          shuffle_rng_(Rng(config_.seed).fork(static_cast<std::uint64_t>(Stream::Shuffle))),
          corruption_rng_(Rng(config_.seed).fork(static_cast<std::uint64_t>(Stream::Corruption))) {
        config_.validate();
        if (data_.size() < 1) throw std::invalid_argument("Trainer: empty dataset");
        Rng init = Rng(config_.seed).fork(static_cast<std::uint64_t>(Stream::Init));
        const Eigen::Index m = config_.hidden_units;
        const Eigen::Index n = data_.dim();
        params_.W = project_rows(glorot_init(m, n, init), config_.constraint);
        params_.b_enc = Vector::Zero(m);
        params_.b_dec = Vector::Zero(n);
        velocity_ = Gradients::zeros_like(params_);
        order_.resize(static_cast<std::size_t>(data_.size()));
        std::iota(order_.begin(), order_.end(), Eigen::Index{0});
    }

    const TrainConfig& config() const { return config_; }
    const Dataset& data() const { return data_; }
    const ModelParams& params() const { return params_; }
    ModelParams& mutable_params() { return params_; }
    int epochs_done() const { return epoch_; }
    std::size_t steps_done() const { return steps_; }
    /// Sample order of the most recent epoch.
    const std::vector<Eigen::Index>& order() const { return order_; }

    /// One update on `batch`; returns the objective value before the update.
    double step(const Matrix& batch, std::size_t batch_index = 0) {
        RegResult eval = evaluate_objective(config_.objective, batch, params_, config_.activation, corruption_rng_);
        if (!std::isfinite(eval.value)) throw TrainingError(epoch_, batch_index, "objective is not finite");
        if (!eval.grads.finite()) throw TrainingError(epoch_, batch_index, "gradient is not finite");
        sgd_momentum_update(params_, eval.grads, velocity_, config_.learning_rate, config_.momentum,
                            config_.constraint);
        ++steps_;
        return eval.value;
    }

    void run_epoch(const StepObserver& observer = {}) {
        shuffle_rng_.shuffle(order_);
        const std::size_t total = order_.size();
        const std::size_t bs = static_cast<std::size_t>(config_.batch_size);
        Matrix batch;
        std::size_t index = 0;
        for (std::size_t start = 0; start < total; start += bs, ++index) {
            const std::size_t count = std::min(bs, total - start);
            batch.resize(static_cast<Eigen::Index>(count), data_.dim());
            for (std::size_t k = 0; k < count; ++k)
                batch.row(static_cast<Eigen::Index>(k)) = data_.samples.row(order_[start + k]);
            step(batch, index);
            if (observer) observer(*this, epoch_, index);
        }
        ++epoch_;
    }

    EpochRecord evaluate() const { return evaluate_epoch(config_, data_, params_, epoch_); }

private:
    TrainConfig config_;
    const Dataset& data_;
    ModelParams params_;
    Velocity velocity_;
    Rng shuffle_rng_;
    Rng corruption_rng_;
    std::vector<Eigen::Index> order_;
    int epoch_ = 0;
    std::size_t steps_ = 0;
};

/// Trains for config.epochs epochs, recording full-data metrics after each.
inline TrainHistory train(const TrainConfig& config, const Dataset& data, const Trainer::StepObserver& observer = {}) {
    Trainer trainer(config, data);
    TrainHistory history;
    history.records.reserve(static_cast<std::size_t>(config.epochs));
    for (int e = 0; e < config.epochs; ++e) {
        trainer.run_epoch(observer);
        EpochRecord rec = trainer.evaluate();
        if (!std::isfinite(rec.recon_loss))
            throw TrainingError(e, 0, "full-data reconstruction loss is not finite");
        history.records.push_back(std::move(rec));
    }
    history.final_params = trainer.params();
    return history;
}

}  // namespace sparse_ae

#endif  // SPARSE_AE_OPTIMIZER_HPP
