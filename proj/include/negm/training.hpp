#ifndef NEGM_TRAINING_HPP
#define NEGM_TRAINING_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "negm/data.hpp"
#include "negm/network.hpp"

namespace negm {

struct TrainingConfig {
    double lambda = 1.0;  // weight of the misalignment term
    int epochs = 20;
    int batch_size = 128;
    double learning_rate = 1e-3;
    enum class Optimizer { Adam, SgdMomentum };
    Optimizer optimizer = Optimizer::Adam;
    double momentum = 0.9;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double cosine_epsilon = 1e-12;  // both denominator floor and sqrt guard
    uint64_t seed = 0;

    std::string hash() const;
};

/// Per-sample gradients of the classification loss w.r.t. the input pixels,
/// shaped like `batch`. Uses a sum-reduced loss so each sample's slot holds
/// exactly its own gradient.
Tensor input_gradients(const TrainedNetwork& net, const Tensor& batch,
                       const std::vector<int>& labels);

/// Mean over the batch of cosine similarity between the candidate's and the
/// (frozen) reference's input gradients. The reference side is a constant;
/// the candidate side is recorded with higher-order taping, so the returned
/// value is differentiable w.r.t. candidate parameters.
Tensor gm_loss(const TrainedNetwork& candidate, const TrainedNetwork& reference,
               const Tensor& batch_x, const std::vector<int>& batch_y,
               double cosine_epsilon = 1e-12);

/// cross-entropy + lambda * gm; equals cross-entropy bit-for-bit when
/// reference is null or lambda == 0
Tensor total_loss(const TrainedNetwork& candidate, const TrainedNetwork* reference,
                  const Tensor& batch_x, const std::vector<int>& batch_y, double lambda,
                  double cosine_epsilon = 1e-12);

/// Builds the combined loss for one batch on `tape`. Exposed for gradient
/// checks; `ref_grads`/`ref_norms` are the precomputed per-sample reference
/// input gradients and their norms (ignored when lambda == 0 or absent).
Value combined_loss_value(Tape& tape, const Genome& g, const ParameterSet& p,
                          const Tensor& batch_x, const std::vector<int>& batch_y, double lambda,
                          const Tensor* ref_grads, const Tensor* ref_norms, double cosine_epsilon,
                          ForwardLeaves& leaves, double* ce_out, double* gm_out);

/// Trains fresh He-initialized parameters for `cfg.epochs` over shuffled
/// mini-batches of the combined loss. Deterministic for a fixed seed; throws
/// TrainingError with epoch/batch/loss diagnostics on non-finite loss.
TrainedNetwork train(const Genome& genome, const Dataset& data, const TrainingConfig& cfg,
                     const TrainedNetwork* reference);

/// Continues training an existing network in place (used for refinement).
void train_more(TrainedNetwork& net, const Dataset& data, const TrainingConfig& cfg,
                const TrainedNetwork* reference);

}  // namespace negm

#endif
