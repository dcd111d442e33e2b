#pragma once

#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "equiplan/net.hpp"
#include "equiplan/sampler.hpp"

namespace equiplan {

struct EbmExample {
  Eigen::VectorXd scene;
  Eigen::VectorXd target;  // in [-1, 1]^d
};

struct EbmTrainConfig {
  int epochs = 1000;
  double learning_rate = 1e-2;
  int negatives = 256;  // M uniform negatives per example
  // Fresh negatives every epoch; otherwise one draw is reused throughout.
  bool resample_negatives = true;
  std::uint64_t seed = 0;
};

struct EbmTrainResult {
  std::vector<double> loss_trace;  // per epoch, before the update
};

// InfoNCE loss  E(s, v+) + log(exp(-E(s, v+)) + sum_j exp(-E(s, v_j))),
// averaged over the dataset; `grad` receives the parameter gradient if given.
double infonce_loss(const EquivariantMLP& model, const std::vector<EbmExample>& data,
                    const std::vector<Eigen::MatrixXd>& negatives, Eigen::VectorXd* grad);

// Full-batch gradient descent with a fixed step. The model maps
// [scene; target] to a scalar energy. Throws kDivergence naming the epoch if
// the loss stops being finite, kEmptyInput on an empty dataset.
EbmTrainResult train_ebm_infonce(EquivariantMLP& model, const std::vector<EbmExample>& data,
                                 const EbmTrainConfig& cfg);

// argmin_v E(scene, v) over the box [-1, 1]^d using the sampling planner.
Eigen::VectorXd infer_argmin(const EquivariantMLP& model, const Rep& scene_rep,
                             const Rep& target_rep, const Eigen::VectorXd& scene,
                             const SamplerConfig& cfg, std::uint64_t stream = 0);

void write_loss_csv(const std::vector<double>& trace, std::ostream& out);

}  // namespace equiplan
