#include "equiplan/ebm.hpp"

#include <cmath>
#include <cstdio>

#include "equiplan/error.hpp"

namespace equiplan {

double infonce_loss(const EquivariantMLP& model, const std::vector<EbmExample>& data,
                    const std::vector<Eigen::MatrixXd>& negatives, Eigen::VectorXd* grad) {
  if (data.empty()) throw Error(ErrorCode::kEmptyInput, "InfoNCE on an empty dataset");
  const Eigen::Index ds = data.front().scene.size();
  const Eigen::Index dv = data.front().target.size();
  const Eigen::Index m = negatives.front().cols();
  const Eigen::Index per = m + 1;
  Eigen::MatrixXd x(ds + dv, per * static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Eigen::Index base = per * static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < per; ++j) {
      x.col(base + j).head(ds) = data[i].scene;
      x.col(base + j).tail(dv) = j == 0 ? data[i].target : Eigen::VectorXd(negatives[i].col(j - 1));
    }
  }
  Tape tape;
  const Eigen::MatrixXd e = model.forward_batch(x, grad ? &tape : nullptr);
  Eigen::MatrixXd de = Eigen::MatrixXd::Zero(1, x.cols());
  double loss = 0;
  const double inv_n = 1.0 / static_cast<double>(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Eigen::Index base = per * static_cast<Eigen::Index>(i);
    const Eigen::VectorXd logits = -e.row(0).segment(base, per).transpose();
    const double top = logits.maxCoeff();
    const Eigen::VectorXd w = (logits.array() - top).exp();
    const double z = w.sum();
    loss += (std::log(z) + top - logits(0)) * inv_n;
    // dL/dE_j = [j == positive] - softmax_j
    de.row(0).segment(base, per) = -(w / z).transpose() * inv_n;
    de(0, base) += inv_n;
  }
  if (grad) *grad = model.backward(tape, de).params;
  return loss;
}

EbmTrainResult train_ebm_infonce(EquivariantMLP& model, const std::vector<EbmExample>& data,
                                 const EbmTrainConfig& cfg) {
  if (data.empty()) throw Error(ErrorCode::kEmptyInput, "cannot train on an empty dataset");
  if (cfg.negatives < 1 || cfg.epochs < 0 || !(cfg.learning_rate > 0))
    throw Error(ErrorCode::kConfig, "invalid EBM training config");
  EbmTrainResult res;
  res.loss_trace.reserve(cfg.epochs);
  const Eigen::Index dv = data.front().target.size();
  Eigen::VectorXd grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(cfg.seed, {static_cast<std::uint64_t>(cfg.resample_negatives ? epoch : 0)});
    std::vector<Eigen::MatrixXd> negatives(data.size());
    for (auto& neg : negatives) {
      neg.resize(dv, cfg.negatives);
      for (Eigen::Index k = 0; k < neg.size(); ++k) neg.data()[k] = rng.uniform(-1.0, 1.0);
    }
    const double loss = infonce_loss(model, data, negatives, &grad);
    if (!std::isfinite(loss) || !grad.allFinite())
      throw Error(ErrorCode::kDivergence, "InfoNCE training diverged at epoch " + std::to_string(epoch));
    res.loss_trace.push_back(loss);
    model.set_params(model.params() - cfg.learning_rate * grad);
  }
  return res;
}

Eigen::VectorXd infer_argmin(const EquivariantMLP& model, const Rep& scene_rep,
                             const Rep& target_rep, const Eigen::VectorXd& scene,
                             const SamplerConfig& cfg, std::uint64_t stream) {
  const EnergyScorer scorer(model, scene_rep, target_rep, 1.0);
  SamplerConfig c = cfg;
  c.horizon = 1;
  return Planner(c).plan(scorer, scene, stream).action;
}

void write_loss_csv(const std::vector<double>& trace, std::ostream& out) {
  out << "epoch,loss\n";
  char buf[40];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", trace[i]);
    out << i << ',' << buf << '\n';
  }
}

}  // namespace equiplan
