#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "equiplan/envs.hpp"
#include "equiplan/net.hpp"

namespace equiplan {

enum class PlannerMode { kCem, kMppi };

PlannerMode planner_mode_from_string(const std::string& s);
const char* to_string(PlannerMode mode);

struct SamplerConfig {
  PlannerMode mode = PlannerMode::kMppi;
  int n_samples = 64;  // N base samples per iteration
  int n_elites = 16;   // K
  int n_iters = 6;     // J
  int horizon = 10;    // H
  double init_mean = 0.0;  // broadcast over every action entry
  double init_std = 1.0;
  double min_std = 0.01;
  double temperature = 10.0;  // MPPI weight sharpness
  double gamma = 0.99;
  bool augment = true;
  ClipMode clip = ClipMode::kAuto;
  std::uint64_t seed = 0;
};

// Throws kConfig when a field is out of range for `group_order`.
void validate(const SamplerConfig& cfg, int group_order);
nlohmann::json to_json(const SamplerConfig& cfg);

// An action sequence is stored as an action_dim x horizon matrix.
using ActionSeq = Eigen::MatrixXd;

ActionSeq act_sequence(const Rep& rep_action, Element g, const ActionSeq& seq);

struct Candidate {
  int orbit_id = 0;    // index of the base sample
  Element element_id = 0;
  ActionSeq actions;
  double value = 0;    // return; larger is better
};

struct CandidateSet {
  std::vector<Candidate> candidates;
  std::vector<ActionSeq> base;
};

// sum_t gamma^t r_t + gamma^H terminal(s_H). Throws kNumeric on non-finite terms.
double compute_return(const Trajectory& traj, const std::function<double(const Eigen::VectorXd&)>& terminal,
                      double gamma);

// Every base sample transformed by every group element, orbit-major.
CandidateSet g_sample(const std::vector<ActionSeq>& base, const GroupSpec& group, const Rep& rep_action);
// Untransformed candidates (element_id 0).
CandidateSet plain_sample(const std::vector<ActionSeq>& base);

// Ranking: value descending. Values equal up to rounding count as tied and are
// ordered by orbit_id, then the lexicographically smallest member of the
// candidate's orbit, then (given the state) the smallest image of the
// (state, candidate) pair, then element_id.
std::vector<int> rank_candidates(const CandidateSet& set, const Rep& rep_action,
                                 const Eigen::VectorXd* state = nullptr, const Rep* rep_state = nullptr);
const Candidate& select_best(const CandidateSet& set, const Rep& rep_action);

/// Scores batches of action sequences from a start state.
class SequenceScorer {
 public:
  virtual ~SequenceScorer() = default;
  virtual const Rep& rep_state() const = 0;
  virtual const Rep& rep_action() const = 0;
  virtual double action_bound() const = 0;
  // Sets every candidate value; larger is better.
  virtual void score(const Eigen::VectorXd& s0, CandidateSet& set, double gamma) const = 0;
};

// Rolls each sequence through the environment and scores it by its return.
class EnvScorer final : public SequenceScorer {
 public:
  explicit EnvScorer(EnvPtr env) : env_(std::move(env)) {}
  const Rep& rep_state() const override { return env_->rep_state(); }
  const Rep& rep_action() const override { return env_->rep_action(); }
  double action_bound() const override { return env_->action_bound(); }
  void score(const Eigen::VectorXd& s0, CandidateSet& set, double gamma) const override;
  const GeometricMDP& env() const { return *env_; }

 private:
  EnvPtr env_;
};

// Scores the first action of each sequence by -E([s; a]) for an energy
// network with a one-dimensional output.
class EnergyScorer final : public SequenceScorer {
 public:
  EnergyScorer(const EquivariantMLP& net, Rep rep_state, Rep rep_action, double bound);
  const Rep& rep_state() const override { return rep_state_; }
  const Rep& rep_action() const override { return rep_action_; }
  double action_bound() const override { return bound_; }
  void score(const Eigen::VectorXd& s0, CandidateSet& set, double gamma) const override;

 private:
  EquivariantMLP net_;
  Rep rep_state_;
  Rep rep_action_;
  double bound_;
};

struct PlanDiagnostics {
  std::vector<double> best_returns;          // per iteration
  std::vector<std::vector<double>> elite_returns;
  std::vector<Eigen::VectorXd> first_means;  // mean of the first action per iteration
  std::vector<double> first_stds;
  int iterations = 0;
  bool collapsed = false;
  nlohmann::json to_json() const;
};

struct PlanResult {
  Eigen::VectorXd action;
  ActionSeq mean;  // final sampling mean, for warm starts
  double best_return = 0;
  PlanDiagnostics diagnostics;
};

/// Sampling-based planner (CEM or MPPI) with optional group augmentation.
///
/// The first iteration samples mu0 + sigma0 eps; later iterations (and warm
/// starts) sample mu + sigma eps around the refit mean. With augmentation the
/// noisy part is replaced by its whole orbit, so plan(g s) = g plan(s) when
/// the scorer is invariant and K = 1. Noise depends only on (seed, stream,
/// iteration), never on the state.
class Planner {
 public:
  explicit Planner(SamplerConfig cfg);
  const SamplerConfig& config() const { return cfg_; }

  PlanResult plan(const SequenceScorer& scorer, const Eigen::VectorXd& s0, std::uint64_t stream,
                  const ActionSeq* warm_mean = nullptr) const;

 private:
  SamplerConfig cfg_;
};

// Receding-horizon shift: drop the first step, repeat the last.
ActionSeq shift_mean(const ActionSeq& mean);

struct EquivarianceReport {
  std::vector<double> per_element;  // mean over states, indexed by element
  double mean = 0;
  double max = 0;
};

// For each state s and element g: |rho_A(g)^-1 plan(g s) - plan(s)|_2.
EquivarianceReport equivariance_error(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& plan,
                                      const std::vector<Eigen::VectorXd>& states,
                                      const Rep& rep_state, const Rep& rep_action);

}  // namespace equiplan
