#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "equiplan/group.hpp"
#include "equiplan/rep.hpp"
#include "equiplan/rng.hpp"

namespace equiplan {

// How an action vector is pulled back into the feasible set. kAuto uses a box
// on blocks whose matrices are signed permutations and a Euclidean ball on the
// rest, so the feasible set is closed under the group.
enum class ClipMode { kAuto, kBox, kNorm, kNone };

ClipMode clip_mode_from_string(const std::string& s);
const char* to_string(ClipMode mode);

Eigen::VectorXd clip_action(const Rep& rep, const Eigen::VectorXd& a, double bound,
                            ClipMode mode);

/// Deterministic environment whose dynamics commute with a finite group:
/// transition(g s, g a) = g transition(s, a) and reward(g s, g a) = reward(s, a).
class GeometricMDP {
 public:
  GeometricMDP(std::string name, Rep rep_state, Rep rep_action, double action_bound, double dt,
               int horizon_cap);
  virtual ~GeometricMDP() = default;

  const std::string& name() const { return name_; }
  const GroupPtr& group() const { return rep_state_.group(); }
  const Rep& rep_state() const { return rep_state_; }
  const Rep& rep_action() const { return rep_action_; }
  int state_dim() const { return rep_state_.dim(); }
  int action_dim() const { return rep_action_.dim(); }
  double action_bound() const { return action_bound_; }
  double dt() const { return dt_; }
  int horizon_cap() const { return horizon_cap_; }

  virtual Eigen::VectorXd transition(const Eigen::VectorXd& s, const Eigen::VectorXd& a) const = 0;
  virtual double reward(const Eigen::VectorXd& s, const Eigen::VectorXd& a) const = 0;
  // Value credited to the final state of a planning horizon; must be invariant.
  virtual double terminal_value(const Eigen::VectorXd& s) const = 0;
  virtual bool goal_reached(const Eigen::VectorXd& s) const = 0;
  // Episode start state.
  virtual Eigen::VectorXd sample_start(Rng& rng) const = 0;
  // Generic state for symmetry checks (may include non-zero velocities).
  virtual Eigen::VectorXd sample_state(Rng& rng) const = 0;

  Eigen::VectorXd sample_action(Rng& rng) const;

 protected:
  void check_sizes(const Eigen::VectorXd& s, const Eigen::VectorXd& a) const;

 private:
  std::string name_;
  Rep rep_state_;
  Rep rep_action_;
  double action_bound_;
  double dt_;
  int horizon_cap_;
};

using EnvPtr = std::shared_ptr<const GeometricMDP>;

struct PointMassParams {
  std::string group = "D8";
  int dim = 2;
  int n_balls = 1;
  double target_radius = 0.03;
  double dt = 0.02;
  double action_bound = 1.0;
  int horizon_cap = 100;
  double start_radius = 0.3;
  // terminal_value(s) = -terminal_weight * mean ball distance
  double terminal_weight = 0.0;
};

// State per ball: (position - goal, velocity), each a standard-rep block.
// Action per ball: a force in the standard rep. Semi-implicit Euler.
EnvPtr make_pointmass(const PointMassParams& params);

struct ReacherParams {
  std::string group = "D8";
  bool local_frame = true;
  double link1 = 0.12;
  double link2 = 0.12;
  double goal_radius = 0.05;
  double torque_gain = 10.0;
  double damping = 1.0;
  double dt = 0.02;
  double action_bound = 1.0;
  int horizon_cap = 200;
  double terminal_weight = 0.0;
};

// Planar two-link arm. The goal offset (goal - tip) is stored in the state so
// translations never enter the group.
//   local:  u1 (std), cos q2 (trivial), sin q2 (sign), w1, w2 (sign), offset (std)
//   global: u1 (std), tip (std), w1, w2 (sign), offset (std)
// where u1 = (cos q1, sin q1). Torques transform by the sign rep.
EnvPtr make_reacher(const ReacherParams& params);

// Joint-space view of a Reacher state, shared by both encodings.
struct ReacherJoints {
  Eigen::Vector2d u1;     // first link direction
  double c2 = 1, s2 = 0;  // relative angle of the second link
  double w1 = 0, w2 = 0;
  Eigen::Vector2d offset; // goal - tip
};
ReacherJoints reacher_decode(const ReacherParams& params, const Eigen::VectorXd& s);
Eigen::VectorXd reacher_encode(const ReacherParams& params, const ReacherJoints& j);
Eigen::Vector2d reacher_tip(const ReacherParams& params, const ReacherJoints& j);

struct Trajectory {
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> actions;
  std::vector<double> rewards;
  int steps() const { return static_cast<int>(actions.size()); }
};

// Throws kNumeric naming the step if a state becomes non-finite.
Trajectory rollout(const GeometricMDP& env, const Eigen::VectorXd& s0,
                   const std::vector<Eigen::VectorXd>& actions);

void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

struct SymmetryReport {
  double transition_error = 0;
  double reward_error = 0;
  double terminal_error = 0;
  int pairs = 0;
};
// Exhaustive over group elements, `pairs` random (s, a) draws.
SymmetryReport check_symmetry(const GeometricMDP& env, int pairs, Rng& rng);

}  // namespace equiplan
