#include "equiplan/envs.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "equiplan/error.hpp"

namespace equiplan {

ClipMode clip_mode_from_string(const std::string& s) {
  if (s == "auto") return ClipMode::kAuto;
  if (s == "box") return ClipMode::kBox;
  if (s == "norm") return ClipMode::kNorm;
  if (s == "none") return ClipMode::kNone;
  throw Error(ErrorCode::kConfig, "unknown clip mode '" + s + "'");
}

const char* to_string(ClipMode mode) {
  switch (mode) {
    case ClipMode::kAuto: return "auto";
    case ClipMode::kBox: return "box";
    case ClipMode::kNorm: return "norm";
    case ClipMode::kNone: return "none";
  }
  return "unknown";
}

Eigen::VectorXd clip_action(const Rep& rep, const Eigen::VectorXd& a, double bound,
                            ClipMode mode) {
  if (a.size() != rep.dim()) throw Error(ErrorCode::kDimensionMismatch, "clip_action: size");
  if (mode == ClipMode::kNone) return a;
  Eigen::VectorXd out = a;
  for (const auto& block : rep.blocks()) {
    auto seg = out.segment(block.offset, block.dim);
    bool box = mode == ClipMode::kBox;
    if (mode == ClipMode::kAuto) box = rep_block(rep, block).is_signed_permutation();
    if (box) {
      seg = seg.cwiseMax(-bound).cwiseMin(bound);
    } else {
      const double n = seg.norm();
      if (n > bound) seg *= bound / n;
    }
  }
  return out;
}

GeometricMDP::GeometricMDP(std::string name, Rep rep_state, Rep rep_action, double action_bound,
                           double dt, int horizon_cap)
    : name_(std::move(name)),
      rep_state_(std::move(rep_state)),
      rep_action_(std::move(rep_action)),
      action_bound_(action_bound),
      dt_(dt),
      horizon_cap_(horizon_cap) {
  if (rep_state_.group()->name() != rep_action_.group()->name())
    throw Error(ErrorCode::kGroupMismatch, "state and action reps over different groups");
  if (!(action_bound_ > 0) || !(dt_ > 0) || horizon_cap_ < 1)
    throw Error(ErrorCode::kConfig, name_ + ": bound, dt and horizon_cap must be positive");
}

Eigen::VectorXd GeometricMDP::sample_action(Rng& rng) const {
  return clip_action(rep_action_, rng.uniform_vector(action_dim(), -action_bound_, action_bound_),
                     action_bound_, ClipMode::kAuto);
}

void GeometricMDP::check_sizes(const Eigen::VectorXd& s, const Eigen::VectorXd& a) const {
  if (s.size() != state_dim() || a.size() != action_dim())
    throw Error(ErrorCode::kDimensionMismatch, name_ + ": state/action size mismatch");
}

namespace {

Eigen::VectorXd uniform_in_ball(Rng& rng, int dim, double radius) {
  Eigen::VectorXd d = rng.normal_vector(dim);
  d.normalize();
  return d * radius * std::pow(rng.uniform(0.0, 1.0), 1.0 / dim);
}

// CCW rotation by phi in the usual orientation.
Eigen::Vector2d rotate(const Eigen::Vector2d& v, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  return {c * v(0) - s * v(1), s * v(0) + c * v(1)};
}

class PointMass final : public GeometricMDP {
 public:
  PointMass(const PointMassParams& p, Rep rep_state, Rep rep_action)
      : GeometricMDP(p.n_balls > 1 ? "pointmass" + std::to_string(p.dim) + "d-" +
                                         std::to_string(p.n_balls) + "ball"
                                   : "pointmass" + std::to_string(p.dim) + "d",
                     std::move(rep_state), std::move(rep_action), p.action_bound, p.dt,
                     p.horizon_cap),
        p_(p) {}

  Eigen::VectorXd transition(const Eigen::VectorXd& s, const Eigen::VectorXd& a) const override {
    check_sizes(s, a);
    Eigen::VectorXd next(s.size());
    const int d = p_.dim;
    for (int b = 0; b < p_.n_balls; ++b) {
      const auto pos = s.segment(2 * d * b, d);
      const auto vel = s.segment(2 * d * b + d, d);
      const Eigen::VectorXd v = vel + a.segment(d * b, d) * dt();
      next.segment(2 * d * b, d) = pos + v * dt();
      next.segment(2 * d * b + d, d) = v;
    }
    return next;
  }

  double reward(const Eigen::VectorXd& s, const Eigen::VectorXd& a) const override {
    check_sizes(s, a);
    return goal_reached(s) ? 1.0 : -mean_distance(s);
  }

  double terminal_value(const Eigen::VectorXd& s) const override {
    return p_.terminal_weight == 0.0 ? 0.0 : -p_.terminal_weight * mean_distance(s);
  }

  bool goal_reached(const Eigen::VectorXd& s) const override {
    for (int b = 0; b < p_.n_balls; ++b)
      if (s.segment(2 * p_.dim * b, p_.dim).norm() > p_.target_radius) return false;
    return true;
  }

  Eigen::VectorXd sample_start(Rng& rng) const override {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(state_dim());
    for (int b = 0; b < p_.n_balls; ++b)
      s.segment(2 * p_.dim * b, p_.dim) = uniform_in_ball(rng, p_.dim, p_.start_radius);
    return s;
  }

  Eigen::VectorXd sample_state(Rng& rng) const override {
    Eigen::VectorXd s = rng.normal_vector(state_dim());
    return s * 0.3;
  }

 private:
  double mean_distance(const Eigen::VectorXd& s) const {
    double total = 0;
    for (int b = 0; b < p_.n_balls; ++b) total += s.segment(2 * p_.dim * b, p_.dim).norm();
    return total / p_.n_balls;
  }

  PointMassParams p_;
};

class Reacher final : public GeometricMDP {
 public:
  Reacher(const ReacherParams& p, Rep rep_state, Rep rep_action)
      : GeometricMDP(p.local_frame ? "reacher-local" : "reacher-global", std::move(rep_state),
                     std::move(rep_action), p.action_bound, p.dt, p.horizon_cap),
        p_(p) {}

  Eigen::VectorXd transition(const Eigen::VectorXd& s, const Eigen::VectorXd& a) const override {
    check_sizes(s, a);
    ReacherJoints j = reacher_decode(p_, s);
    const Eigen::Vector2d tip = reacher_tip(p_, j);
    j.w1 += dt() * (p_.torque_gain * a(0) - p_.damping * j.w1);
    j.w2 += dt() * (p_.torque_gain * a(1) - p_.damping * j.w2);
    j.u1 = rotate(j.u1, dt() * j.w1);
    const Eigen::Vector2d q2 = rotate(Eigen::Vector2d(j.c2, j.s2), dt() * j.w2);
    j.c2 = q2(0);
    j.s2 = q2(1);
    j.offset += tip - reacher_tip(p_, j);
    return reacher_encode(p_, j);
  }

  double reward(const Eigen::VectorXd& s, const Eigen::VectorXd& a) const override {
    check_sizes(s, a);
    const double d = offset(s).norm();
    return d < p_.goal_radius ? 1.0 : -d;
  }

  double terminal_value(const Eigen::VectorXd& s) const override {
    return p_.terminal_weight == 0.0 ? 0.0 : -p_.terminal_weight * offset(s).norm();
  }

  bool goal_reached(const Eigen::VectorXd& s) const override {
    return offset(s).norm() < p_.goal_radius;
  }

  Eigen::VectorXd sample_start(Rng& rng) const override {
    ReacherJoints j;
    const double q1 = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const double q2 = rng.uniform(-std::numbers::pi, std::numbers::pi);
    j.u1 = {std::cos(q1), std::sin(q1)};
    j.c2 = std::cos(q2);
    j.s2 = std::sin(q2);
    const double reach = p_.link1 + p_.link2;
    const double r = rng.uniform(0.25 * reach, 0.9 * reach);
    const double phi = rng.uniform(-std::numbers::pi, std::numbers::pi);
    j.offset = r * Eigen::Vector2d(std::cos(phi), std::sin(phi)) - reacher_tip(p_, j);
    return reacher_encode(p_, j);
  }

  Eigen::VectorXd sample_state(Rng& rng) const override {
    ReacherJoints j;
    const double q1 = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const double q2 = rng.uniform(-std::numbers::pi, std::numbers::pi);
    j.u1 = {std::cos(q1), std::sin(q1)};
    j.c2 = std::cos(q2);
    j.s2 = std::sin(q2);
    j.w1 = rng.normal();
    j.w2 = rng.normal();
    j.offset = 0.2 * Eigen::Vector2d(rng.normal(), rng.normal());
    return reacher_encode(p_, j);
  }

 private:
  Eigen::Vector2d offset(const Eigen::VectorXd& s) const { return s.tail<2>(); }

  ReacherParams p_;
};

}  // namespace

EnvPtr make_pointmass(const PointMassParams& p) {
  if (p.n_balls < 1) throw Error(ErrorCode::kConfig, "pointmass needs n_balls >= 1");
  if (p.dim != 2 && p.dim != 3) throw Error(ErrorCode::kConfig, "pointmass dim must be 2 or 3");
  if (!(p.target_radius > 0)) throw Error(ErrorCode::kConfig, "target_radius must be positive");
  const GroupPtr g = group_by_name(p.group);
  const Rep std = rep_standard(g);
  if (std.dim() != p.dim)
    throw Error(ErrorCode::kConfig,
                "group " + p.group + " acts in dimension " + std::to_string(std.dim()));
  return std::make_shared<PointMass>(p, rep_copies(std, 2 * p.n_balls), rep_copies(std, p.n_balls));
}

EnvPtr make_reacher(const ReacherParams& p) {
  const GroupPtr g = group_by_name(p.group);
  const Rep std = rep_standard(g);
  if (std.dim() != 2) throw Error(ErrorCode::kConfig, "reacher needs a planar group");
  const Rep sign = rep_sign(g);
  const Rep state = p.local_frame
                        ? rep_direct_sum({std, rep_trivial(g), sign, sign, sign, std})
                        : rep_direct_sum({std, std, sign, sign, std});
  return std::make_shared<Reacher>(p, state, rep_direct_sum({sign, sign}));
}

ReacherJoints reacher_decode(const ReacherParams& p, const Eigen::VectorXd& s) {
  ReacherJoints j;
  j.u1 = s.head<2>();
  if (p.local_frame) {
    j.c2 = s(2);
    j.s2 = s(3);
    j.w1 = s(4);
    j.w2 = s(5);
  } else {
    // second link direction from the tip, then its angle relative to u1
    const Eigen::Vector2d u2 = (s.segment<2>(2) - p.link1 * j.u1) / p.link2;
    j.c2 = j.u1.dot(u2);
    j.s2 = j.u1(0) * u2(1) - j.u1(1) * u2(0);
    j.w1 = s(4);
    j.w2 = s(5);
  }
  j.offset = s.tail<2>();
  return j;
}

Eigen::Vector2d reacher_tip(const ReacherParams& p, const ReacherJoints& j) {
  const Eigen::Vector2d u2(j.c2 * j.u1(0) - j.s2 * j.u1(1), j.c2 * j.u1(1) + j.s2 * j.u1(0));
  return p.link1 * j.u1 + p.link2 * u2;
}

Eigen::VectorXd reacher_encode(const ReacherParams& p, const ReacherJoints& j) {
  Eigen::VectorXd s(8);
  s.head<2>() = j.u1;
  if (p.local_frame) {
    s(2) = j.c2;
    s(3) = j.s2;
  } else {
    s.segment<2>(2) = reacher_tip(p, j);
  }
  s(4) = j.w1;
  s(5) = j.w2;
  s.tail<2>() = j.offset;
  return s;
}

Trajectory rollout(const GeometricMDP& env, const Eigen::VectorXd& s0,
                   const std::vector<Eigen::VectorXd>& actions) {
  if (s0.size() != env.state_dim())
    throw Error(ErrorCode::kDimensionMismatch, "rollout: start state size");
  Trajectory traj;
  traj.states.reserve(actions.size() + 1);
  traj.states.push_back(s0);
  for (std::size_t t = 0; t < actions.size(); ++t) {
    const Eigen::VectorXd& s = traj.states.back();
    traj.rewards.push_back(env.reward(s, actions[t]));
    Eigen::VectorXd next = env.transition(s, actions[t]);
    if (!next.allFinite() || !std::isfinite(traj.rewards.back()))
      throw Error(ErrorCode::kNumeric, env.name() + ": non-finite value at step " + std::to_string(t));
    traj.actions.push_back(actions[t]);
    traj.states.push_back(std::move(next));
  }
  return traj;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  const auto sd = traj.states.empty() ? 0 : traj.states.front().size();
  const auto ad = traj.actions.empty() ? 0 : traj.actions.front().size();
  out << "step";
  for (Eigen::Index k = 0; k < sd; ++k) out << ",s" << k;
  for (Eigen::Index k = 0; k < ad; ++k) out << ",a" << k;
  out << ",reward\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << ',' << buf;
  };
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    out << t;
    for (Eigen::Index k = 0; k < sd; ++k) put(traj.states[t](k));
    const bool has_action = t < traj.actions.size();
    for (Eigen::Index k = 0; k < ad; ++k) {
      if (has_action) put(traj.actions[t](k));
      else out << ',';
    }
    if (has_action) put(traj.rewards[t]);
    else out << ',';
    out << '\n';
  }
}

SymmetryReport check_symmetry(const GeometricMDP& env, int pairs, Rng& rng) {
  SymmetryReport rep;
  rep.pairs = pairs;
  const Rep& rs = env.rep_state();
  const Rep& ra = env.rep_action();
  for (int i = 0; i < pairs; ++i) {
    const Eigen::VectorXd s = env.sample_state(rng);
    const Eigen::VectorXd a = env.sample_action(rng);
    const Eigen::VectorXd next = env.transition(s, a);
    const double r = env.reward(s, a);
    const double tv = env.terminal_value(s);
    for (Element g = 0; g < env.group()->order(); ++g) {
      const Eigen::VectorXd gs = act(rs, g, s);
      const Eigen::VectorXd ga = act(ra, g, a);
      rep.transition_error = std::max(
          rep.transition_error, (env.transition(gs, ga) - act(rs, g, next)).cwiseAbs().maxCoeff());
      rep.reward_error = std::max(rep.reward_error, std::abs(env.reward(gs, ga) - r));
      rep.terminal_error = std::max(rep.terminal_error, std::abs(env.terminal_value(gs) - tv));
    }
  }
  return rep;
}

}  // namespace equiplan
