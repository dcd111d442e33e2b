#include "equiplan/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "equiplan/error.hpp"

namespace equiplan {

PlannerMode planner_mode_from_string(const std::string& s) {
  if (s == "cem") return PlannerMode::kCem;
  if (s == "mppi") return PlannerMode::kMppi;
  throw Error(ErrorCode::kConfig, "unknown planner mode '" + s + "'");
}

const char* to_string(PlannerMode mode) { return mode == PlannerMode::kCem ? "cem" : "mppi"; }

void validate(const SamplerConfig& cfg, int group_order) {
  const auto fail = [](const std::string& msg) { throw Error(ErrorCode::kConfig, "sampler: " + msg); };
  if (cfg.n_samples < 1) fail("n_samples must be >= 1");
  if (cfg.n_iters < 1) fail("n_iters must be >= 1");
  if (cfg.horizon < 1) fail("horizon must be >= 1");
  if (!(cfg.init_std > 0)) fail("init_std must be positive");
  if (!(cfg.min_std >= 0)) fail("min_std must be non-negative");
  if (!(cfg.gamma > 0 && cfg.gamma <= 1)) fail("gamma must lie in (0, 1]");
  if (!(cfg.temperature >= 0)) fail("temperature must be non-negative");
  const long pool = static_cast<long>(cfg.n_samples) * (cfg.augment ? group_order : 1);
  if (cfg.n_elites < 1 || cfg.n_elites > pool) fail("n_elites must lie in [1, candidate count]");
}

nlohmann::json to_json(const SamplerConfig& cfg) {
  return {{"mode", to_string(cfg.mode)},   {"n_samples", cfg.n_samples},
          {"n_elites", cfg.n_elites},      {"n_iters", cfg.n_iters},
          {"horizon", cfg.horizon},        {"init_mean", cfg.init_mean},
          {"init_std", cfg.init_std},      {"min_std", cfg.min_std},
          {"temperature", cfg.temperature}, {"gamma", cfg.gamma},
          {"augment", cfg.augment},        {"clip", to_string(cfg.clip)},
          {"seed", cfg.seed}};
}

ActionSeq act_sequence(const Rep& rep_action, Element g, const ActionSeq& seq) {
  if (seq.rows() != rep_action.dim())
    throw Error(ErrorCode::kDimensionMismatch, "action sequence rows != action dim");
  return rep_action.matrix(g) * seq;
}

double compute_return(const Trajectory& traj,
                      const std::function<double(const Eigen::VectorXd&)>& terminal, double gamma) {
  double total = 0;
  double discount = 1;
  for (std::size_t t = 0; t < traj.rewards.size(); ++t) {
    if (!std::isfinite(traj.rewards[t]))
      throw Error(ErrorCode::kNumeric, "non-finite reward at step " + std::to_string(t));
    total += discount * traj.rewards[t];
    discount *= gamma;
  }
  const double tail = terminal ? terminal(traj.states.back()) : 0.0;
  if (!std::isfinite(tail)) throw Error(ErrorCode::kNumeric, "non-finite terminal value");
  return total + discount * tail;
}

CandidateSet g_sample(const std::vector<ActionSeq>& base, const GroupSpec& group,
                      const Rep& rep_action) {
  CandidateSet set;
  set.base = base;
  set.candidates.reserve(base.size() * group.order());
  for (std::size_t i = 0; i < base.size(); ++i)
    for (Element g = 0; g < group.order(); ++g)
      set.candidates.push_back({static_cast<int>(i), g, act_sequence(rep_action, g, base[i]), 0.0});
  return set;
}

CandidateSet plain_sample(const std::vector<ActionSeq>& base) {
  CandidateSet set;
  set.base = base;
  set.candidates.reserve(base.size());
  for (std::size_t i = 0; i < base.size(); ++i)
    set.candidates.push_back({static_cast<int>(i), 0, base[i], 0.0});
  return set;
}

namespace {

// Values this close (relative to 1 + |v|) are rounding-level ties. Invariant
// scorers built from piecewise-linear layers tie exactly, in real arithmetic,
// on candidate pairs mirrored about an axis the state lies close to.
constexpr double kValueTieTolerance = 1e-12;
// Key coordinates this close compare equal, so keys of orbit-related inputs
// order the same way despite rounding in the group action.
constexpr double kKeyTolerance = 1e-9;

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) < b(i) - kKeyTolerance) return true;
    if (a(i) > b(i) + kKeyTolerance) return false;
  }
  return false;
}

Eigen::VectorXd flat(const ActionSeq& a) { return Eigen::Map<const Eigen::VectorXd>(a.data(), a.size()); }

// Smallest member of the candidate's orbit.
Eigen::VectorXd canonical_key(const Rep& rep_action, const ActionSeq& a) {
  Eigen::VectorXd best = flat(a);
  for (Element g = 1; g < rep_action.group()->order(); ++g) {
    Eigen::VectorXd moved = flat(rep_action.matrix(g) * a);
    if (lex_less(moved, best)) best = std::move(moved);
  }
  return best;
}

// Smallest image of the (state, candidate) pair. Distinguishes members of one
// orbit unless the state has a non-trivial stabilizer.
Eigen::VectorXd joint_key(const Rep& rep_state, const Eigen::VectorXd& s, const Rep& rep_action,
                          const ActionSeq& a) {
  Eigen::VectorXd best;
  for (Element g = 0; g < rep_action.group()->order(); ++g) {
    Eigen::VectorXd moved(s.size() + a.size());
    moved << rep_state.matrix(g) * s, flat(rep_action.matrix(g) * a);
    if (g == 0 || lex_less(moved, best)) best = std::move(moved);
  }
  return best;
}

}  // namespace

std::vector<int> rank_candidates(const CandidateSet& set, const Rep& rep_action,
                                 const Eigen::VectorXd* state, const Rep* rep_state) {
  const auto& c = set.candidates;
  std::vector<int> order(c.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return c[a].value > c[b].value; });

  std::vector<std::optional<Eigen::VectorXd>> keys(c.size()), joint(c.size());
  const auto key = [&](int i) -> const Eigen::VectorXd& {
    if (!keys[i]) keys[i] = canonical_key(rep_action, c[i].actions);
    return *keys[i];
  };
  const auto jkey = [&](int i) -> const Eigen::VectorXd& {
    if (!joint[i]) joint[i] = joint_key(*rep_state, *state, rep_action, c[i].actions);
    return *joint[i];
  };
  const bool use_state = state && rep_state;
  const auto tie_less = [&](int a, int b) {
    if (c[a].orbit_id != c[b].orbit_id) return c[a].orbit_id < c[b].orbit_id;
    if (lex_less(key(a), key(b))) return true;
    if (lex_less(key(b), key(a))) return false;
    if (use_state) {
      if (lex_less(jkey(a), jkey(b))) return true;
      if (lex_less(jkey(b), jkey(a))) return false;
    }
    return c[a].element_id < c[b].element_id;
  };
  // reorder each run of tied values by the secondary keys
  for (std::size_t lo = 0; lo < order.size();) {
    const double lead = c[order[lo]].value;
    const double floor = lead - kValueTieTolerance * (1.0 + std::abs(lead));
    std::size_t hi = lo + 1;
    while (hi < order.size() && c[order[hi]].value >= floor) ++hi;
    if (hi - lo > 1) std::stable_sort(order.begin() + static_cast<long>(lo), order.begin() + static_cast<long>(hi), tie_less);
    lo = hi;
  }
  return order;
}

const Candidate& select_best(const CandidateSet& set, const Rep& rep_action) {
  if (set.candidates.empty()) throw Error(ErrorCode::kEmptyInput, "select_best on an empty set");
  return set.candidates[rank_candidates(set, rep_action).front()];
}

void EnvScorer::score(const Eigen::VectorXd& s0, CandidateSet& set, double gamma) const {
  const GeometricMDP& env = *env_;
  if (s0.size() != env.state_dim()) throw Error(ErrorCode::kDimensionMismatch, "scorer: state size");
  for (auto& cand : set.candidates) {
    Eigen::VectorXd s = s0;
    double total = 0;
    double discount = 1;
    for (Eigen::Index t = 0; t < cand.actions.cols(); ++t) {
      const Eigen::VectorXd a = cand.actions.col(t);
      total += discount * env.reward(s, a);
      s = env.transition(s, a);
      discount *= gamma;
    }
    total += discount * env.terminal_value(s);
    if (!std::isfinite(total))
      throw Error(ErrorCode::kNumeric, env.name() + ": non-finite return for candidate (" +
                                           std::to_string(cand.orbit_id) + ", " +
                                           std::to_string(cand.element_id) + ")");
    cand.value = total;
  }
}

EnergyScorer::EnergyScorer(const EquivariantMLP& net, Rep rep_state, Rep rep_action, double bound)
    : net_(net), rep_state_(std::move(rep_state)), rep_action_(std::move(rep_action)), bound_(bound) {
  if (net_.rep_in().dim() != rep_state_.dim() + rep_action_.dim() || net_.rep_out().dim() != 1)
    throw Error(ErrorCode::kDimensionMismatch, "energy net must map [state; action] to a scalar");
}

void EnergyScorer::score(const Eigen::VectorXd& s0, CandidateSet& set, double /*gamma*/) const {
  const int ds = rep_state_.dim();
  const int da = rep_action_.dim();
  if (s0.size() != ds) throw Error(ErrorCode::kDimensionMismatch, "scorer: state size");
  Eigen::MatrixXd x(ds + da, static_cast<Eigen::Index>(set.candidates.size()));
  for (std::size_t i = 0; i < set.candidates.size(); ++i) {
    x.col(static_cast<Eigen::Index>(i)).head(ds) = s0;
    x.col(static_cast<Eigen::Index>(i)).tail(da) = set.candidates[i].actions.col(0);
  }
  const Eigen::MatrixXd e = net_.forward_batch(x);
  for (std::size_t i = 0; i < set.candidates.size(); ++i) {
    const double v = -e(0, static_cast<Eigen::Index>(i));
    if (!std::isfinite(v)) throw Error(ErrorCode::kNumeric, "non-finite energy");
    set.candidates[i].value = v;
  }
}

nlohmann::json PlanDiagnostics::to_json() const {
  nlohmann::json means = nlohmann::json::array();
  for (const auto& m : first_means) means.push_back(std::vector<double>(m.begin(), m.end()));
  return {{"iterations", iterations},     {"collapsed", collapsed},
          {"best_returns", best_returns}, {"elite_returns", elite_returns},
          {"first_means", means},         {"first_stds", first_stds}};
}

Planner::Planner(SamplerConfig cfg) : cfg_(cfg) {}

PlanResult Planner::plan(const SequenceScorer& scorer, const Eigen::VectorXd& s0,
                         std::uint64_t stream, const ActionSeq* warm_mean) const {
  const Rep& rep_a = scorer.rep_action();
  const GroupSpec& group = *rep_a.group();
  validate(cfg_, group.order());
  const int da = rep_a.dim();
  const int h = cfg_.horizon;
  const double bound = scorer.action_bound();

  ActionSeq mean = ActionSeq::Constant(da, h, cfg_.init_mean);
  bool centered = false;
  if (warm_mean) {
    if (warm_mean->rows() != da || warm_mean->cols() != h)
      throw Error(ErrorCode::kDimensionMismatch, "warm-start mean has the wrong shape");
    mean = *warm_mean;
    centered = true;
  }
  Eigen::VectorXd std = Eigen::VectorXd::Constant(h, cfg_.init_std);

  PlanResult result;
  PlanDiagnostics& diag = result.diagnostics;
  for (int iter = 0; iter < cfg_.n_iters; ++iter) {
    Rng rng(cfg_.seed, {stream, static_cast<std::uint64_t>(iter)});
    std::vector<ActionSeq> noise(cfg_.n_samples);
    for (auto& eps : noise) eps = rng.normal_matrix(da, h) * std.asDiagonal();

    CandidateSet set;
    if (!centered) {
      // orbit of the realized sample mu0 + sigma eps
      std::vector<ActionSeq> base;
      for (const auto& eps : noise) base.push_back(mean + eps);
      set = cfg_.augment ? g_sample(base, group, rep_a) : plain_sample(base);
    } else {
      // orbit of the perturbation around the equivariant centre
      set = cfg_.augment ? g_sample(noise, group, rep_a) : plain_sample(noise);
      for (auto& c : set.candidates) c.actions += mean;
    }
    for (auto& c : set.candidates)
      for (Eigen::Index t = 0; t < h; ++t)
        c.actions.col(t) = clip_action(rep_a, c.actions.col(t), bound, cfg_.clip);

    scorer.score(s0, set, cfg_.gamma);
    const std::vector<int> order = rank_candidates(set, rep_a, &s0, &scorer.rep_state());
    const int k = cfg_.n_elites;
    const double best = set.candidates[order.front()].value;

    Eigen::VectorXd w(k);
    std::vector<double> elite_values(k);
    for (int e = 0; e < k; ++e) {
      const double v = set.candidates[order[e]].value;
      elite_values[e] = v;
      w(e) = cfg_.mode == PlannerMode::kMppi ? std::exp(cfg_.temperature * (v - best)) : 1.0;
    }
    w /= w.sum();

    ActionSeq next_mean = ActionSeq::Zero(da, h);
    for (int e = 0; e < k; ++e) next_mean += w(e) * set.candidates[order[e]].actions;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(h);
    for (int e = 0; e < k; ++e)
      var += w(e) * (set.candidates[order[e]].actions - next_mean).colwise().squaredNorm().transpose();
    var /= da;
    mean = std::move(next_mean);
    std = var.cwiseSqrt().cwiseMax(cfg_.min_std);
    centered = true;

    diag.best_returns.push_back(best);
    diag.elite_returns.push_back(std::move(elite_values));
    diag.first_means.push_back(mean.col(0));
    diag.first_stds.push_back(std(0));
    diag.iterations = iter + 1;
    result.best_return = best;
    if (std.maxCoeff() < 1e-8) {
      diag.collapsed = true;
      break;
    }
  }
  result.action = mean.col(0);
  result.mean = std::move(mean);
  return result;
}

ActionSeq shift_mean(const ActionSeq& mean) {
  ActionSeq out(mean.rows(), mean.cols());
  if (mean.cols() > 1) out.leftCols(mean.cols() - 1) = mean.rightCols(mean.cols() - 1);
  out.col(mean.cols() - 1) = mean.col(mean.cols() - 1);
  return out;
}

EquivarianceReport equivariance_error(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& plan,
    const std::vector<Eigen::VectorXd>& states, const Rep& rep_state, const Rep& rep_action) {
  const GroupSpec& group = *rep_state.group();
  EquivarianceReport rep;
  rep.per_element.assign(group.order(), 0.0);
  if (states.empty()) return rep;
  for (const auto& s : states) {
    const Eigen::VectorXd base = plan(s);
    for (Element g = 0; g < group.order(); ++g) {
      const Eigen::VectorXd moved = plan(act(rep_state, g, s));
      const double err = (rep_action.matrix(g).transpose() * moved - base).norm();
      rep.per_element[g] += err / states.size();
      rep.max = std::max(rep.max, err);
    }
  }
  rep.mean = std::accumulate(rep.per_element.begin(), rep.per_element.end(), 0.0) / group.order();
  return rep;
}

}  // namespace equiplan
