#include <gtest/gtest.h>

#include <set>

#include "equiplan/error.hpp"
#include "equiplan/sampler.hpp"

using namespace equiplan;

namespace {

// Single-step objective -|a - target|^2 with a one-dimensional dummy state.
class QuadraticScorer final : public SequenceScorer {
 public:
  QuadraticScorer(GroupPtr g, Eigen::VectorXd target)
      : rs_(rep_trivial(g)), ra_(rep_standard(g)), target_(std::move(target)) {}
  const Rep& rep_state() const override { return rs_; }
  const Rep& rep_action() const override { return ra_; }
  double action_bound() const override { return 1.0; }
  void score(const Eigen::VectorXd&, CandidateSet& set, double) const override {
    for (auto& c : set.candidates) c.value = -(c.actions.col(0) - target_).squaredNorm();
  }

 private:
  Rep rs_, ra_;
  Eigen::VectorXd target_;
};

std::vector<ActionSeq> random_base(int n, int da, int h, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ActionSeq> base;
  for (int i = 0; i < n; ++i) base.push_back(rng.normal_matrix(da, h));
  return base;
}

SamplerConfig small_config(PlannerMode mode, int elites) {
  SamplerConfig cfg;
  cfg.mode = mode;
  cfg.n_samples = 8;
  cfg.n_elites = elites;
  cfg.n_iters = 2;
  cfg.horizon = 5;
  cfg.seed = 99;
  return cfg;
}

}  // namespace

TEST(Return, Examples) {
  Trajectory t;
  t.states = {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)};
  t.actions = {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)};
  t.rewards = {0.0, 0.0};
  EXPECT_EQ(compute_return(t, nullptr, 0.9), 0.0);
  t.rewards = {1.0, 1.0};
  EXPECT_EQ(compute_return(t, nullptr, 0.5), 1.5);
  EXPECT_EQ(compute_return(t, [](const Eigen::VectorXd&) { return 4.0; }, 0.5), 2.5);
  t.rewards[1] = std::nan("");
  EXPECT_THROW(compute_return(t, nullptr, 0.5), Error);
}

TEST(Return, InvariantUnderGroup) {
  for (const auto& env : {make_pointmass({.group = "D8"}), make_reacher({.group = "D8"}),
                          make_pointmass({.group = "icosahedral", .dim = 3, .terminal_weight = 2.0})}) {
    SCOPED_TRACE(env->name());
    Rng rng(4);
    const auto terminal = [&](const Eigen::VectorXd& s) { return env->terminal_value(s); };
    for (int i = 0; i < 50; ++i) {
      const Eigen::VectorXd s0 = env->sample_state(rng);
      std::vector<Eigen::VectorXd> actions;
      for (int t = 0; t < 10; ++t) actions.push_back(env->sample_action(rng));
      const double r = compute_return(rollout(*env, s0, actions), terminal, 0.99);
      for (Element g = 0; g < env->group()->order(); ++g) {
        std::vector<Eigen::VectorXd> ga;
        for (const auto& a : actions) ga.push_back(act(env->rep_action(), g, a));
        const double rg = compute_return(rollout(*env, act(env->rep_state(), g, s0), ga), terminal, 0.99);
        EXPECT_NEAR(rg, r, 1e-9);
      }
    }
  }
}

TEST(GSample, SizesAndTags) {
  const auto g = make_dihedral(4);
  const Rep ra = rep_standard(g);
  const auto set = g_sample(random_base(32, 2, 3, 1), *g, ra);
  ASSERT_EQ(set.candidates.size(), 256u);
  EXPECT_EQ(set.candidates[9].orbit_id, 1);
  EXPECT_EQ(set.candidates[9].element_id, 1);
  EXPECT_EQ(set.candidates[8].actions, set.base[1]);

  const auto trivial = make_cyclic(1);
  const auto same = g_sample(random_base(5, 1, 2, 2), *trivial, rep_trivial(trivial));
  ASSERT_EQ(same.candidates.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(same.candidates[i].actions, same.base[i]);
}

TEST(GSample, SetClosedUnderGroup) {
  const auto g = make_octahedral();
  const Rep ra = rep_standard(g);
  const auto set = g_sample(random_base(4, 3, 2, 3), *g, ra);
  const auto quantize = [](const ActionSeq& a) {
    std::vector<long long> key;
    for (Eigen::Index k = 0; k < a.size(); ++k) key.push_back(std::llround(a.data()[k] * 1e11));
    return key;
  };
  std::set<std::vector<long long>> members;
  for (const auto& c : set.candidates) members.insert(quantize(c.actions));
  for (Element e = 0; e < g->order(); ++e)
    for (const auto& c : set.candidates) {
      const ActionSeq moved = act_sequence(ra, e, c.actions);
      // nearest member within 1e-12
      double best = 1e9;
      for (const auto& d : set.candidates) best = std::min(best, (d.actions - moved).cwiseAbs().maxCoeff());
      EXPECT_LT(best, 1e-12);
    }
}

TEST(SelectBest, SingleAndEmpty) {
  const auto g = make_cyclic(4);
  CandidateSet one = plain_sample(random_base(1, 2, 1, 5));
  EXPECT_EQ(&select_best(one, rep_standard(g)), &one.candidates[0]);
  EXPECT_THROW(select_best(CandidateSet{}, rep_standard(g)), Error);
}

TEST(SelectBest, TieBreaking) {
  const auto g = make_cyclic(4);
  const Rep ra = rep_standard(g);
  CandidateSet set = g_sample(random_base(3, 2, 1, 6), *g, ra);
  for (auto& c : set.candidates) c.value = 1.0;
  const auto& best = select_best(set, ra);
  EXPECT_EQ(best.orbit_id, 0);
  set.candidates[7].value = 2.0;
  EXPECT_EQ(select_best(set, ra).orbit_id, 1);
}

TEST(SelectBest, RoundingLevelTiesResolveEquivariantly) {
  // two mirrored members of one orbit tie up to rounding; the state is generic
  const auto g = make_dihedral(8);
  const Rep rep = rep_standard(g);
  const CandidateSet base = g_sample(random_base(4, 2, 1, 7), *g, rep);
  const Eigen::VectorXd s = Eigen::Vector2d(0.9, 0.35);
  const auto value = [](Element e) { return e == 3 ? 1.0 : e == 11 ? 1.0 + 2e-16 : 0.0; };
  CandidateSet at_s = base;
  for (auto& c : at_s.candidates) c.value = c.orbit_id == 0 ? value(c.element_id) : -1.0;
  const int best = rank_candidates(at_s, rep, &s, &rep).front();
  for (Element h = 0; h < g->order(); ++h) {
    // the same set seen from h s: candidate (i, h e) carries the value of (i, e)
    CandidateSet moved = base;
    for (auto& c : moved.candidates)
      c.value = c.orbit_id == 0 ? value(g->compose(g->inverse(h), c.element_id)) : -1.0;
    const Eigen::VectorXd hs = act(rep, h, s);
    const int pick = rank_candidates(moved, rep, &hs, &rep).front();
    EXPECT_LT((moved.candidates[pick].actions - act_sequence(rep, h, at_s.candidates[best].actions)).norm(), 1e-12);
  }
}

TEST(Planner, QuadraticOptimum) {
  for (PlannerMode mode : {PlannerMode::kCem, PlannerMode::kMppi}) {
    const Eigen::Vector2d target(0.3, -0.4);
    QuadraticScorer scorer(make_dihedral(8), target);
    SamplerConfig cfg;
    cfg.mode = mode;
    cfg.n_samples = 64;
    cfg.n_elites = 8;
    cfg.n_iters = 12;
    cfg.horizon = 1;
    cfg.min_std = 1e-3;
    cfg.temperature = 100;
    cfg.seed = 5;
    const auto res = Planner(cfg).plan(scorer, Eigen::VectorXd::Zero(1), 0);
    EXPECT_LT((res.action - target).norm(), 1e-2) << to_string(mode);
  }
}

TEST(Planner, SingleIterationIsSelectBest) {
  const auto env = make_pointmass({.group = "D8"});
  EnvScorer scorer(env);
  SamplerConfig cfg = small_config(PlannerMode::kCem, 1);
  cfg.n_iters = 1;
  cfg.clip = ClipMode::kNone;
  Rng rng(3);
  const Eigen::VectorXd s0 = env->sample_state(rng);
  const auto res = Planner(cfg).plan(scorer, s0, 7);

  Rng noise(cfg.seed, {7, 0});
  std::vector<ActionSeq> base;
  for (int i = 0; i < cfg.n_samples; ++i) base.push_back(noise.normal_matrix(2, cfg.horizon));
  CandidateSet set = g_sample(base, *env->group(), env->rep_action());
  scorer.score(s0, set, cfg.gamma);
  EXPECT_LT((res.action - select_best(set, env->rep_action()).actions.col(0)).norm(), 1e-15);
}

TEST(Planner, Deterministic) {
  const auto env = make_reacher({.group = "D8"});
  EnvScorer scorer(env);
  const SamplerConfig cfg = small_config(PlannerMode::kMppi, 4);
  Rng rng(8);
  const Eigen::VectorXd s0 = env->sample_start(rng);
  const auto a = Planner(cfg).plan(scorer, s0, 3);
  const auto b = Planner(cfg).plan(scorer, s0, 3);
  EXPECT_EQ(a.action, b.action);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.diagnostics.to_json().dump(), b.diagnostics.to_json().dump());
}

TEST(Planner, EquivariantWithAugmentationK1) {
  for (const auto& env : {make_pointmass({.group = "D8"}), make_reacher({.group = "D8"}),
                          make_pointmass({.group = "octahedral", .dim = 3})}) {
    SCOPED_TRACE(env->name());
    EnvScorer scorer(env);
    for (PlannerMode mode : {PlannerMode::kCem, PlannerMode::kMppi}) {
      const Planner planner(small_config(mode, 1));
      Rng rng(11);
      std::vector<Eigen::VectorXd> states;
      for (int i = 0; i < 5; ++i) states.push_back(env->sample_state(rng));
      const auto rep = equivariance_error(
          [&](const Eigen::VectorXd& s) { return planner.plan(scorer, s, 0).action; }, states,
          env->rep_state(), env->rep_action());
      EXPECT_LT(rep.max, 1e-7);
    }
  }
}

TEST(Planner, EquivariantRefitWithManyElites) {
  const auto env = make_pointmass({.group = "D8"});
  EnvScorer scorer(env);
  const Planner planner(small_config(PlannerMode::kMppi, 16));
  Rng rng(12);
  std::vector<Eigen::VectorXd> states;
  for (int i = 0; i < 5; ++i) states.push_back(env->sample_state(rng));
  const auto rep = equivariance_error(
      [&](const Eigen::VectorXd& s) { return planner.plan(scorer, s, 0).action; }, states,
      env->rep_state(), env->rep_action());
  EXPECT_LT(rep.max, 1e-7);
}

TEST(Planner, WarmStartKeepsEquivariance) {
  const auto env = make_pointmass({.group = "D8"});
  EnvScorer scorer(env);
  const Planner planner(small_config(PlannerMode::kMppi, 4));
  Rng rng(13);
  const Eigen::VectorXd s = env->sample_state(rng);
  const auto first = planner.plan(scorer, s, 0);
  const ActionSeq warm = shift_mean(first.mean);
  const Eigen::VectorXd next = env->transition(s, first.action);
  const auto base = planner.plan(scorer, next, 1, &warm);
  for (Element g = 0; g < 16; ++g) {
    const ActionSeq gwarm = act_sequence(env->rep_action(), g, warm);
    const auto moved = planner.plan(scorer, act(env->rep_state(), g, next), 1, &gwarm);
    EXPECT_LT((act(env->rep_action(), g, base.action) - moved.action).norm(), 1e-7);
  }
}

TEST(Planner, WithoutAugmentationNotEquivariant) {
  const auto env = make_pointmass({.group = "D8"});
  EnvScorer scorer(env);
  SamplerConfig cfg = small_config(PlannerMode::kCem, 1);
  cfg.augment = false;
  const Planner planner(cfg);
  Rng rng(14);
  const auto rep = equivariance_error(
      [&](const Eigen::VectorXd& s) { return planner.plan(scorer, s, 0).action; },
      {env->sample_state(rng)}, env->rep_state(), env->rep_action());
  EXPECT_GT(rep.mean, 1e-6);
}

TEST(Planner, ZeroTemperatureMatchesCem) {
  const auto env = make_pointmass({.group = "D8"});
  EnvScorer scorer(env);
  SamplerConfig cem = small_config(PlannerMode::kCem, 8);
  SamplerConfig mppi = cem;
  mppi.mode = PlannerMode::kMppi;
  mppi.temperature = 0.0;
  Rng rng(15);
  const Eigen::VectorXd s = env->sample_state(rng);
  EXPECT_LT((Planner(cem).plan(scorer, s, 2).mean - Planner(mppi).plan(scorer, s, 2).mean).norm(), 1e-14);
}

TEST(Planner, WeightedMeanTransforms) {
  const auto g = make_dihedral(8);
  const Rep ra = rep_standard(g);
  const auto base = random_base(6, 2, 3, 16);
  const Eigen::VectorXd w = Rng(17).uniform_vector(6, 0.1, 1.0);
  ActionSeq mu = ActionSeq::Zero(2, 3);
  for (int i = 0; i < 6; ++i) mu += w(i) * base[i];
  for (Element e = 0; e < 16; ++e) {
    ActionSeq mu_g = ActionSeq::Zero(2, 3);
    for (int i = 0; i < 6; ++i) mu_g += w(i) * act_sequence(ra, e, base[i]);
    EXPECT_LT((mu_g - act_sequence(ra, e, mu)).norm(), 1e-12);
  }
}

TEST(Planner, ConfigValidation) {
  const auto env = make_pointmass({.group = "C4"});
  EnvScorer scorer(env);
  SamplerConfig cfg = small_config(PlannerMode::kCem, 32);
  EXPECT_NO_THROW(Planner(cfg).plan(scorer, Eigen::VectorXd::Zero(4), 0));
  cfg.augment = false;
  EXPECT_THROW(Planner(cfg).plan(scorer, Eigen::VectorXd::Zero(4), 0), Error);
  cfg = small_config(PlannerMode::kCem, 1);
  cfg.horizon = 0;
  EXPECT_THROW(Planner(cfg).plan(scorer, Eigen::VectorXd::Zero(4), 0), Error);
}

TEST(Planner, IdentityGroupHasZeroError) {
  const auto env = make_pointmass({.group = "trivial"});
  EnvScorer scorer(env);
  SamplerConfig cfg = small_config(PlannerMode::kMppi, 4);
  cfg.augment = false;
  const Planner planner(cfg);
  Rng rng(18);
  const auto rep = equivariance_error(
      [&](const Eigen::VectorXd& s) { return planner.plan(scorer, s, 0).action; },
      {env->sample_state(rng), env->sample_state(rng)}, env->rep_state(), env->rep_action());
  EXPECT_EQ(rep.max, 0.0);
}
