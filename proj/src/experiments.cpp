#include "equiplan/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "equiplan/csv.hpp"
#include "equiplan/ebm.hpp"
#include "equiplan/error.hpp"
#include "equiplan/estimators.hpp"
#include "equiplan/parallel.hpp"
#include "equiplan/value_iteration.hpp"

namespace equiplan {

using nlohmann::json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvariantViolation: return kExitInvariantViolation;
    case ErrorCode::kNumeric:
    case ErrorCode::kDivergence:
    case ErrorCode::kNonConvergence: return kExitNumericFailure;
    default: return kExitConfigError;
  }
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"equiv-err", "plan", "toy", "value-iter", "coordreg"};
  return names;
}

namespace {

// The sampler keys an experiment exposes; augment and seed are set per run.
json sampler_section(const SamplerConfig& cfg) {
  json j = to_json(cfg);
  j.erase("augment");
  j.erase("seed");
  return j;
}

bool same_kind(const json& def, const json& val) {
  if (def.is_number_float()) return val.is_number();
  if (def.is_number_integer()) return val.is_number_integer();
  if (def.is_boolean()) return val.is_boolean();
  if (def.is_string()) return val.is_string();
  if (def.is_array()) return val.is_array();
  if (def.is_object()) return val.is_object();
  return false;
}

void overlay(json& target, const json& user, const std::string& path) {
  for (const auto& [key, val] : user.items()) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!target.contains(key)) throw Error(ErrorCode::kConfig, "unknown config key '" + where + "'");
    json& def = target[key];
    if (!same_kind(def, val)) throw Error(ErrorCode::kConfig, "config key '" + where + "' has the wrong type");
    if (def.is_object()) {
      overlay(def, val, where);
    } else if (def.is_number_float()) {
      def = val.get<double>();
    } else if (def.is_array() && !def.empty()) {
      for (const auto& item : val)
        if (!same_kind(def.front(), item))
          throw Error(ErrorCode::kConfig, "config key '" + where + "' has an element of the wrong type");
      def = val;
    } else {
      def = val;
    }
  }
}

template <typename T>
T get(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::kConfig, std::string("missing config key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kConfig, std::string("config key '") + key + "' has the wrong type");
  }
}

int positive(const json& j, const char* key) {
  const int v = get<int>(j, key);
  if (v < 1) throw Error(ErrorCode::kConfig, std::string(key) + " must be >= 1");
  return v;
}

std::uint64_t root_seed(const json& cfg) { return get<std::uint64_t>(cfg, "seed"); }

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Scorer network over [state; action] with a scalar output.
EquivariantMLP scorer_net(const Rep& rep_in, int width, int depth, bool equivariant) {
  const GroupPtr& g = rep_in.group();
  const Rep hidden = equivariant ? rep_copies(rep_regular(g), hidden_copies_sqrt_rule(width, g->order()))
                                 : rep_trivial(g, width);
  std::vector<Rep> reps{rep_in};
  for (int l = 0; l < depth; ++l) reps.push_back(hidden);
  reps.push_back(rep_trivial(g));
  return EquivariantMLP::build(reps, equivariant);
}

// ---------------------------------------------------------------- equiv-err

json equiv_err_defaults() {
  SamplerConfig s;
  s.mode = PlannerMode::kCem;
  s.n_elites = 1;
  s.n_iters = 1;
  s.horizon = 1;
  s.init_mean = 2.0;  // off-centre, so plain sampling is not G-invariant in distribution
  s.clip = ClipMode::kNorm;
  return {{"seed", 0},
          {"seeds", 50},
          {"groups", {"D4", "D8"}},
          {"sample_counts", {4, 16, 64, 256}},
          {"width", 32},
          {"depth", 2},
          {"state_scale", 2.0},
          {"action_bound", 1.0},
          {"tolerance", 1e-7},
          {"sampler", sampler_section(s)}};
}

struct EquivRow {
  std::string variant;
  bool augment;
  int n;
  double ee, ee_max;
};

ExperimentOutput run_equiv_err(const json& cfg, int jobs) {
  const std::uint64_t root = root_seed(cfg);
  const int seeds = positive(cfg, "seeds");
  const auto groups = get<std::vector<std::string>>(cfg, "groups");
  const auto counts = get<std::vector<int>>(cfg, "sample_counts");
  const int width = positive(cfg, "width");
  const int depth = positive(cfg, "depth");
  const double scale = get<double>(cfg, "state_scale");
  const double bound = get<double>(cfg, "action_bound");
  const double tol = get<double>(cfg, "tolerance");
  if (groups.empty() || counts.empty()) throw Error(ErrorCode::kConfig, "groups and sample_counts must be non-empty");
  for (int n : counts)
    if (n < 1) throw Error(ErrorCode::kConfig, "sample counts must be >= 1");
  const SamplerConfig base = sampler_from_json(cfg.at("sampler"));

  std::vector<GroupPtr> gs;
  for (const auto& name : groups) gs.push_back(group_by_name(name));

  const int trials = static_cast<int>(gs.size()) * seeds;
  const auto results = parallel_map<std::vector<EquivRow>>(trials, jobs, [&](int t) {
    const int gi = t / seeds;
    const auto si = static_cast<std::uint64_t>(t % seeds);
    const auto gu = static_cast<std::uint64_t>(gi);
    const GroupPtr& g = gs[gi];
    const Rep std = rep_standard(g);
    const Rep rep_in = rep_direct_sum({std, std});
    std::vector<EquivRow> rows;
    const Eigen::VectorXd s = scale * Rng(root, {gu, si, 2}).normal_vector(std.dim());
    for (const bool equivariant : {true, false}) {
      EquivariantMLP net = scorer_net(rep_in, width, depth, equivariant);
      Rng init(root, {gu, si, equivariant ? 0u : 1u});
      net.init(init);
      const EnergyScorer scorer(net, std, std, bound);
      for (const bool augment : {true, false}) {
        for (int n : counts) {
          SamplerConfig sc = base;
          sc.n_samples = n;
          sc.augment = augment;
          sc.seed = derive_seed(root, {gu, si, 3});  // shared by every variant of the trial
          const Planner planner(sc);
          const auto report = equivariance_error(
              [&](const Eigen::VectorXd& x) { return planner.plan(scorer, x, 0).action; }, {s}, std, std);
          rows.push_back({equivariant ? "equivariant" : "plain", augment, n, report.mean, report.max});
        }
      }
    }
    return rows;
  });

  CsvTable table({"group", "scorer", "augment", "N", "seed", "ee", "ee_max"});
  std::map<std::string, std::vector<double>> curves;
  double strong_max = 0;
  for (int t = 0; t < trials; ++t) {
    const std::string& gname = groups[t / seeds];
    for (const auto& r : results[t]) {
      table.add({gname, r.variant, static_cast<long long>(r.augment), static_cast<long long>(r.n),
                 static_cast<long long>(t % seeds), r.ee, r.ee_max});
      curves[gname + "/" + r.variant + "/" + (r.augment ? "augment" : "plain") + "/" + std::to_string(r.n)]
          .push_back(r.ee);
      if (r.variant == "equivariant" && r.augment) strong_max = std::max(strong_max, r.ee_max);
    }
  }

  ExperimentOutput out;
  json medians = json::object();
  for (const auto& gname : groups)
    for (const char* variant : {"equivariant", "plain"})
      for (const char* aug : {"augment", "plain"}) {
        json curve = json::array();
        for (int n : counts) {
          const auto& v = curves[gname + "/" + variant + "/" + aug + "/" + std::to_string(n)];
          curve.push_back({{"N", n}, {"median", median(v)}, {"max", *std::max_element(v.begin(), v.end())}});
        }
        medians[gname][std::string(variant) + "+" + aug] = curve;
      }
  out.summary = {{"rows", table.rows()}, {"strong_max", strong_max}, {"tolerance", tol}, {"curves", medians}};
  if (!(strong_max < tol)) out.exit_code = kExitInvariantViolation;
  out.files.emplace_back("equiv_err.csv", table.str());
  return out;
}

// --------------------------------------------------------------------- plan

json plan_defaults() {
  SamplerConfig s;
  s.n_samples = 16;
  return {{"seed", 0},
          {"episodes", 20},
          {"variants", {"augmented", "plain"}},
          {"env",
           {{"kind", "pointmass"},
            {"group", "D8"},
            {"dim", 2},
            {"n_balls", 1},
            {"local_frame", true},
            {"goal_radius", 0.03},
            {"horizon_cap", 100},
            {"terminal_weight", 0.0}}},
          {"sampler", sampler_section(s)}};
}

ExperimentOutput run_plan(const json& cfg, int jobs) {
  const std::uint64_t root = root_seed(cfg);
  const int episodes = positive(cfg, "episodes");
  const auto variants = get<std::vector<std::string>>(cfg, "variants");
  if (variants.empty()) throw Error(ErrorCode::kConfig, "variants must be non-empty");
  for (const auto& v : variants)
    if (v != "augmented" && v != "plain") throw Error(ErrorCode::kConfig, "unknown plan variant '" + v + "'");
  const EnvPtr env = env_from_json(cfg.at("env"));
  const SamplerConfig base = sampler_from_json(cfg.at("sampler"));
  for (const auto& v : variants) {
    SamplerConfig sc = base;
    sc.augment = v == "augmented";
    validate(sc, env->group()->order());
  }

  const int nv = static_cast<int>(variants.size());
  const auto results = parallel_map<EpisodeResult>(episodes * nv, jobs, [&](int i) {
    const int ep = i / nv;
    const auto eu = static_cast<std::uint64_t>(ep);
    Rng start(root, {eu, 0});
    const Eigen::VectorXd s0 = env->sample_start(start);
    SamplerConfig sc = base;
    sc.augment = variants[i % nv] == "augmented";
    sc.seed = derive_seed(root, {eu, 1});  // paired across variants
    try {
      return run_episode(*env, Planner(sc), s0, 0);
    } catch (const Error& e) {
      throw Error(e.code(), "episode " + std::to_string(ep) + ": " + e.what());
    }
  });

  CsvTable table({"variant", "episode", "success", "steps", "return"});
  CsvTable steps({"variant", "episode", "step", "reward"});
  json per_variant = json::object();
  for (int v = 0; v < nv; ++v) {
    int successes = 0;
    double step_sum = 0;
    for (int ep = 0; ep < episodes; ++ep) {
      const EpisodeResult& r = results[ep * nv + v];
      table.add({variants[v], static_cast<long long>(ep), static_cast<long long>(r.success),
                 static_cast<long long>(r.steps), r.total_return});
      for (std::size_t t = 0; t < r.rewards.size(); ++t)
        steps.add({variants[v], static_cast<long long>(ep), static_cast<long long>(t), r.rewards[t]});
      if (r.success) {
        ++successes;
        step_sum += r.steps;
      }
    }
    per_variant[variants[v]] = {{"successes", successes},
                                {"episodes", episodes},
                                {"mean_steps_on_success", successes ? step_sum / successes : 0.0}};
  }
  ExperimentOutput out;
  out.summary = {{"env", env->name()}, {"group", env->group()->name()}, {"variants", per_variant}};
  out.files.emplace_back("plan.csv", table.str());
  out.files.emplace_back("plan_steps.csv", steps.str());
  return out;
}

// ---------------------------------------------------------------------- toy

json toy_defaults() {
  return {{"seed", 0},
          {"function", "tanh"},
          {"quadrature_order", 64},
          {"trials", 100},
          {"groups", {"C4", "C8", "D4"}},
          {"sample_counts", {1, 8, 64}},
          {"tolerance", 1e-12},
          {"policy", {{"groups", {"D4"}}, {"instances", 100}}}};
}

ExperimentOutput run_toy(const json& cfg, int jobs) {
  const std::uint64_t root = root_seed(cfg);
  const ToyEnergy base{toy_function_from_string(get<std::string>(cfg, "function")), 2,
                       positive(cfg, "quadrature_order")};
  const int trials = positive(cfg, "trials");
  const auto groups = get<std::vector<std::string>>(cfg, "groups");
  const auto counts = get<std::vector<int>>(cfg, "sample_counts");
  const double tol = get<double>(cfg, "tolerance");
  const json& pol = cfg.at("policy");
  const auto policy_groups = get<std::vector<std::string>>(pol, "groups");
  const int instances = positive(pol, "instances");
  for (int m : counts)
    if (m < 1) throw Error(ErrorCode::kConfig, "sample counts must be >= 1");

  const int ng = static_cast<int>(groups.size()), nm = static_cast<int>(counts.size());
  const auto estimator = parallel_map<DominationReport>(ng * nm, jobs, [&](int i) {
    const Rep rep = rep_standard(group_by_name(groups[i / nm]));
    ToyEnergy toy = base;
    toy.dim = rep.dim();
    const auto gu = static_cast<std::uint64_t>(i / nm), mu = static_cast<std::uint64_t>(i % nm);
    return domination_check(toy, rep, trials, counts[i % nm], derive_seed(root, {0, gu, mu}), tol);
  });
  const int np = static_cast<int>(policy_groups.size());
  const auto policy = parallel_map<PolicyDominationReport>(np, jobs, [&](int i) {
    const Rep rep = rep_standard(group_by_name(policy_groups[i]));
    if (rep.dim() != 2) throw Error(ErrorCode::kConfig, "policy groups must act on the plane");
    return policy_domination_check(rep, rep, instances, derive_seed(root, {1, static_cast<std::uint64_t>(i)}), tol);
  });

  CsvTable table({"experiment", "group", "M", "trial", "R", "L", "improvement"});
  int est_violations = 0, pol_violations = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < ng * nm; ++i) {
    for (const auto& r : estimator[i].rows)
      table.add({"estimator", groups[i / nm], static_cast<long long>(counts[i % nm]),
                 static_cast<long long>(r.trial), r.r, r.l, r.r - r.l});
    est_violations += estimator[i].violations;
    worst = std::max(worst, estimator[i].worst_excess);
  }
  for (int i = 0; i < np; ++i) {
    for (const auto& r : policy[i].rows)
      table.add({"policy", policy_groups[i], std::string(), static_cast<long long>(r.instance), r.averaged,
                 r.symmetrized, r.averaged - r.symmetrized});
    pol_violations += policy[i].violations;
    worst = std::max(worst, policy[i].worst_excess);
  }
  ExperimentOutput out;
  out.summary = {{"estimator_violations", est_violations},
                 {"policy_violations", pol_violations},
                 {"worst_excess", worst},
                 {"tolerance", tol}};
  if (est_violations + pol_violations > 0) out.exit_code = kExitInvariantViolation;
  out.files.emplace_back("toy.csv", table.str());
  return out;
}

// --------------------------------------------------------------- value-iter

json value_iter_defaults() {
  return {{"seed", 0},
          {"size", 9},
          {"gamma", 0.9},
          {"goals", json::array({json::array({4, 4})})},
          {"walls", json::array()},
          {"random_fields", 100},
          {"sweep_tolerance", 1e-12},
          {"max_iters", 10000},
          {"tolerances", {{"commutation", 1e-12}, {"fixed_point", 1e-9}, {"closed_form", 1e-8}}}};
}

std::vector<Cell> cells_from_json(const json& j, const char* key) {
  std::vector<Cell> cells;
  for (const auto& c : j.at(key)) {
    if (!c.is_array() || c.size() != 2 || !c[0].is_number_integer() || !c[1].is_number_integer())
      throw Error(ErrorCode::kConfig, std::string(key) + " entries must be [row, col] integer pairs");
    cells.emplace_back(c[0].get<int>(), c[1].get<int>());
  }
  return cells;
}

ExperimentOutput run_value_iter(const json& cfg, int /*jobs*/) {
  const std::uint64_t root = root_seed(cfg);
  const int n = get<int>(cfg, "size");
  const GridMDP mdp = make_grid_mdp(n, cells_from_json(cfg, "goals"), get<double>(cfg, "gamma"),
                                    cells_from_json(cfg, "walls"));
  const int fields = positive(cfg, "random_fields");
  const json& tols = cfg.at("tolerances");

  double commutation = 0;
  for (int i = 0; i < fields; ++i) {
    Rng rng(root, {static_cast<std::uint64_t>(i)});
    ValueField v = rng.normal_matrix(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        if (mdp.is_wall({r, c})) v(r, c) = 0;
    for (int k = 0; k < 4; ++k) {
      const ValueField lhs = rotate_field(bellman_apply(mdp, v), k);
      const ValueField rhs = bellman_apply(mdp, rotate_field(v, k));
      commutation = std::max(commutation, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  }
  const auto vi = value_iterate(mdp, get<double>(cfg, "sweep_tolerance"), positive(cfg, "max_iters"));
  double invariance = 0;
  for (int k = 1; k < 4; ++k)
    invariance = std::max(invariance, (rotate_field(vi.values, k) - vi.values).cwiseAbs().maxCoeff());
  const double closed = (vi.values - shortest_path_values(mdp)).cwiseAbs().maxCoeff();

  CsvTable checks({"check", "value", "tolerance", "pass"});
  bool ok = true;
  const auto check = [&](const char* name, double value, double tol) {
    const bool pass = value < tol;
    ok = ok && pass;
    checks.add({std::string(name), value, tol, static_cast<long long>(pass)});
  };
  check("commutation", commutation, get<double>(tols, "commutation"));
  check("fixed_point_invariance", invariance, get<double>(tols, "fixed_point"));
  check("closed_form", closed, get<double>(tols, "closed_form"));
  checks.add({std::string("iterations"), static_cast<double>(vi.iterations),
              static_cast<double>(get<int>(cfg, "max_iters")), 1LL});

  CsvTable values({"row", "col", "value"});
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) values.add({static_cast<long long>(r), static_cast<long long>(c), vi.values(r, c)});
  CsvTable trace({"iter", "delta"});
  for (std::size_t i = 0; i < vi.deltas.size(); ++i) trace.add({static_cast<long long>(i), vi.deltas[i]});

  ExperimentOutput out;
  out.summary = {{"commutation", commutation},
                 {"fixed_point_invariance", invariance},
                 {"closed_form", closed},
                 {"iterations", vi.iterations},
                 {"pass", ok}};
  if (!ok) out.exit_code = kExitInvariantViolation;
  out.files.emplace_back("value_iter_checks.csv", checks.str());
  out.files.emplace_back("value_iter_values.csv", values.str());
  out.files.emplace_back("value_iter_trace.csv", trace.str());
  return out;
}

// ----------------------------------------------------------------- coordreg

json coordreg_defaults() {
  SamplerConfig s;
  s.mode = PlannerMode::kCem;
  s.init_std = 0.5;
  return {{"seed", 0},
          {"seeds", 5},
          {"group", "D4"},
          {"n_train", 10},
          {"n_test", 500},
          {"distractors", 3},
          {"width", 32},
          {"depth", 2},
          {"threshold", 2.0 / 96.0},
          {"train", {{"epochs", 2000}, {"learning_rate", 1e-2}, {"negatives", 256}, {"resample_negatives", true}}},
          {"inference", sampler_section(s)}};
}

struct CoordRegResult {
  std::vector<double> loss;
  double in_success[2] = {0, 0};  // indexed by augment
  double out_success[2] = {0, 0};
};

ExperimentOutput run_coordreg(const json& cfg, int jobs) {
  const std::uint64_t root = root_seed(cfg);
  const int seeds = positive(cfg, "seeds");
  const GroupPtr g = group_by_name(get<std::string>(cfg, "group"));
  const Rep std = rep_standard(g);
  if (std.dim() != 2) throw Error(ErrorCode::kConfig, "coordreg needs a planar group");
  const int n_train = positive(cfg, "n_train"), n_test = positive(cfg, "n_test");
  const int distractors = get<int>(cfg, "distractors");
  if (distractors < 0) throw Error(ErrorCode::kConfig, "distractors must be >= 0");
  const int width = positive(cfg, "width"), depth = positive(cfg, "depth");
  const double threshold = get<double>(cfg, "threshold");
  const json& tj = cfg.at("train");
  EbmTrainConfig train_cfg{positive(tj, "epochs"), get<double>(tj, "learning_rate"), positive(tj, "negatives"),
                           get<bool>(tj, "resample_negatives"), 0};
  const SamplerConfig inference = sampler_from_json(cfg.at("inference"));
  for (const bool aug : {true, false}) {
    SamplerConfig sc = inference;
    sc.augment = aug;
    validate(sc, g->order());
  }
  const Rep scene_rep = rep_copies(std, 1 + distractors);
  const Rep rep_in = rep_direct_sum({scene_rep, std});

  const auto results = parallel_map<CoordRegResult>(2 * seeds, jobs, [&](int i) {
    const std::uint64_t seed = root + static_cast<std::uint64_t>(i / 2);
    const bool equivariant = i % 2 == 0;
    const CoordRegData data = make_coordreg_data(n_train, n_test, distractors, seed);
    EquivariantMLP net = scorer_net(rep_in, width, depth, equivariant);
    Rng init(seed, {2, equivariant ? 1u : 0u});
    net.init(init);
    EbmTrainConfig tc = train_cfg;
    tc.seed = derive_seed(seed, {3});
    CoordRegResult res;
    try {
      res.loss = train_ebm_infonce(net, data.train, tc).loss_trace;
    } catch (const Error& e) {
      throw Error(e.code(), "seed " + std::to_string(seed) + (equivariant ? " equivariant" : " plain") +
                                " model: " + e.what());
    }
    for (const bool aug : {true, false}) {
      SamplerConfig sc = inference;
      sc.augment = aug;
      sc.seed = derive_seed(seed, {4});
      int in_ok = 0, in_n = 0, out_ok = 0, out_n = 0;
      for (int t = 0; t < n_test; ++t) {
        const EbmExample& ex = data.test[t];
        const Eigen::VectorXd pred = infer_argmin(net, scene_rep, std, ex.scene, sc, static_cast<std::uint64_t>(t));
        const bool hit = (pred - ex.target).norm() <= threshold;
        if (ex.target.minCoeff() < 0) {
          ++out_n;
          out_ok += hit;
        } else {
          ++in_n;
          in_ok += hit;
        }
      }
      res.in_success[aug] = in_n ? static_cast<double>(in_ok) / in_n : 0.0;
      res.out_success[aug] = out_n ? static_cast<double>(out_ok) / out_n : 0.0;
    }
    return res;
  });

  CsvTable table({"seed", "model", "inference", "in_success", "out_success", "final_loss"});
  CsvTable losses({"seed", "model", "epoch", "loss"});
  int wins = 0;
  json per_seed = json::array();
  for (int s = 0; s < seeds; ++s) {
    const auto seed = static_cast<long long>(root + static_cast<std::uint64_t>(s));
    for (int m = 0; m < 2; ++m) {
      const CoordRegResult& r = results[2 * s + m];
      const std::string model = m == 0 ? "equivariant" : "plain";
      for (const bool aug : {true, false})
        table.add({seed, model, std::string(aug ? "augmented" : "plain"), r.in_success[aug], r.out_success[aug],
                   r.loss.back()});
      for (std::size_t e = 0; e < r.loss.size(); ++e)
        losses.add({seed, model, static_cast<long long>(e), r.loss[e]});
    }
    const double eq = results[2 * s].out_success[1], plain = results[2 * s + 1].out_success[0];
    wins += eq > plain;
    per_seed.push_back({{"seed", seed}, {"equivariant_augmented_out", eq}, {"plain_plain_out", plain}});
  }
  ExperimentOutput out;
  out.summary = {{"seeds", seeds}, {"equivariant_wins", wins}, {"threshold", threshold}, {"per_seed", per_seed}};
  out.files.emplace_back("coordreg.csv", table.str());
  out.files.emplace_back("coordreg_loss.csv", losses.str());
  return out;
}

}  // namespace

SamplerConfig sampler_from_json(const json& j) {
  SamplerConfig c;
  if (j.contains("mode")) c.mode = planner_mode_from_string(get<std::string>(j, "mode"));
  if (j.contains("n_samples")) c.n_samples = get<int>(j, "n_samples");
  if (j.contains("n_elites")) c.n_elites = get<int>(j, "n_elites");
  if (j.contains("n_iters")) c.n_iters = get<int>(j, "n_iters");
  if (j.contains("horizon")) c.horizon = get<int>(j, "horizon");
  if (j.contains("init_mean")) c.init_mean = get<double>(j, "init_mean");
  if (j.contains("init_std")) c.init_std = get<double>(j, "init_std");
  if (j.contains("min_std")) c.min_std = get<double>(j, "min_std");
  if (j.contains("temperature")) c.temperature = get<double>(j, "temperature");
  if (j.contains("gamma")) c.gamma = get<double>(j, "gamma");
  if (j.contains("augment")) c.augment = get<bool>(j, "augment");
  if (j.contains("clip")) c.clip = clip_mode_from_string(get<std::string>(j, "clip"));
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed");
  return c;
}

EnvPtr env_from_json(const json& j) {
  const auto kind = get<std::string>(j, "kind");
  if (kind == "pointmass") {
    PointMassParams p;
    p.group = get<std::string>(j, "group");
    p.dim = get<int>(j, "dim");
    p.n_balls = get<int>(j, "n_balls");
    p.target_radius = get<double>(j, "goal_radius");
    p.horizon_cap = positive(j, "horizon_cap");
    p.terminal_weight = get<double>(j, "terminal_weight");
    return make_pointmass(p);
  }
  if (kind == "reacher") {
    ReacherParams p;
    p.group = get<std::string>(j, "group");
    p.local_frame = get<bool>(j, "local_frame");
    p.goal_radius = get<double>(j, "goal_radius");
    p.horizon_cap = positive(j, "horizon_cap");
    p.terminal_weight = get<double>(j, "terminal_weight");
    return make_reacher(p);
  }
  throw Error(ErrorCode::kConfig, "unknown env kind '" + kind + "'");
}

EpisodeResult run_episode(const GeometricMDP& env, const Planner& planner, const Eigen::VectorXd& s0,
                          std::uint64_t stream_base) {
  const EnvScorer scorer(std::shared_ptr<const GeometricMDP>(&env, [](const GeometricMDP*) {}));
  EpisodeResult res;
  Eigen::VectorXd s = s0;
  ActionSeq warm;
  for (int t = 0; t < env.horizon_cap(); ++t) {
    if (env.goal_reached(s)) {
      res.success = true;
      res.steps = t;
      return res;
    }
    const PlanResult plan =
        planner.plan(scorer, s, stream_base + static_cast<std::uint64_t>(t), t == 0 ? nullptr : &warm);
    warm = shift_mean(plan.mean);
    const double r = env.reward(s, plan.action);
    s = env.transition(s, plan.action);
    if (!s.allFinite() || !std::isfinite(r)) throw Error(ErrorCode::kNumeric, "non-finite state at step " + std::to_string(t));
    res.rewards.push_back(r);
    res.total_return += r;
  }
  res.success = env.goal_reached(s);
  res.steps = env.horizon_cap();
  return res;
}

CoordRegData make_coordreg_data(int n_train, int n_test, int distractors, std::uint64_t seed) {
  const auto make = [distractors](std::uint64_t s, int n, double lo) {
    Rng rng(s);
    std::vector<EbmExample> out;
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector2d marker(rng.uniform(lo, 1.0), rng.uniform(lo, 1.0));
      Eigen::VectorXd scene(2 * (1 + distractors));
      scene.head(2) = marker;
      for (Eigen::Index k = 2; k < scene.size(); ++k) scene(k) = rng.uniform(-1.0, 1.0);
      out.push_back({scene, marker});
    }
    return out;
  };
  return {make(derive_seed(seed, {0}), n_train, 0.0), make(derive_seed(seed, {1}), n_test, -1.0)};
}

json default_config(const std::string& command) {
  if (command == "equiv-err") return equiv_err_defaults();
  if (command == "plan") return plan_defaults();
  if (command == "toy") return toy_defaults();
  if (command == "value-iter") return value_iter_defaults();
  if (command == "coordreg") return coordreg_defaults();
  throw Error(ErrorCode::kConfig, "unknown command '" + command + "'");
}

json resolve_config(const std::string& command, const json& user) {
  json resolved = default_config(command);
  if (!user.is_null()) {
    if (!user.is_object()) throw Error(ErrorCode::kConfig, "config must be a table");
    overlay(resolved, user, "");
  }
  return resolved;
}

std::uint64_t config_hash(const json& resolved) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : resolved.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

ExperimentOutput run_experiment(const std::string& command, const json& resolved, int jobs) {
  jobs = std::max(1, jobs);
  if (command == "equiv-err") return run_equiv_err(resolved, jobs);
  if (command == "plan") return run_plan(resolved, jobs);
  if (command == "toy") return run_toy(resolved, jobs);
  if (command == "value-iter") return run_value_iter(resolved, jobs);
  if (command == "coordreg") return run_coordreg(resolved, jobs);
  throw Error(ErrorCode::kConfig, "unknown command '" + command + "'");
}

}  // namespace equiplan
