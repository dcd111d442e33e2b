// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   acceptance [--cli <path to equiplan>] [--only 1,5,10]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>

#include "equiplan/error.hpp"
#include "equiplan/estimators.hpp"
#include "equiplan/experiments.hpp"
#include "equiplan/run_io.hpp"
#include "equiplan/value_iteration.hpp"
#include "oracles.hpp"

using namespace equiplan;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// The equiv-err run feeds criteria 1 and 2.
struct EquivRun {
  std::string csv;
  double seconds = 0;
};

const EquivRun& equiv_run() {
  static const EquivRun run = [] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto out = run_experiment("equiv-err", resolve_config("equiv-err", {}), 1);
    return EquivRun{out.files.front().second,
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()};
  }();
  return run;
}

Verdict criterion1() {
  const EquivRun& run = equiv_run();
  double worst = 0;
  std::set<std::string> groups;
  std::set<int> counts, seeds;
  for (const auto& r : parse_csv(run.csv)) {
    if (r[1] != "equivariant" || r[2] != "1") continue;
    groups.insert(r[0]);
    counts.insert(std::stoi(r[3]));
    seeds.insert(std::stoi(r[4]));
    worst = std::max(worst, std::stod(r[6]));
  }
  const bool coverage = groups == std::set<std::string>{"D4", "D8"} &&
                        counts == std::set<int>{4, 16, 64, 256} && seeds.size() == 50;
  return {coverage && worst < 1e-7 && run.seconds < 120,
          "max EE over D4/D8, N in {4,16,64,256}, 50 seeds, all g = " + fmt("%.3g", worst) + " (< 1e-7); " +
              fmt("%.1f", run.seconds) + " s (< 120 s)"};
}

Verdict criterion2() {
  std::map<std::string, std::map<int, std::vector<double>>> curves;
  for (const auto& r : parse_csv(equiv_run().csv))
    if (r[2] == "0") curves[r[0] + "/" + r[1]][std::stoi(r[3])].push_back(std::stod(r[5]));
  bool ok = curves.size() == 4;
  std::string detail;
  for (const auto& [name, by_n] : curves) {
    std::vector<double> med;
    for (const auto& [n, v] : by_n) med.push_back(median(v));
    int inversions = 0;
    for (std::size_t i = 1; i < med.size(); ++i) inversions += med[i] >= med[i - 1];
    ok = ok && inversions <= 1;
    detail += name + " medians";
    for (double m : med) detail += " " + fmt("%.3g", m);
    detail += " (" + std::to_string(inversions) + " inversions); ";
  }
  return {ok, detail + "limit 1 inversion"};
}

Verdict criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  int violations = 0, cases = 0;
  double worst = -1;
  std::uint64_t stream = 0;
  for (const char* name : {"C4", "C8", "D4"})
    for (int m : {1, 8, 64}) {
      const auto report = domination_check(ToyEnergy{}, rep_standard(group_by_name(name)), 100, m, 1000 + stream++, 1e-12);
      violations += report.violations;
      cases += static_cast<int>(report.rows.size());
      for (const auto& row : report.rows) worst = std::max(worst, row.l - row.r);
    }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {violations == 0 && cases == 900 && secs < 30,
          std::to_string(violations) + " violations in " + std::to_string(cases) +
              " trials; max(L - R) = " + fmt("%.3g", worst) + "; " + fmt("%.2f", secs) + " s (< 30 s)"};
}

Verdict criterion4() {
  const Rep rep = rep_standard(make_dihedral(4));
  const auto report = policy_domination_check(rep, rep, 100, 2024, 1e-12);
  double worst = -1;
  for (const auto& row : report.rows) worst = std::max(worst, row.symmetrized - row.averaged);
  return {report.violations == 0 && report.rows.size() == 100,
          std::to_string(report.violations) + " violations in " + std::to_string(report.rows.size()) +
              " D4 policies; max excess " + fmt("%.3g", worst)};
}

Verdict criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  const GridMDP mdp = make_grid_mdp(9, {{4, 4}}, 0.9);
  double commutation = 0;
  for (int i = 0; i < 100; ++i) {
    const ValueField v = Rng(77, {static_cast<std::uint64_t>(i)}).normal_matrix(9, 9);
    for (int k = 0; k < 4; ++k)
      commutation = std::max(
          commutation, (rotate_field(bellman_apply(mdp, v), k) - bellman_apply(mdp, rotate_field(v, k))).cwiseAbs().maxCoeff());
  }
  const auto vi = value_iterate(mdp, 1e-12, 10000);
  double invariance = 0;
  for (int k = 1; k < 4; ++k)
    invariance = std::max(invariance, (rotate_field(vi.values, k) - vi.values).cwiseAbs().maxCoeff());
  const Eigen::MatrixXi dist = oracle::grid_distances(mdp);
  double closed = 0;
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 9; ++c)
      closed = std::max(closed, std::abs(vi.values(r, c) - oracle::grid_value(dist(r, c), mdp.gamma())));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {commutation < 1e-12 && invariance < 1e-9 && closed < 1e-8 && secs < 5,
          "commutation " + fmt("%.3g", commutation) + " (< 1e-12), fixed-point invariance " + fmt("%.3g", invariance) +
              " (< 1e-9), BFS closed form " + fmt("%.3g", closed) + " (< 1e-8); " + fmt("%.3f", secs) + " s (< 5 s)"};
}

Verdict criterion6() {
  struct Case {
    EnvPtr env;
    int n_samples;
  };
  const std::vector<Case> cases = {{make_pointmass({.group = "D8"}), 8},
                                   {make_pointmass({.group = "octahedral", .dim = 3}), 4},
                                   {make_pointmass({.group = "icosahedral", .dim = 3}), 4},
                                   {make_reacher({.group = "D8", .local_frame = true}), 8}};
  bool ok = true;
  std::string detail;
  for (const auto& [env, n] : cases) {
    const GeometricMDP& e = *env;
    const auto terminal = [&e](const Eigen::VectorXd& s) { return e.terminal_value(s); };
    double ret_err = 0;
    Rng rng(606);
    for (int i = 0; i < 1000; ++i) {
      const Eigen::VectorXd s0 = e.sample_state(rng);
      std::vector<Eigen::VectorXd> actions;
      for (int t = 0; t < 10; ++t) actions.push_back(e.sample_action(rng));
      const double base = compute_return(rollout(e, s0, actions), terminal, 0.99);
      for (Element g = 0; g < e.group()->order(); ++g) {
        std::vector<Eigen::VectorXd> ga;
        for (const auto& a : actions) ga.push_back(act(e.rep_action(), g, a));
        const double moved = compute_return(rollout(e, act(e.rep_state(), g, s0), ga), terminal, 0.99);
        ret_err = std::max(ret_err, std::abs(moved - base));
      }
    }
    SamplerConfig cfg;
    cfg.n_samples = n;
    cfg.n_elites = 1;
    cfg.n_iters = 3;
    cfg.horizon = 5;
    cfg.seed = 61;
    const Planner planner(cfg);
    const EnvScorer scorer(env);
    std::vector<Eigen::VectorXd> states;
    for (int i = 0; i < 100; ++i) states.push_back(e.sample_state(rng));
    const auto report = equivariance_error([&](const Eigen::VectorXd& s) { return planner.plan(scorer, s, 0).action; },
                                           states, e.rep_state(), e.rep_action());
    ok = ok && ret_err < 1e-9 && report.max < 1e-7;
    detail += e.name() + "/" + e.group()->name() + ": return " + fmt("%.2g", ret_err) + ", planner " +
              fmt("%.2g", report.max) + "; ";
  }
  return {ok, detail + "limits 1e-9 / 1e-7"};
}

Verdict criterion7() {
  double worst_eq = 0, worst_grad = 0;
  int pairings = 0;
  for (const auto& g : {make_cyclic(4), make_cyclic(8), make_dihedral(4), make_dihedral(8), make_octahedral(),
                        make_icosahedral()}) {
    const std::vector<Rep> kinds = {rep_trivial(g), rep_standard(g), rep_regular(g), rep_sign(g),
                                    rep_direct_sum({rep_standard(g), rep_sign(g), rep_trivial(g)})};
    const Rep hidden = rep_direct_sum({rep_regular(g), rep_standard(g), rep_trivial(g, 2), rep_sign(g)});
    for (const Rep& in : kinds)
      for (const Rep& out : kinds) {
        auto net = EquivariantMLP::build({in, hidden, out}, true);
        Rng rng(7000 + static_cast<std::uint64_t>(pairings++));
        net.init(rng);
        Eigen::VectorXd p = net.params();
        p += 0.05 * rng.normal_vector(p.size());  // non-zero gate offsets
        net.set_params(p);
        const Eigen::MatrixXd x = rng.normal_matrix(in.dim(), 100);
        const Eigen::MatrixXd y = net.forward_batch(x);
        for (Element e = 0; e < g->order(); ++e) {
          const Eigen::MatrixXd gy = net.forward_batch(in.matrix(e) * x);
          const Eigen::MatrixXd expected = out.matrix(e) * y;
          for (Eigen::Index c = 0; c < x.cols(); ++c)
            worst_eq = std::max(worst_eq, (gy.col(c) - expected.col(c)).norm() / (1 + y.col(c).norm()));
        }
      }
  }
  // gradients of sum(w .* f(x)) against central differences
  for (const auto& g : {make_dihedral(4), make_cyclic(8), make_octahedral()}) {
    const Rep io = rep_direct_sum({rep_standard(g), rep_trivial(g)});
    const Rep hidden = rep_direct_sum({rep_regular(g), rep_standard(g), rep_sign(g), rep_trivial(g)});
    for (bool eq : {true, false}) {
      auto net = EquivariantMLP::build({io, hidden, hidden, io}, eq);
      Rng rng(eq ? 81 : 82);
      net.init(rng);
      Eigen::VectorXd p0 = net.params() + 0.05 * rng.normal_vector(net.num_params());
      net.set_params(p0);
      const Eigen::MatrixXd x = rng.normal_matrix(io.dim(), 3);
      const Eigen::MatrixXd w = rng.normal_matrix(io.dim(), 3);
      Tape tape;
      net.forward_batch(x, &tape);
      const Gradients grads = net.backward(tape, w);
      const double h = 1e-5;
      const auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(a)); };
      for (Eigen::Index k = 0; k < p0.size(); ++k) {
        Eigen::VectorXd p = p0;
        p(k) += h;
        net.set_params(p);
        const double up = net.forward_batch(x).cwiseProduct(w).sum();
        p(k) -= 2 * h;
        net.set_params(p);
        const double down = net.forward_batch(x).cwiseProduct(w).sum();
        worst_grad = std::max(worst_grad, rel(grads.params(k), (up - down) / (2 * h)));
      }
      net.set_params(p0);
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        Eigen::MatrixXd xp = x;
        xp.data()[k] += h;
        const double up = net.forward_batch(xp).cwiseProduct(w).sum();
        xp.data()[k] -= 2 * h;
        const double down = net.forward_batch(xp).cwiseProduct(w).sum();
        worst_grad = std::max(worst_grad, rel(grads.x.data()[k], (up - down) / (2 * h)));
      }
    }
  }
  return {worst_eq < 1e-8 && worst_grad < 1e-5,
          std::to_string(pairings) + " (group, in, out) pairings: equivariance " + fmt("%.3g", worst_eq) +
              " (< 1e-8); gradient relative error " + fmt("%.3g", worst_grad) + " (< 1e-5)"};
}

Verdict criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto successes = [](const nlohmann::json& user) {
    const auto out = run_experiment("plan", resolve_config("plan", user), 1);
    int ok = 0, max_steps = 0;
    for (const auto& r : parse_csv(out.files.front().second)) {
      const bool hit = r[2] == "1" && std::stoi(r[3]) <= 100;
      ok += hit;
      if (hit) max_steps = std::max(max_steps, std::stoi(r[3]));
    }
    return std::pair{ok, max_steps};
  };
  const auto [ok2, steps2] = successes({{"variants", {"augmented"}}});
  const auto [ok3, steps3] = successes({{"variants", {"augmented"}},
                                        {"env", {{"group", "icosahedral"}, {"dim", 3}}},
                                        {"sampler", {{"n_samples", 4}}}});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {ok2 >= 19 && ok3 >= 18 && secs < 180,
          "PointMass2D/D8 " + std::to_string(ok2) + "/20 (>= 19, slowest " + std::to_string(steps2) +
              " steps), PointMass3D/icosahedral " + std::to_string(ok3) + "/20 (>= 18, slowest " +
              std::to_string(steps3) + " steps); " + fmt("%.1f", secs) + " s (< 180 s)"};
}

Verdict criterion9() {
  const auto out = run_experiment("coordreg", resolve_config("coordreg", {}), 1);
  std::map<std::string, std::pair<double, double>> by_seed;  // eq+aug, plain+plain
  std::string detail;
  for (const auto& r : parse_csv(out.files.front().second)) {
    if (r[1] == "equivariant" && r[2] == "augmented") by_seed[r[0]].first = std::stod(r[4]);
    if (r[1] == "plain" && r[2] == "plain") by_seed[r[0]].second = std::stod(r[4]);
  }
  int wins = 0;
  for (const auto& [seed, v] : by_seed) {
    wins += v.first > v.second;
    detail += "seed " + seed + " " + fmt("%.3f", v.first) + " vs " + fmt("%.3f", v.second) + "; ";
  }
  return {by_seed.size() == 5 && wins >= 4,
          "out-of-quadrant success, equivariant+augmented vs plain+plain: " + detail + std::to_string(wins) +
              "/5 wins (>= 4)"};
}

std::map<std::string, std::string> read_csvs(const fs::path& dir) {
  std::map<std::string, std::string> files;
  if (!fs::is_directory(dir)) return files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".csv") {
      std::ifstream in(entry.path(), std::ios::binary);
      std::ostringstream text;
      text << in.rdbuf();
      files[entry.path().filename().string()] = text.str();
    }
  return files;
}

Verdict criterion10(const std::string& cli) {
  const std::map<std::string, std::string> configs = {
      {"equiv-err", "seeds = 3\nsample_counts = [4, 16]\n"},
      {"plan", "episodes = 2\n[env]\nhorizon_cap = 25\n"},
      {"toy", "trials = 5\n[policy]\ninstances = 5\n"},
      {"value-iter", "random_fields = 5\n"},
      {"coordreg", "seeds = 2\nn_test = 20\n[train]\nepochs = 40\n"}};
  const fs::path root = fs::temp_directory_path() / ("equiplan_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(root);
  bool ok = true;
  std::string detail;
  for (const auto& [cmd, toml] : configs) {
    const fs::path cfg = root / (cmd + ".toml");
    std::ofstream(cfg) << toml;
    std::map<std::string, std::string> runs[2];
    for (int i = 0; i < 2; ++i) {
      const fs::path out = root / (cmd + "_" + std::to_string(i));
      if (!cli.empty()) {
        // second run uses more workers; results must not depend on it
        const std::string line = "\"" + cli + "\" " + cmd + " --config \"" + cfg.string() + "\" --out \"" +
                                 out.string() + "\" --jobs " + std::to_string(1 + 2 * i) + " > /dev/null";
        if (std::system(line.c_str()) != 0) ok = false;
      } else {
        const auto result = run_experiment(cmd, resolve_config(cmd, load_toml_file(cfg)), 1 + 2 * i);
        fs::create_directories(out);
        for (const auto& [name, csv] : result.files) std::ofstream(out / name, std::ios::binary) << csv;
      }
      runs[i] = read_csvs(out);
    }
    const bool same = !runs[0].empty() && runs[0] == runs[1];
    ok = ok && same;
    detail += cmd + (same ? " identical" : " DIFFERS") + " (" + std::to_string(runs[0].size()) + " CSV); ";
  }
  fs::remove_all(root);
  return {ok, detail + (cli.empty() ? "library runs" : "CLI runs") + " with 1 vs 3 jobs"};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) {
      cli = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      std::string item;
      while (std::getline(list, item, ',')) only.insert(std::stoi(item));
    } else {
      std::fprintf(stderr, "usage: acceptance [--cli PATH] [--only 1,2,...]\n");
      return 2;
    }
  }
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"strong equivariance with G-augmented sampling", criterion1},
      {"weak equivariance trend without augmentation", criterion2},
      {"symmetrized estimator domination", criterion3},
      {"policy averaging domination", criterion4},
      {"Bellman operator commutes with rotations", criterion5},
      {"return invariance and planner equivariance at K=1", criterion6},
      {"network equivariance and gradients", criterion7},
      {"planning competence with ground-truth models", criterion8},
      {"coordinate-regression extrapolation", criterion9},
      {"deterministic outputs", [&cli] { return criterion10(cli); }}};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !v.pass;
    std::printf("[%s] %2d %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first, v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
