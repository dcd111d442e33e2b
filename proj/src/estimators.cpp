#include "equiplan/estimators.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "equiplan/error.hpp"
#include "equiplan/rng.hpp"

namespace equiplan {

ToyFunction toy_function_from_string(const std::string& s) {
  if (s == "tanh") return ToyFunction::kTanh;
  if (s == "square") return ToyFunction::kSquare;
  if (s == "cos") return ToyFunction::kCos;
  throw Error(ErrorCode::kConfig, "unknown toy function '" + s + "'");
}

const char* to_string(ToyFunction f) {
  switch (f) {
    case ToyFunction::kTanh: return "tanh";
    case ToyFunction::kSquare: return "square";
    case ToyFunction::kCos: return "cos";
  }
  return "unknown";
}

double apply(ToyFunction f, double z) {
  switch (f) {
    case ToyFunction::kTanh: return std::tanh(z);
    case ToyFunction::kSquare: return z * z;
    case ToyFunction::kCos: return std::cos(z);
  }
  return 0;
}

GaussHermite gauss_hermite(int order) {
  static std::mutex mu;
  static std::map<int, GaussHermite> cache;
  if (order < 1) throw Error(ErrorCode::kConfig, "quadrature order must be >= 1");
  std::lock_guard lock(mu);
  if (auto it = cache.find(order); it != cache.end()) return it->second;
  // Golub-Welsch: eigen-decomposition of the symmetric Jacobi matrix.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  GaussHermite rule{eig.eigenvalues(),
                    std::sqrt(std::numbers::pi) * eig.eigenvectors().row(0).transpose().array().square().matrix()};
  return cache.emplace(order, std::move(rule)).first->second;
}

double truth_H(const ToyEnergy& toy, const Eigen::VectorXd& x) {
  if (x.size() != toy.dim) throw Error(ErrorCode::kDimensionMismatch, "truth_H: dimension");
  const GaussHermite& rule = gauss_hermite(toy.quadrature_order);
  const double scale = std::sqrt(2.0) * x.norm();
  double total = 0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i)
    total += rule.weights(i) * apply(toy.f, scale * rule.nodes(i));
  return total / std::sqrt(std::numbers::pi);
}

double SampledEstimate::operator()(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd z = omegas.transpose() * x;
  double total = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i) total += apply(f, z(i));
  return total / static_cast<double>(z.size());
}

SampledEstimate estimate_H(const ToyEnergy& toy, int m, std::uint64_t seed) {
  if (m < 1) throw Error(ErrorCode::kConfig, "estimate_H needs M >= 1");
  Rng rng(seed);
  return {toy.f, rng.normal_matrix(toy.dim, m)};
}

double SymmetrizedEstimate::operator()(const Eigen::VectorXd& x) const {
  double total = 0;
  const int order = rep.group()->order();
  for (Element g = 0; g < order; ++g) total += est(rep.matrix(g) * x);
  return total / order;
}

SymmetrizedEstimate symmetrize_estimate(const SampledEstimate& est, const Rep& rep) {
  if (rep.dim() != est.omegas.rows())
    throw Error(ErrorCode::kDimensionMismatch, "symmetrize_estimate: rep dimension");
  return {est, rep};
}

DominationReport domination_check(const ToyEnergy& toy, const Rep& rep, int trials, int m,
                                  std::uint64_t seed, double tol) {
  DominationReport report;
  const int order = rep.group()->order();
  for (int t = 0; t < trials; ++t) {
    const SampledEstimate est = estimate_H(toy, m, derive_seed(seed, {static_cast<std::uint64_t>(t), 0}));
    const SymmetrizedEstimate sym = symmetrize_estimate(est, rep);
    Rng rng(seed, {static_cast<std::uint64_t>(t), 1});
    const Eigen::VectorXd x = rng.normal_vector(toy.dim);
    DominationRow row{t, 0, 0};
    for (Element g = 0; g < order; ++g) {
      const Eigen::VectorXd gx = rep.matrix(g) * x;
      const double h = truth_H(toy, gx);
      row.r += std::abs(h - est(gx)) / order;
      row.l += std::abs(h - sym(gx)) / order;
    }
    report.worst_excess = std::max(report.worst_excess, row.l - row.r);
    if (row.l > row.r + tol) ++report.violations;
    report.rows.push_back(row);
  }
  return report;
}

PolicyDensity symmetrize_policy(PolicyDensity pi, const Rep& rep_state, const Rep& rep_action) {
  if (rep_state.group()->name() != rep_action.group()->name())
    throw Error(ErrorCode::kGroupMismatch, "policy reps over different groups");
  return [pi = std::move(pi), rs = rep_state, ra = rep_action](const Eigen::VectorXd& a,
                                                               const Eigen::VectorXd& s) {
    const int order = rs.group()->order();
    double total = 0;
    for (Element g = 0; g < order; ++g) total += pi(ra.matrix(g) * a, rs.matrix(g) * s);
    return total / order;
  };
}

PolicyDensity gaussian_policy(EquivariantMLP mean_net, double sigma) {
  return [net = std::move(mean_net), sigma](const Eigen::VectorXd& a, const Eigen::VectorXd& s) {
    const Eigen::VectorXd mu = net.forward(s);
    const double d = static_cast<double>(a.size());
    const double norm = std::pow(2 * std::numbers::pi * sigma * sigma, -d / 2);
    return norm * std::exp(-(a - mu).squaredNorm() / (2 * sigma * sigma));
  };
}

Eigen::MatrixXd action_grid(int n) {
  Eigen::MatrixXd grid(2, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      grid.col(i * n + j) << -1.0 + 2.0 * i / (n - 1), -1.0 + 2.0 * j / (n - 1);
  return grid;
}

double grid_distance(const PolicyDensity& p, const PolicyDensity& q, const Eigen::VectorXd& s,
                     const Eigen::MatrixXd& grid) {
  double total = 0;
  for (Eigen::Index k = 0; k < grid.cols(); ++k) {
    const double d = p(grid.col(k), s) - q(grid.col(k), s);
    total += d * d;
  }
  return std::sqrt(total);
}

PolicyDominationReport policy_domination_check(const Rep& rep_state, const Rep& rep_action,
                                               int instances, std::uint64_t seed, double tol) {
  if (rep_action.dim() != 2) throw Error(ErrorCode::kDimensionMismatch, "policy grid needs a planar action");
  const GroupPtr& group = rep_state.group();
  const int order = group->order();
  const Eigen::MatrixXd grid = action_grid();
  const double sigma = 0.3;
  const auto random_policy = [&](std::uint64_t stream) {
    auto net = EquivariantMLP::build({rep_state, rep_trivial(group, 16), rep_trivial(group, rep_action.dim())}, false);
    Rng rng(seed, {stream});
    net.init(rng);
    return gaussian_policy(std::move(net), sigma);
  };
  PolicyDominationReport report;
  for (int i = 0; i < instances; ++i) {
    const auto k = static_cast<std::uint64_t>(i);
    const PolicyDensity reference = symmetrize_policy(random_policy(2 * k + 1), rep_state, rep_action);
    const PolicyDensity pi = random_policy(2 * k);
    const PolicyDensity sym = symmetrize_policy(pi, rep_state, rep_action);
    Rng rng(seed, {k, 1000});
    const Eigen::VectorXd s = rng.normal_vector(rep_state.dim());
    PolicyDominationRow row{i, grid_distance(reference, sym, s, grid), 0};
    for (Element g = 0; g < order; ++g) {
      const Rep& ra = rep_action;
      const Rep& rs = rep_state;
      const PolicyDensity moved = [&pi, &ra, &rs, g](const Eigen::VectorXd& a, const Eigen::VectorXd& st) {
        return pi(ra.matrix(g) * a, rs.matrix(g) * st);
      };
      row.averaged += grid_distance(reference, moved, s, grid) / order;
    }
    report.worst_excess = std::max(report.worst_excess, row.symmetrized - row.averaged);
    if (row.symmetrized > row.averaged + tol) ++report.violations;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace equiplan
