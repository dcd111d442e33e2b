#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "equiplan/net.hpp"
#include "equiplan/rep.hpp"

namespace equiplan {

enum class ToyFunction { kTanh, kSquare, kCos };

ToyFunction toy_function_from_string(const std::string& s);
const char* to_string(ToyFunction f);
double apply(ToyFunction f, double z);

// Nodes and weights of the n-point Gauss-Hermite rule for weight exp(-t^2).
struct GaussHermite {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
GaussHermite gauss_hermite(int order);

/// H(x) = E_w[f(w . x)] with w ~ N(0, I_d); invariant under every rotation.
struct ToyEnergy {
  ToyFunction f = ToyFunction::kTanh;
  int dim = 2;
  int quadrature_order = 64;
};

// w . x ~ N(0, |x|^2), so H(x) is a one-dimensional Gaussian expectation.
double truth_H(const ToyEnergy& toy, const Eigen::VectorXd& x);

/// Monte-Carlo estimate (1/M) sum_i f(w_i . x) with stored directions.
struct SampledEstimate {
  ToyFunction f;
  Eigen::MatrixXd omegas;  // dim x M
  double operator()(const Eigen::VectorXd& x) const;
};

SampledEstimate estimate_H(const ToyEnergy& toy, int m, std::uint64_t seed);

/// (1/|G|) sum_g est(rho(g) x)
struct SymmetrizedEstimate {
  SampledEstimate est;
  Rep rep;
  double operator()(const Eigen::VectorXd& x) const;
};

SymmetrizedEstimate symmetrize_estimate(const SampledEstimate& est, const Rep& rep);

struct DominationRow {
  int trial = 0;
  double r = 0;  // orbit-averaged error of the raw estimate
  double l = 0;  // orbit-averaged error of the symmetrized estimate
};

struct DominationReport {
  std::vector<DominationRow> rows;
  int violations = 0;     // rows with l > r + tol
  double worst_excess = 0; // max(l - r)
};

DominationReport domination_check(const ToyEnergy& toy, const Rep& rep, int trials, int m,
                                  std::uint64_t seed, double tol = 1e-12);

/// Policy density pi(a | s).
using PolicyDensity = std::function<double(const Eigen::VectorXd& a, const Eigen::VectorXd& s)>;

// Pi_G[pi](a | s) = (1/|G|) sum_g pi(g a | g s)
PolicyDensity symmetrize_policy(PolicyDensity pi, const Rep& rep_state, const Rep& rep_action);

// Isotropic Gaussian density with mean given by a network of the state.
PolicyDensity gaussian_policy(EquivariantMLP mean_net, double sigma);

// Action grid: n x n points spanning [-1, 1]^2 (columns).
Eigen::MatrixXd action_grid(int n = 21);

// Euclidean distance between two densities evaluated on the grid at state s.
double grid_distance(const PolicyDensity& p, const PolicyDensity& q, const Eigen::VectorXd& s,
                     const Eigen::MatrixXd& grid);

struct PolicyDominationRow {
  int instance = 0;
  double symmetrized = 0;  // D(pi*, Pi_G[pi])
  double averaged = 0;     // (1/|G|) sum_g D(pi*, pi(g . | g .))
};

struct PolicyDominationReport {
  std::vector<PolicyDominationRow> rows;
  int violations = 0;
  double worst_excess = 0;
};

// Random Gaussian policies over a planar action whose means come from random
// plain networks; the reference is the group average of an independent one.
PolicyDominationReport policy_domination_check(const Rep& rep_state, const Rep& rep_action,
                                               int instances, std::uint64_t seed,
                                               double tol = 1e-12);

}  // namespace equiplan
