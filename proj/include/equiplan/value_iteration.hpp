#pragma once

#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "equiplan/grid.hpp"

namespace equiplan {

using ValueField = Eigen::MatrixXd;

// T[V](s) = max_a R(s, a) + gamma V(next(s, a))
ValueField bellman_apply(const GridMDP& mdp, const ValueField& v);

// (g V)(rotate_cell(s)) = V(s); negative turns rotate counter-clockwise.
ValueField rotate_field(const ValueField& v, int quarter_turns);

struct ValueIterationResult {
  ValueField values;
  int iterations = 0;
  std::vector<double> deltas;  // sup-norm change per sweep
};

// Sweeps from V = 0 until the sup-norm change drops below tol.
// Throws kNonConvergence after max_iters sweeps.
ValueIterationResult value_iterate(const GridMDP& mdp, double tol, int max_iters);

// Closed form of the optimal values: a cell d moves from the nearest goal is
// worth -(1 - gamma^d) / (1 - gamma); unreachable cells -1 / (1 - gamma).
ValueField shortest_path_values(const GridMDP& mdp);

void write_field_csv(const ValueField& v, std::ostream& out);
void write_trace_csv(const std::vector<double>& deltas, std::ostream& out);

}  // namespace equiplan
