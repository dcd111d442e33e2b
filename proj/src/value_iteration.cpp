#include "equiplan/value_iteration.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>

#include "equiplan/error.hpp"

namespace equiplan {

ValueField bellman_apply(const GridMDP& mdp, const ValueField& v) {
  const int n = mdp.size();
  if (v.rows() != n || v.cols() != n)
    throw Error(ErrorCode::kDimensionMismatch, "bellman_apply: field shape");
  ValueField out = ValueField::Zero(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const Cell s{r, c};
      if (mdp.is_wall(s)) continue;
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < 4; ++a) {
        const Cell to = mdp.next(s, a);
        best = std::max(best, mdp.reward(s, a) + mdp.gamma() * v(to.first, to.second));
      }
      out(r, c) = best;
    }
  }
  return out;
}

ValueField rotate_field(const ValueField& v, int quarter_turns) {
  if (v.rows() != v.cols()) throw Error(ErrorCode::kDimensionMismatch, "rotate_field: not square");
  const int n = static_cast<int>(v.rows());
  ValueField out(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const Cell to = rotate_cell({r, c}, n, quarter_turns);
      out(to.first, to.second) = v(r, c);
    }
  return out;
}

ValueIterationResult value_iterate(const GridMDP& mdp, double tol, int max_iters) {
  ValueIterationResult res;
  res.values = ValueField::Zero(mdp.size(), mdp.size());
  while (res.iterations < max_iters) {
    ValueField next = bellman_apply(mdp, res.values);
    const double delta = (next - res.values).cwiseAbs().maxCoeff();
    res.values = std::move(next);
    ++res.iterations;
    res.deltas.push_back(delta);
    if (delta < tol) return res;
  }
  throw Error(ErrorCode::kNonConvergence,
              "value iteration did not reach tol within " + std::to_string(max_iters) + " sweeps");
}

ValueField shortest_path_values(const GridMDP& mdp) {
  const int n = mdp.size();
  Eigen::MatrixXi dist = Eigen::MatrixXi::Constant(n, n, -1);
  std::deque<Cell> queue;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      if (mdp.is_goal({r, c})) {
        dist(r, c) = 0;
        queue.push_back({r, c});
      }
  // moves are reversible, so distances from the goals are distances to them
  while (!queue.empty()) {
    const Cell cell = queue.front();
    queue.pop_front();
    for (const Cell& d : kGridMoves) {
      const Cell nb{cell.first + d.first, cell.second + d.second};
      if (nb.first < 0 || nb.first >= n || nb.second < 0 || nb.second >= n) continue;
      if (mdp.is_wall(nb) || dist(nb.first, nb.second) >= 0) continue;
      dist(nb.first, nb.second) = dist(cell.first, cell.second) + 1;
      queue.push_back(nb);
    }
  }
  const double g = mdp.gamma();
  ValueField v = ValueField::Zero(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      if (mdp.is_wall({r, c})) continue;
      const int d = dist(r, c);
      v(r, c) = d < 0 ? -1.0 / (1.0 - g) : -(1.0 - std::pow(g, d)) / (1.0 - g);
    }
  return v;
}

void write_field_csv(const ValueField& v, std::ostream& out) {
  out << "row";
  for (Eigen::Index c = 0; c < v.cols(); ++c) out << ",c" << c;
  out << '\n';
  char buf[40];
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    out << r;
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", v(r, c));
      out << ',' << buf;
    }
    out << '\n';
  }
}

void write_trace_csv(const std::vector<double>& deltas, std::ostream& out) {
  out << "iter,delta\n";
  char buf[40];
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", deltas[i]);
    out << i + 1 << ',' << buf << '\n';
  }
}

}  // namespace equiplan
