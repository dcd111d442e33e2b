#include "equiplan/grid.hpp"

#include <string>

#include "equiplan/error.hpp"

namespace equiplan {

Cell rotate_cell(const Cell& cell, int n, int quarter_turns) {
  Cell c = cell;
  for (int k = ((quarter_turns % 4) + 4) % 4; k > 0; --k) c = {c.second, n - 1 - c.first};
  return c;
}

Cell GridMDP::next(const Cell& c, int action) const {
  if (is_goal(c)) return c;
  const Cell to{c.first + kGridMoves[action].first, c.second + kGridMoves[action].second};
  if (to.first < 0 || to.first >= n_ || to.second < 0 || to.second >= n_ || is_wall(to)) return c;
  return to;
}

double GridMDP::reward(const Cell& c, int /*action*/) const { return reward_map_(c.first, c.second); }

namespace {

Eigen::MatrixXi mark(int n, const std::vector<Cell>& cells, const char* what) {
  Eigen::MatrixXi m = Eigen::MatrixXi::Zero(n, n);
  for (const auto& c : cells) {
    if (c.first < 0 || c.first >= n || c.second < 0 || c.second >= n)
      throw Error(ErrorCode::kConfig, std::string(what) + " cell outside the grid");
    m(c.first, c.second) = 1;
  }
  for (const auto& c : cells) {
    const Cell r = rotate_cell(c, n);
    if (!m(r.first, r.second))
      throw Error(ErrorCode::kSymmetry, std::string(what) + " set is not closed under quarter turns");
  }
  return m;
}

}  // namespace

GridMDP make_grid_mdp(int n, const std::vector<Cell>& goals, double gamma,
                      const std::vector<Cell>& walls) {
  if (n < 1 || n % 2 == 0) throw Error(ErrorCode::kConfig, "grid size must be odd and positive");
  if (!(gamma > 0 && gamma < 1)) throw Error(ErrorCode::kConfig, "gamma must lie in (0, 1)");
  if (goals.empty()) throw Error(ErrorCode::kEmptyInput, "grid needs at least one goal cell");
  GridMDP mdp;
  mdp.n_ = n;
  mdp.gamma_ = gamma;
  mdp.goal_ = mark(n, goals, "goal");
  mdp.wall_ = mark(n, walls, "wall");
  if ((mdp.goal_.array() * mdp.wall_.array()).any())
    throw Error(ErrorCode::kConfig, "a cell cannot be both goal and wall");
  mdp.reward_map_ = Eigen::MatrixXd::Constant(n, n, -1.0);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      if (mdp.goal_(r, c) || mdp.wall_(r, c)) mdp.reward_map_(r, c) = 0.0;
  return mdp;
}

}  // namespace equiplan
