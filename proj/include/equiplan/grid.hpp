#pragma once

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace equiplan {

using Cell = std::pair<int, int>;  // (row, col), row 0 at the top

enum GridAction { kUp = 0, kRight = 1, kDown = 2, kLeft = 3 };
inline constexpr std::array<Cell, 4> kGridMoves = {{{-1, 0}, {0, 1}, {1, 0}, {0, -1}}};

// One clockwise quarter turn about the centre of an n x n grid.
Cell rotate_cell(const Cell& cell, int n, int quarter_turns = 1);
// Action taken in the rotated frame: up -> right -> down -> left -> up.
inline int rotate_action(int action, int quarter_turns = 1) {
  return ((action + quarter_turns) % 4 + 4) % 4;
}

/// Deterministic n x n gridworld. Reward is -1 per step until a goal cell is
/// reached; goals are absorbing with reward 0. Moves off the grid or into a
/// wall leave the agent in place. Wall cells are not states and hold value 0.
class GridMDP {
 public:
  int size() const { return n_; }
  double gamma() const { return gamma_; }
  bool is_goal(const Cell& c) const { return goal_(c.first, c.second) != 0; }
  bool is_wall(const Cell& c) const { return wall_(c.first, c.second) != 0; }
  Cell next(const Cell& c, int action) const;
  double reward(const Cell& c, int action) const;
  const Eigen::MatrixXd& reward_map() const { return reward_map_; }

 private:
  friend GridMDP make_grid_mdp(int, const std::vector<Cell>&, double, const std::vector<Cell>&);
  int n_ = 0;
  double gamma_ = 0;
  Eigen::MatrixXi goal_;
  Eigen::MatrixXi wall_;
  Eigen::MatrixXd reward_map_;
};

// n must be odd and gamma in (0, 1). Goals and walls must each be closed
// under quarter turns (kSymmetry otherwise).
GridMDP make_grid_mdp(int n, const std::vector<Cell>& goals, double gamma,
                      const std::vector<Cell>& walls = {});

}  // namespace equiplan
