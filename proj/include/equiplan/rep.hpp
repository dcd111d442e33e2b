#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "equiplan/group.hpp"

namespace equiplan {

// Irreducible-ish building blocks the library knows how to treat. kSign is the
// one-dimensional determinant representation (+1 rotations, -1 reflections).
enum class RepKind { kTrivial, kStandard2d, kStandard3d, kRegular, kSign, kDirectSum };

const char* to_string(RepKind kind);

// A contiguous coordinate block of a representation that transforms by itself.
struct RepBlock {
  RepKind kind;
  int offset;
  int dim;
};

/// Orthogonal representation of a finite group: one dense dim x dim matrix per
/// element, plus the block structure inherited from direct sums.
class Rep {
 public:
  Rep(GroupPtr group, RepKind kind, std::vector<Eigen::MatrixXd> matrices,
      std::vector<RepBlock> blocks);

  const GroupPtr& group() const { return group_; }
  int dim() const { return dim_; }
  RepKind kind() const { return kind_; }
  const Eigen::MatrixXd& matrix(Element g) const { return matrices_[g]; }
  const std::vector<Eigen::MatrixXd>& matrices() const { return matrices_; }
  const std::vector<RepBlock>& blocks() const { return blocks_; }

  // Every matrix is a signed permutation (box constraints are then invariant).
  bool is_signed_permutation() const;

 private:
  GroupPtr group_;
  RepKind kind_;
  int dim_;
  std::vector<Eigen::MatrixXd> matrices_;
  std::vector<RepBlock> blocks_;
};

Rep rep_trivial(const GroupPtr& group, int copies = 1);
// Rotation k of C_n / D_n maps to [[cos t, sin t], [-sin t, cos t]] with
// t = 2 pi k / n; dihedral reflections s r^k map to diag(1, -1) R(t).
// Octahedral / icosahedral groups return their defining 3x3 rotations.
Rep rep_standard(const GroupPtr& group);
Rep rep_regular(const GroupPtr& group);
Rep rep_sign(const GroupPtr& group);
Rep rep_direct_sum(const std::vector<Rep>& parts);
// n copies of the same representation.
Rep rep_copies(const Rep& rep, int copies);
// The sub-representation living on one block of `rep`.
Rep rep_block(const Rep& rep, const RepBlock& block);

Eigen::VectorXd act(const Rep& rep, Element g, const Eigen::VectorXd& v);
// Applies rep(g) to every column.
Eigen::MatrixXd act_columns(const Rep& rep, Element g, const Eigen::MatrixXd& m);

struct RepCheck {
  double identity_error = 0;      // max |M_e - I|
  double homomorphism_error = 0;  // max |M_ab - M_a M_b|
  double orthogonality_error = 0; // max |M^T M - I|
};
RepCheck check_rep(const Rep& rep);

nlohmann::json to_json(const Rep& rep);

// Structural description (group name + block list) used by checkpoints.
nlohmann::json rep_structure(const Rep& rep);
Rep rep_from_structure(const nlohmann::json& structure);

}  // namespace equiplan
