#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace equiplan {

// Index of a group element. Element 0 is always the identity.
using Element = int;

enum class GroupFamily { kCyclic, kDihedral, kOctahedral, kIcosahedral, kMatrix };

/// A finite group given by its Cayley table.
///
/// Elements are addressed by index everywhere in the library; matrices only
/// enter through representations. For groups built by closing a set of
/// matrices, the defining matrices are kept so the standard representation can
/// be recovered.
class GroupSpec {
 public:
  GroupSpec(std::string name, GroupFamily family, int family_n,
            std::vector<Element> cayley, std::vector<Eigen::MatrixXd> defining);

  const std::string& name() const { return name_; }
  int order() const { return order_; }
  GroupFamily family() const { return family_; }
  // n for C_n / D_n, 0 otherwise
  int family_n() const { return family_n_; }
  static constexpr Element identity() { return 0; }

  Element compose(Element a, Element b) const {
    return cayley_[static_cast<std::size_t>(a) * order_ + b];
  }
  Element inverse(Element a) const { return inverse_[a]; }

  const std::vector<Element>& cayley() const { return cayley_; }
  const std::vector<Element>& inverse_table() const { return inverse_; }
  const std::vector<Eigen::MatrixXd>& defining_matrices() const { return defining_; }

  // True for the reflections s*r^k of a dihedral group.
  bool is_reflection(Element a) const;

 private:
  std::string name_;
  GroupFamily family_;
  int family_n_;
  int order_;
  std::vector<Element> cayley_;
  std::vector<Element> inverse_;
  std::vector<Eigen::MatrixXd> defining_;
};

using GroupPtr = std::shared_ptr<const GroupSpec>;

GroupPtr make_cyclic(int n);
// Rotations r^k occupy indices [0, n), reflections s*r^k indices [n, 2n).
GroupPtr make_dihedral(int n);
GroupPtr make_octahedral();
GroupPtr make_icosahedral();

// Closes `generators` under multiplication, matching products to known
// elements within `match_tol` (max-abs). Throws kConstruction unless the
// closure has exactly `expected_order` elements.
GroupPtr close_matrix_group(std::string name, GroupFamily family,
                            const std::vector<Eigen::MatrixXd>& generators,
                            int expected_order, double match_tol = 1e-9);

// "C4", "D8", "octahedral" (or "O"), "icosahedral" (or "I"), "trivial".
GroupPtr group_by_name(const std::string& name);

struct GroupCheck {
  bool identity_ok = true;
  bool inverse_ok = true;
  bool associative = true;
  bool ok() const { return identity_ok && inverse_ok && associative; }
};
GroupCheck check_group(const GroupSpec& group);

nlohmann::json to_json(const GroupSpec& group);

}  // namespace equiplan
