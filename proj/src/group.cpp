#include "equiplan/group.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "equiplan/error.hpp"

namespace equiplan {
namespace {

std::vector<Element> inverse_from_cayley(const std::vector<Element>& cayley, int order) {
  std::vector<Element> inv(order, -1);
  for (int a = 0; a < order; ++a) {
    for (int b = 0; b < order; ++b) {
      if (cayley[static_cast<std::size_t>(a) * order + b] == 0) {
        inv[a] = b;
        break;
      }
    }
    if (inv[a] < 0) throw Error(ErrorCode::kConstruction, "element without inverse");
  }
  return inv;
}

Eigen::MatrixXd axis_rotation(Eigen::Vector3d axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

int find_match(const std::vector<Eigen::MatrixXd>& elements, const Eigen::MatrixXd& m,
               double tol) {
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if ((elements[i] - m).cwiseAbs().maxCoeff() < tol) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

GroupSpec::GroupSpec(std::string name, GroupFamily family, int family_n,
                     std::vector<Element> cayley, std::vector<Eigen::MatrixXd> defining)
    : name_(std::move(name)),
      family_(family),
      family_n_(family_n),
      order_(static_cast<int>(std::lround(std::sqrt(static_cast<double>(cayley.size()))))),
      cayley_(std::move(cayley)),
      defining_(std::move(defining)) {
  if (order_ < 1 || static_cast<std::size_t>(order_) * order_ != cayley_.size())
    throw Error(ErrorCode::kConstruction, "Cayley table is not square");
  inverse_ = inverse_from_cayley(cayley_, order_);
}

bool GroupSpec::is_reflection(Element a) const {
  return family_ == GroupFamily::kDihedral && a >= family_n_;
}

GroupPtr make_cyclic(int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidOrder, "cyclic group order must be >= 1");
  std::vector<Element> cayley(static_cast<std::size_t>(n) * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) cayley[static_cast<std::size_t>(a) * n + b] = (a + b) % n;
  return std::make_shared<GroupSpec>(n == 1 ? "trivial" : "C" + std::to_string(n),
                                     GroupFamily::kCyclic, n, std::move(cayley),
                                     std::vector<Eigen::MatrixXd>{});
}

GroupPtr make_dihedral(int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidOrder, "dihedral group index must be >= 1");
  const int order = 2 * n;
  std::vector<Element> cayley(static_cast<std::size_t>(order) * order);
  // element (f, k) = s^f r^k;  r^k s = s r^-k
  for (int a = 0; a < order; ++a) {
    const int f1 = a / n, k1 = a % n;
    for (int b = 0; b < order; ++b) {
      const int f2 = b / n, k2 = b % n;
      const int f = f1 ^ f2;
      const int k = (((f2 ? -k1 : k1) + k2) % n + n) % n;
      cayley[static_cast<std::size_t>(a) * order + b] = f * n + k;
    }
  }
  return std::make_shared<GroupSpec>("D" + std::to_string(n), GroupFamily::kDihedral, n,
                                     std::move(cayley), std::vector<Eigen::MatrixXd>{});
}

GroupPtr close_matrix_group(std::string name, GroupFamily family,
                            const std::vector<Eigen::MatrixXd>& generators,
                            int expected_order, double match_tol) {
  if (generators.empty()) throw Error(ErrorCode::kConstruction, "no generators");
  const auto dim = generators.front().rows();
  std::vector<Eigen::MatrixXd> elements{Eigen::MatrixXd::Identity(dim, dim)};
  for (std::size_t head = 0; head < elements.size(); ++head) {
    for (const auto& gen : generators) {
      Eigen::MatrixXd product = elements[head] * gen;
      if (find_match(elements, product, match_tol) < 0) {
        elements.push_back(std::move(product));
        if (static_cast<int>(elements.size()) > expected_order)
          throw Error(ErrorCode::kConstruction,
                      name + ": closure exceeded expected order " +
                          std::to_string(expected_order));
      }
    }
  }
  const int order = static_cast<int>(elements.size());
  if (order != expected_order)
    throw Error(ErrorCode::kConstruction, name + ": closure has order " +
                                              std::to_string(order) + ", expected " +
                                              std::to_string(expected_order));
  std::vector<Element> cayley(static_cast<std::size_t>(order) * order);
  for (int a = 0; a < order; ++a) {
    for (int b = 0; b < order; ++b) {
      const int c = find_match(elements, elements[a] * elements[b], match_tol);
      if (c < 0) throw Error(ErrorCode::kConstruction, name + ": product left the group");
      cayley[static_cast<std::size_t>(a) * order + b] = c;
    }
  }
  return std::make_shared<GroupSpec>(std::move(name), family, 0, std::move(cayley),
                                     std::move(elements));
}

GroupPtr make_octahedral() {
  const double quarter = std::numbers::pi / 2;
  return close_matrix_group("octahedral", GroupFamily::kOctahedral,
                            {axis_rotation({0, 0, 1}, quarter),
                             axis_rotation({1, 0, 0}, quarter)},
                            24);
}

GroupPtr make_icosahedral() {
  // five-fold axis through the vertex (0, 1, phi), three-fold axis through the
  // face spanned by (0, 1, phi), (1, phi, 0), (phi, 0, 1)
  const double phi = std::numbers::phi;
  return close_matrix_group("icosahedral", GroupFamily::kIcosahedral,
                            {axis_rotation({0, 1, phi}, 2 * std::numbers::pi / 5),
                             axis_rotation({1, 1, 1}, 2 * std::numbers::pi / 3)},
                            60);
}

GroupPtr group_by_name(const std::string& name) {
  if (name == "trivial") return make_cyclic(1);
  if (name == "octahedral" || name == "O") return make_octahedral();
  if (name == "icosahedral" || name == "I") return make_icosahedral();
  if (name.size() >= 2 && (name[0] == 'C' || name[0] == 'D')) {
    int n = 0;
    try {
      std::size_t used = 0;
      n = std::stoi(name.substr(1), &used);
      if (used != name.size() - 1) n = 0;
    } catch (const std::exception&) {
      n = 0;
    }
    if (n >= 1) return name[0] == 'C' ? make_cyclic(n) : make_dihedral(n);
  }
  throw Error(ErrorCode::kConfig, "unknown group '" + name + "'");
}

GroupCheck check_group(const GroupSpec& g) {
  GroupCheck out;
  const int n = g.order();
  for (int k = 0; k < n; ++k) {
    if (g.compose(0, k) != k || g.compose(k, 0) != k) out.identity_ok = false;
    if (g.compose(k, g.inverse(k)) != 0) out.inverse_ok = false;
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        if (g.compose(g.compose(a, b), c) != g.compose(a, g.compose(b, c)))
          out.associative = false;
  return out;
}

nlohmann::json to_json(const GroupSpec& g) {
  return {{"name", g.name()},
          {"order", g.order()},
          {"cayley", g.cayley()},
          {"inverse", g.inverse_table()}};
}

}  // namespace equiplan
