#include "equiplan/rep.hpp"

#include <cmath>
#include <numbers>

#include "equiplan/error.hpp"

namespace equiplan {

const char* to_string(RepKind kind) {
  switch (kind) {
    case RepKind::kTrivial: return "trivial";
    case RepKind::kStandard2d: return "standard2d";
    case RepKind::kStandard3d: return "standard3d";
    case RepKind::kRegular: return "regular";
    case RepKind::kSign: return "sign";
    case RepKind::kDirectSum: return "direct_sum";
  }
  return "unknown";
}

namespace {

RepKind kind_from_string(const std::string& s) {
  for (RepKind k : {RepKind::kTrivial, RepKind::kStandard2d, RepKind::kStandard3d,
                    RepKind::kRegular, RepKind::kSign, RepKind::kDirectSum})
    if (s == to_string(k)) return k;
  throw Error(ErrorCode::kConfig, "unknown representation kind '" + s + "'");
}

Eigen::Matrix2d rotation2d(double theta) {
  Eigen::Matrix2d r;
  r << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
  return r;
}

Rep single_block(const GroupPtr& group, RepKind kind, std::vector<Eigen::MatrixXd> mats) {
  const int dim = static_cast<int>(mats.front().rows());
  return Rep(group, kind, std::move(mats), {RepBlock{kind, 0, dim}});
}

}  // namespace

Rep::Rep(GroupPtr group, RepKind kind, std::vector<Eigen::MatrixXd> matrices,
         std::vector<RepBlock> blocks)
    : group_(std::move(group)),
      kind_(kind),
      dim_(matrices.empty() ? 0 : static_cast<int>(matrices.front().rows())),
      matrices_(std::move(matrices)),
      blocks_(std::move(blocks)) {
  if (!group_ || static_cast<int>(matrices_.size()) != group_->order())
    throw Error(ErrorCode::kConstruction, "representation needs one matrix per element");
  if (dim_ < 1) throw Error(ErrorCode::kConstruction, "representation dimension must be >= 1");
  for (const auto& m : matrices_)
    if (m.rows() != dim_ || m.cols() != dim_)
      throw Error(ErrorCode::kConstruction, "representation matrices must be square");
}

bool Rep::is_signed_permutation() const {
  for (const auto& m : matrices_) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      int nonzero = 0;
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double a = std::abs(m(r, c));
        if (a > 1e-12) {
          if (std::abs(a - 1.0) > 1e-12) return false;
          ++nonzero;
        }
      }
      if (nonzero != 1) return false;
    }
  }
  return true;
}

Rep rep_trivial(const GroupPtr& group, int copies) {
  if (copies < 1) throw Error(ErrorCode::kConstruction, "trivial rep needs copies >= 1");
  std::vector<Eigen::MatrixXd> mats(group->order(), Eigen::MatrixXd::Identity(copies, copies));
  return single_block(group, RepKind::kTrivial, std::move(mats));
}

Rep rep_standard(const GroupPtr& group) {
  const int order = group->order();
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(order);
  switch (group->family()) {
    case GroupFamily::kCyclic:
    case GroupFamily::kDihedral: {
      const int n = group->family_n();
      const Eigen::Matrix2d flip = Eigen::Vector2d(1.0, -1.0).asDiagonal();
      for (Element g = 0; g < order; ++g) {
        const Eigen::Matrix2d rot = rotation2d(2 * std::numbers::pi * (g % n) / n);
        mats.emplace_back(group->is_reflection(g) ? Eigen::Matrix2d(flip * rot) : rot);
      }
      return single_block(group, RepKind::kStandard2d, std::move(mats));
    }
    case GroupFamily::kOctahedral:
    case GroupFamily::kIcosahedral:
      return single_block(group, RepKind::kStandard3d, group->defining_matrices());
    case GroupFamily::kMatrix:
      break;
  }
  throw Error(ErrorCode::kNoStandardRep, "group " + group->name() + " has no standard rep");
}

Rep rep_regular(const GroupPtr& group) {
  const int n = group->order();
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(n);
  for (Element g = 0; g < n; ++g) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (Element h = 0; h < n; ++h) p(group->compose(g, h), h) = 1.0;
    mats.push_back(std::move(p));
  }
  return single_block(group, RepKind::kRegular, std::move(mats));
}

Rep rep_sign(const GroupPtr& group) {
  std::vector<Eigen::MatrixXd> mats;
  for (Element g = 0; g < group->order(); ++g)
    mats.push_back(Eigen::MatrixXd::Constant(1, 1, group->is_reflection(g) ? -1.0 : 1.0));
  return single_block(group, RepKind::kSign, std::move(mats));
}

Rep rep_direct_sum(const std::vector<Rep>& parts) {
  if (parts.empty()) throw Error(ErrorCode::kEmptyInput, "direct sum of zero parts");
  const GroupPtr& group = parts.front().group();
  int dim = 0;
  std::vector<RepBlock> blocks;
  for (const auto& p : parts) {
    if (p.group() != group && p.group()->name() != group->name())
      throw Error(ErrorCode::kGroupMismatch, "direct sum over different groups");
    for (RepBlock b : p.blocks()) {
      b.offset += dim;
      blocks.push_back(b);
    }
    dim += p.dim();
  }
  std::vector<Eigen::MatrixXd> mats(group->order(), Eigen::MatrixXd::Zero(dim, dim));
  for (Element g = 0; g < group->order(); ++g) {
    int offset = 0;
    for (const auto& p : parts) {
      mats[g].block(offset, offset, p.dim(), p.dim()) = p.matrix(g);
      offset += p.dim();
    }
  }
  return Rep(group, RepKind::kDirectSum, std::move(mats), std::move(blocks));
}

Rep rep_copies(const Rep& rep, int copies) {
  if (copies == 1) return rep;
  return rep_direct_sum(std::vector<Rep>(copies, rep));
}

Rep rep_block(const Rep& rep, const RepBlock& block) {
  if (block.offset < 0 || block.dim < 1 || block.offset + block.dim > rep.dim())
    throw Error(ErrorCode::kDimensionMismatch, "block outside representation");
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(rep.matrices().size());
  for (const auto& m : rep.matrices())
    mats.emplace_back(m.block(block.offset, block.offset, block.dim, block.dim));
  return Rep(rep.group(), block.kind, std::move(mats), {RepBlock{block.kind, 0, block.dim}});
}

Eigen::VectorXd act(const Rep& rep, Element g, const Eigen::VectorXd& v) {
  if (v.size() != rep.dim())
    throw Error(ErrorCode::kDimensionMismatch,
                "act: vector of size " + std::to_string(v.size()) + " on rep of dim " +
                    std::to_string(rep.dim()));
  return rep.matrix(g) * v;
}

Eigen::MatrixXd act_columns(const Rep& rep, Element g, const Eigen::MatrixXd& m) {
  if (m.rows() != rep.dim())
    throw Error(ErrorCode::kDimensionMismatch, "act_columns: row count != rep dim");
  return rep.matrix(g) * m;
}

RepCheck check_rep(const Rep& rep) {
  RepCheck out;
  const auto& group = *rep.group();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(rep.dim(), rep.dim());
  out.identity_error = (rep.matrix(0) - eye).cwiseAbs().maxCoeff();
  for (Element a = 0; a < group.order(); ++a) {
    const auto& ma = rep.matrix(a);
    out.orthogonality_error =
        std::max(out.orthogonality_error, (ma.transpose() * ma - eye).cwiseAbs().maxCoeff());
    for (Element b = 0; b < group.order(); ++b) {
      const double err =
          (rep.matrix(group.compose(a, b)) - ma * rep.matrix(b)).cwiseAbs().maxCoeff();
      out.homomorphism_error = std::max(out.homomorphism_error, err);
    }
  }
  return out;
}

nlohmann::json to_json(const Rep& rep) {
  nlohmann::json mats = nlohmann::json::array();
  for (const auto& m : rep.matrices()) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      std::vector<double> row(m.cols());
      for (Eigen::Index c = 0; c < m.cols(); ++c) row[c] = m(r, c);
      rows.push_back(row);
    }
    mats.push_back(std::move(rows));
  }
  return {{"group", rep.group()->name()},
          {"order", rep.group()->order()},
          {"kind", to_string(rep.kind())},
          {"dim", rep.dim()},
          {"matrices", std::move(mats)}};
}

nlohmann::json rep_structure(const Rep& rep) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : rep.blocks()) blocks.push_back({to_string(b.kind), b.dim});
  return {{"group", rep.group()->name()}, {"blocks", std::move(blocks)}};
}

Rep rep_from_structure(const nlohmann::json& structure) {
  const GroupPtr group = group_by_name(structure.at("group").get<std::string>());
  std::vector<Rep> parts;
  for (const auto& b : structure.at("blocks")) {
    const RepKind kind = kind_from_string(b.at(0).get<std::string>());
    const int dim = b.at(1).get<int>();
    switch (kind) {
      case RepKind::kTrivial: parts.push_back(rep_trivial(group, dim)); break;
      case RepKind::kStandard2d:
      case RepKind::kStandard3d: parts.push_back(rep_standard(group)); break;
      case RepKind::kRegular: parts.push_back(rep_regular(group)); break;
      case RepKind::kSign: parts.push_back(rep_sign(group)); break;
      case RepKind::kDirectSum:
        throw Error(ErrorCode::kConfig, "nested direct sum in structure");
    }
    if (parts.back().dim() != dim)
      throw Error(ErrorCode::kConfig, "structure block dimension mismatch");
  }
  if (parts.size() == 1) return parts.front();
  return rep_direct_sum(parts);
}

}  // namespace equiplan
