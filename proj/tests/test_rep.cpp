#include <gtest/gtest.h>

#include "equiplan/error.hpp"
#include "equiplan/rep.hpp"
#include "equiplan/rng.hpp"

using namespace equiplan;

namespace {

void expect_homomorphism(const Rep& rep, double tol = 1e-10) {
  const auto c = check_rep(rep);
  EXPECT_LT(c.identity_error, tol);
  EXPECT_LT(c.homomorphism_error, tol);
  EXPECT_LT(c.orthogonality_error, tol);
}

}  // namespace

TEST(Rep, AllBuildersAreHomomorphisms) {
  for (const auto& g : {make_cyclic(4), make_cyclic(5), make_dihedral(4), make_dihedral(8),
                        make_octahedral(), make_icosahedral()}) {
    SCOPED_TRACE(g->name());
    expect_homomorphism(rep_trivial(g, 3));
    expect_homomorphism(rep_standard(g));
    expect_homomorphism(rep_regular(g));
    expect_homomorphism(rep_sign(g));
    expect_homomorphism(rep_direct_sum({rep_standard(g), rep_sign(g), rep_regular(g)}));
  }
}

TEST(Rep, StandardRotationConvention) {
  const auto rep = rep_standard(make_cyclic(4));
  // quarter turn: [[cos, sin], [-sin, cos]] at 90 degrees
  EXPECT_NEAR(rep.matrix(1)(0, 1), 1.0, 1e-12);
  EXPECT_NEAR(rep.matrix(1)(1, 0), -1.0, 1e-12);
  const Eigen::Vector2d x = act(rep, 1, Eigen::Vector2d(1.0, 0.0));
  EXPECT_NEAR(x(1), -1.0, 1e-12);
}

TEST(Rep, RegularIsPermutation) {
  const auto g = make_dihedral(3);
  const auto reg = rep_regular(g);
  EXPECT_TRUE(reg.is_signed_permutation());
  EXPECT_FALSE(rep_standard(make_dihedral(8)).is_signed_permutation());
  EXPECT_TRUE(rep_standard(make_cyclic(4)).is_signed_permutation());
  // e_h maps to e_{gh}
  Eigen::VectorXd e = Eigen::VectorXd::Zero(6);
  e(2) = 1;
  EXPECT_EQ(act(reg, 4, e)(g->compose(4, 2)), 1.0);
}

TEST(Rep, SignIsTrivialOnCyclic) {
  const auto s = rep_sign(make_cyclic(6));
  for (int g = 0; g < 6; ++g) EXPECT_EQ(s.matrix(g)(0, 0), 1.0);
  const auto d = rep_sign(make_dihedral(4));
  EXPECT_EQ(d.matrix(5)(0, 0), -1.0);
}

TEST(Rep, StandardMissingForTrivialFamily) {
  auto m = close_matrix_group("M2", GroupFamily::kMatrix, {-Eigen::MatrixXd::Identity(2, 2)}, 2);
  try {
    rep_standard(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoStandardRep);
  }
}

TEST(Rep, DirectSumErrors) {
  try {
    rep_direct_sum({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
  try {
    rep_direct_sum({rep_trivial(make_cyclic(4)), rep_trivial(make_dihedral(4))});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGroupMismatch);
  }
}

TEST(Rep, DirectSumBlocks) {
  const auto g = make_dihedral(4);
  const auto r = rep_direct_sum({rep_standard(g), rep_trivial(g, 2), rep_regular(g)});
  ASSERT_EQ(r.blocks().size(), 3u);
  EXPECT_EQ(r.dim(), 12);
  EXPECT_EQ(r.blocks()[2].offset, 4);
  EXPECT_EQ(r.blocks()[2].kind, RepKind::kRegular);
}

TEST(Rep, ActDimensionMismatch) {
  const auto r = rep_standard(make_cyclic(4));
  try {
    act(r, 1, Eigen::VectorXd::Zero(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(Rep, StructureRoundTrip) {
  const auto g = make_dihedral(8);
  const auto r = rep_direct_sum({rep_standard(g), rep_sign(g), rep_trivial(g, 3)});
  const auto back = rep_from_structure(rep_structure(r));
  ASSERT_EQ(back.dim(), r.dim());
  for (int e = 0; e < g->order(); ++e) EXPECT_TRUE(back.matrix(e).isApprox(r.matrix(e)));
}

TEST(Rep, HalfTurnIsMinusIdentity) {
  const auto rep = rep_standard(make_cyclic(8));
  EXPECT_LT((rep.matrix(4) + Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(rep.matrix(0), Eigen::MatrixXd::Identity(2, 2));
}

TEST(Rep, RegularCharacterOfCyclic) {
  for (int n : {2, 5, 8}) {
    const auto reg = rep_regular(make_cyclic(n));
    for (int g = 0; g < n; ++g) {
      const Eigen::MatrixXd& m = reg.matrix(g);
      EXPECT_EQ(m.trace(), g == 0 ? n : 0);
      EXPECT_EQ(m.colwise().sum(), Eigen::RowVectorXd::Ones(n));
      EXPECT_EQ(m.rowwise().sum(), Eigen::VectorXd::Ones(n));
    }
  }
}

TEST(Rep, ActLinearAndInvertible) {
  const auto g = make_icosahedral();
  const auto rep = rep_direct_sum({rep_standard(g), rep_regular(g)});
  Rng rng(3);
  const Eigen::VectorXd u = rng.normal_vector(rep.dim()), v = rng.normal_vector(rep.dim());
  for (Element e = 0; e < g->order(); ++e) {
    EXPECT_LT((act(rep, e, 2.0 * u - v) - (2.0 * act(rep, e, u) - act(rep, e, v))).norm(), 1e-12);
    EXPECT_LT((act(rep, e, act(rep, g->inverse(e), u)) - u).norm(), 1e-12);
  }
  EXPECT_EQ(act(rep, 0, u), u);
}
