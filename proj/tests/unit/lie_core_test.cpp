#include <gtest/gtest.h>

#include <cmath>

#include "skewlie/connections.hpp"
#include "skewlie/errors.hpp"
#include "skewlie/lie_core.hpp"
#include "skewlie/registry.hpp"
#include "support.hpp"

using namespace skewlie;
using testing_support::for_all;
using testing_support::Gen;
using testing_support::max_abs;

namespace {

using G = GroupDescriptor<double>;

double sample_radius(const G& g) {
  return std::isfinite(g.injectivity_radius()) ? 0.9 * g.injectivity_radius() : 3.0;
}

std::vector<G> all_groups() {
  std::vector<G> out;
  for (const auto& n : group_names()) out.push_back(make_group(n));
  return out;
}

Eigen::Matrix3d skew3(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v(2), v(1), v(2), 0, -v(0), -v(1), v(0), 0;
  return m;
}

double epsilon3(int i, int j, int k) {
  return static_cast<double>((i - j) * (j - k) * (k - i)) / 2.0;
}

}  // namespace

TEST(Registry, ListsGroupsAndRejectsUnknownNames) {
  EXPECT_GE(group_names().size(), 5u);
  EXPECT_THROW(make_group("so4"), RegistryError);
  EXPECT_EQ(make_group("torus2").dim(), 2);
  EXPECT_EQ(make_group("r3").embed_dim(), 4);
}

TEST(Registry, So3HatIsTheCrossProductMatrix) {
  const G so3 = make_so3();
  const Eigen::Vector3d v(0.3, -1.2, 0.7);
  EXPECT_LT(max_abs(so3.hat(v) - skew3(v)), 1e-15);
}

TEST(Registry, StructureConstantsOfSo3AndSu2AreLeviCivita) {
  for (const G& g : {make_so3(), make_su2()}) {
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(g.structure_constants()(k, i, j), epsilon3(i, j, k), 1e-15);
  }
}

TEST(Registry, HeisenbergHasOneNonzeroBracket) {
  const G h = make_heis3();
  const Eigen::VectorXd e1 = Eigen::Vector3d::UnitX(), e2 = Eigen::Vector3d::UnitY();
  EXPECT_LT((bracket(h, e1, e2) - Eigen::Vector3d::UnitZ()).norm(), 1e-15);
  EXPECT_LT(bracket(h, e1, Eigen::VectorXd(Eigen::Vector3d::UnitZ())).norm(), 1e-15);
}

TEST(Registry, StructureIsAntisymmetricAndSatisfiesJacobi) {
  for (const auto& g : all_groups()) {
    SCOPED_TRACE(g.name());
    EXPECT_LT(antisymmetry_residual(g), 1e-14);
    EXPECT_LT(jacobi_residual(g), 1e-14);
  }
}

TEST(Descriptor, ConstructorRejectsBrokenInput) {
  const G so3 = make_so3();
  const Eigen::MatrixXd e0 = so3.basis(0);
  EXPECT_THROW(G("dup", Realization::generic, {e0, e0}, Eigen::MatrixXd::Identity(2, 2), false, 1.0), ConfigError);
  // span{E1, E2} is not closed: [E1, E2] = E3.
  EXPECT_THROW(G("open", Realization::generic, {so3.basis(0), so3.basis(1)}, Eigen::MatrixXd::Identity(2, 2), false, 1.0),
               ConfigError);
  EXPECT_THROW(G("metric", Realization::generic, so3.basis(), -Eigen::MatrixXd::Identity(3, 3), false, 1.0),
               ConfigError);
  Tensor3<double> wrong(3);
  EXPECT_THROW(G("sc", Realization::generic, so3.basis(), Eigen::MatrixXd::Identity(3, 3), false, 1.0, wrong),
               ConfigError);
  EXPECT_NO_THROW(G("ok", Realization::generic, so3.basis(), Eigen::MatrixXd::Identity(3, 3), true, 1.0,
                    so3.structure_constants()));
}

TEST(Descriptor, AdInvarianceHoldsExactlyForBiinvariantFlag) {
  for (const auto& g : all_groups()) {
    SCOPED_TRACE(g.name());
    EXPECT_EQ(check_ad_invariance(g), g.admits_biinvariant_metric());
  }
}

TEST(LieCore, ExpAgreesWithPadeOnEveryGroup) {
  for (const auto& g : all_groups()) {
    SCOPED_TRACE(g.name());
    for_all(25, 11, [&](Gen& gen) {
      const Eigen::VectorXd x = gen.ball(g.dim(), sample_radius(g));
      EXPECT_LT(max_abs(exp_group(g, x) - expm_pade<double>(g.hat(x))), 1e-12);
    });
  }
}

TEST(LieCore, GenericRealizationRoutesThroughPade) {
  const G so3 = make_so3();
  const G generic("so3_generic", Realization::generic, so3.basis(), so3.metric(), true, EIGEN_PI);
  for_all(20, 12, [&](Gen& gen) {
    const Eigen::VectorXd x = gen.ball(3, 3.0);
    EXPECT_LT(max_abs(exp_group(generic, x) - exp_group(so3, x)), 1e-12);
    EXPECT_LT((log_group(generic, exp_group(generic, x)) - x).norm(), 1e-9);
  });
}

TEST(LieCore, RodriguesRotatesVectorsAboutTheAxis) {
  const G so3 = make_so3();
  for_all(30, 13, [&](Gen& gen) {
    const Eigen::Vector3d w = gen.ball(3, 3.0), v = gen.vector(3);
    const double t = w.norm();
    const Eigen::Vector3d k = w / t;
    const Eigen::Vector3d expected = v * std::cos(t) + k.cross(v) * std::sin(t) + k * k.dot(v) * (1 - std::cos(t));
    EXPECT_LT((exp_group(so3, Eigen::VectorXd(w)) * v - expected).norm(), 1e-13);
  });
}

TEST(LieCore, LogInvertsExpInsideTheInjectivityRadius) {
  for (const auto& g : all_groups()) {
    SCOPED_TRACE(g.name());
    for_all(40, 14, [&](Gen& gen) {
      const Eigen::VectorXd x = gen.ball(g.dim(), sample_radius(g));
      EXPECT_LT((log_group(g, exp_group(g, x)) - x).norm(), 1e-9 * std::max(1.0, x.norm()));
    });
  }
}

TEST(LieCore, LogNearTheCutLocusIsFlaggedButAccurate) {
  const G so3 = make_so3();
  const Eigen::VectorXd axis = Eigen::Vector3d(1, 2, -2) / 3.0;
  const Eigen::VectorXd x = (EIGEN_PI - 1e-3) * axis;
  const auto res = log_group_diagnosed(so3, exp_group(so3, x));
  EXPECT_TRUE(res.ill_conditioned);
  EXPECT_LT((res.value - x).norm(), 1e-8);
  EXPECT_FALSE(log_group_diagnosed(so3, exp_group(so3, Eigen::VectorXd(0.5 * axis))).ill_conditioned);
}

TEST(LieCore, LogThrowsAtTheCutLocus) {
  const Eigen::VectorXd axis = Eigen::Vector3d(0, 0.6, 0.8);
  EXPECT_THROW(log_group(make_so3(), exp_group(make_so3(), Eigen::VectorXd(EIGEN_PI * axis))), BranchError);
  EXPECT_THROW(log_group(make_su2(), exp_group(make_su2(), Eigen::VectorXd(2 * EIGEN_PI * axis))), BranchError);
  EXPECT_THROW(log_group(make_torus(2), exp_group(make_torus(2), Eigen::VectorXd(Eigen::Vector2d(0.1, EIGEN_PI)))),
               BranchError);
}

TEST(LieCore, ExpRejectsNonFiniteAndMisshapenInput) {
  const G so3 = make_so3();
  EXPECT_THROW(exp_group(so3, Eigen::VectorXd(Eigen::Vector3d(std::nan(""), 0, 0))), NumericError);
  EXPECT_THROW(exp_group(so3, Eigen::VectorXd(Eigen::Vector2d(0, 0))), DimensionError);
  EXPECT_THROW(log_group(so3, Eigen::MatrixXd(Eigen::MatrixXd::Identity(4, 4))), DimensionError);
}

TEST(LieCore, BracketIsTheMatrixCommutator) {
  for (const auto& g : all_groups()) {
    SCOPED_TRACE(g.name());
    for_all(10, 15, [&](Gen& gen) {
      const Eigen::VectorXd x = gen.vector(g.dim()), y = gen.vector(g.dim());
      const Eigen::MatrixXd comm = g.hat(x) * g.hat(y) - g.hat(y) * g.hat(x);
      EXPECT_LT(max_abs(g.hat(bracket(g, x, y)) - comm), 1e-13);
    });
  }
}

TEST(LieCore, BracketMatchesTheGroupCommutatorToSecondOrder) {
  // exp(tX) exp(tY) exp(-tX) exp(-tY) = I + t^2 [X, Y] + O(t^3)
  const G so3 = make_so3();
  for_all(10, 16, [&](Gen& gen) {
    const Eigen::VectorXd x = gen.vector(3), y = gen.vector(3);
    const auto defect = [&](double t) {
      const Eigen::MatrixXd c = exp_group(so3, Eigen::VectorXd(t * x)) * exp_group(so3, Eigen::VectorXd(t * y)) *
                                exp_group(so3, Eigen::VectorXd(-t * x)) * exp_group(so3, Eigen::VectorXd(-t * y));
      return ((c - Eigen::MatrixXd::Identity(3, 3)) / (t * t) - so3.hat(bracket(so3, x, y))).norm();
    };
    EXPECT_LT(defect(1e-3), 1e-2 * std::max(1.0, x.norm() * y.norm() * (x.norm() + y.norm())));
    EXPECT_GT(defect(1e-3) / defect(5e-4), 1.6);
  });
}

TEST(LieCore, HeisenbergProductFollowsTruncatedBch) {
  const G h = make_heis3();
  for_all(20, 17, [&](Gen& gen) {
    const Eigen::VectorXd x = gen.vector(3, 2.0), y = gen.vector(3, 2.0);
    const Eigen::VectorXd z = x + y + 0.5 * bracket(h, x, y);
    EXPECT_LT(max_abs(exp_group(h, x) * exp_group(h, y) - exp_group(h, z)), 1e-12);
  });
}

TEST(LieCore, InverseIsTwoSided) {
  for (const auto& g : all_groups()) {
    SCOPED_TRACE(g.name());
    for_all(10, 18, [&](Gen& gen) {
      const Eigen::MatrixXd a = exp_group(g, gen.ball(g.dim(), sample_radius(g)));
      const Eigen::MatrixXd id = identity_element(g);
      EXPECT_LT(max_abs(a * inverse_element(g, a) - id), 1e-12);
      EXPECT_LT(max_abs(inverse_element(g, a) * a - id), 1e-12);
    });
  }
}

TEST(LieCore, AdjointOfExpIsTheExponentialOfAd) {
  for (const auto& g : all_groups()) {
    SCOPED_TRACE(g.name());
    const Eigen::Index n = g.dim();
    for_all(10, 19, [&](Gen& gen) {
      const Eigen::VectorXd x = gen.ball(n, 1.5), y = gen.vector(n);
      Eigen::MatrixXd ad(n, n);
      for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index j = 0; j < n; ++j) {
          double acc = 0;
          for (Eigen::Index i = 0; i < n; ++i) acc += g.structure_constants()(k, i, j) * x(i);
          ad(k, j) = acc;
        }
      EXPECT_LT((adjoint(g, exp_group(g, x), y) - expm_pade<double>(ad) * y).norm(), 1e-11 * (1 + y.norm()));
    });
  }
}

TEST(LieCore, MaurerCartanRecoversLeftTrivializedVelocity) {
  for (const auto& g : all_groups()) {
    SCOPED_TRACE(g.name());
    for_all(10, 20, [&](Gen& gen) {
      const Eigen::MatrixXd a = exp_group(g, gen.ball(g.dim(), sample_radius(g)));
      const Eigen::VectorXd y = gen.vector(g.dim());
      EXPECT_LT((maurer_cartan(g, a, Eigen::MatrixXd(a * g.hat(y))) - y).norm(), 1e-11 * (1 + y.norm()));
    });
  }
  const G so3 = make_so3();
  EXPECT_THROW(maurer_cartan(so3, identity_element(so3), Eigen::MatrixXd(Eigen::MatrixXd::Identity(3, 3))), TangencyError);
}

TEST(LieCore, MembershipSeparatesGroupElementsFromNoise) {
  for (const auto& g : all_groups()) {
    SCOPED_TRACE(g.name());
    Gen gen(21);
    const Eigen::MatrixXd a = exp_group(g, gen.ball(g.dim(), sample_radius(g)));
    EXPECT_LT(membership_residual(g, a), 1e-12);
    EXPECT_GT(membership_residual(g, Eigen::MatrixXd(a + 0.05 * gen.matrix(a.rows(), a.cols()))), 1e-3);
  }
}

TEST(LieCore, So3ProjectionIsThePolarFactor) {
  const G so3 = make_so3();
  for_all(30, 22, [&](Gen& gen) {
    const Eigen::MatrixXd r = exp_group(so3, gen.ball(3, 3.0));
    const Eigen::MatrixXd noisy = r + 0.01 * gen.matrix(3, 3);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(noisy, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::MatrixXd polar = svd.matrixU() * svd.matrixV().transpose();
    const Eigen::MatrixXd p = project_to_group(so3, noisy);
    EXPECT_LT(max_abs(p - polar), 1e-12);
    EXPECT_LT(membership_residual(so3, p), 1e-12);
  });
}

TEST(LieCore, ProjectionRepairsDriftOnEveryGroup) {
  for (const auto& g : all_groups()) {
    SCOPED_TRACE(g.name());
    for_all(10, 23, [&](Gen& gen) {
      const Eigen::MatrixXd a = exp_group(g, gen.ball(g.dim(), sample_radius(g)));
      Eigen::MatrixXd noisy = a + 1e-6 * gen.matrix(a.rows(), a.cols());
      const Eigen::MatrixXd p = project_to_group(g, noisy);
      EXPECT_LT(membership_residual(g, p), 1e-12);
      EXPECT_LT(max_abs(p - a), 1e-5);
      EXPECT_LT(max_abs(project_to_group(g, a) - a), 1e-12);
    });
  }
}

TEST(LieCore, ProjectionRejectsWrongComponentAndFarInput) {
  const G so3 = make_so3();
  Eigen::MatrixXd flip = Eigen::MatrixXd::Identity(3, 3);
  flip(2, 2) = -1;
  EXPECT_THROW(project_to_group(so3, flip), ComponentError);
  EXPECT_THROW(project_to_group(so3, Eigen::MatrixXd(2.0 * Eigen::MatrixXd::Identity(3, 3))), NumericError);
  const G t1 = make_torus(1);
  EXPECT_THROW(project_to_group(t1, Eigen::MatrixXd(2.0 * Eigen::MatrixXd::Identity(2, 2))), NumericError);
  Eigen::MatrixXd refl(2, 2);
  refl << 1, 0, 0, -1;
  EXPECT_THROW(project_to_group(t1, refl), ComponentError);
}

TEST(LieCore, CoveringSu2ToSo3HasIdentityDifferential) {
  // The rotation induced by conjugating pure quaternions equals exp in so(3)
  // with the same coordinates because the structure constants coincide.
  const G su2 = make_su2(), so3 = make_so3();
  for_all(20, 24, [&](Gen& gen) {
    const Eigen::VectorXd x = gen.ball(3, 6.0);
    const Eigen::MatrixXd q = exp_group(su2, x);
    Eigen::Matrix3d rot;
    for (int c = 0; c < 3; ++c) {
      const Eigen::VectorXd e = Eigen::Vector3d::Unit(c);
      rot.col(c) = adjoint(su2, q, e);
    }
    EXPECT_LT(max_abs(rot - exp_group(so3, x)), 1e-12);
  });
}

TEST(LieCore, TemplatedOnScalarType) {
  const auto so3 = make_so3<long double>();
  AlgebraVector<long double> x(3);
  x << 0.1L, -0.2L, 0.3L;
  const auto back = log_group(so3, exp_group(so3, x));
  EXPECT_LT(static_cast<double>((back - x).norm()), 1e-17);
  const auto so3f = make_so3<float>();
  AlgebraVector<float> xf = x.cast<float>();
  EXPECT_LT((log_group(so3f, exp_group(so3f, xf)) - xf).norm(), 1e-5f);
}
