#include <gtest/gtest.h>

#include <memory>
#include <sstream>

#include "skewlie/errors.hpp"
#include "skewlie/harmonic.hpp"
#include "skewlie/lie_core.hpp"
#include "skewlie/registry.hpp"
#include "support.hpp"

using namespace skewlie;
using testing_support::max_abs;

namespace {

Eigen::VectorXd pt(double x) { return Eigen::VectorXd::Constant(1, x); }
Eigen::VectorXd pt(double x, double y) { return Eigen::Vector2d(x, y); }

double max_pullback_error(const SmoothMap& m, double h, Derivative mode) {
  double worst = 0;
  for (const auto& x : m.lattice) {
    const auto exact = pullback_maurer_cartan(m, x, h, Derivative::analytic);
    const auto approx = pullback_maurer_cartan(m, x, h, mode);
    for (std::size_t i = 0; i < exact.size(); ++i) worst = std::max(worst, (exact[i] - approx[i]).norm());
  }
  return worst;
}

MonteCarloSettings small_settings() {
  MonteCarloSettings s;
  s.grid = TimeGrid(1.0, 100);
  s.ensemble_size = 500;
  s.seed = 3;
  return s;
}

}  // namespace

TEST(Pullback, ClosedFormsForTheCorpus) {
  const Eigen::VectorXd xi = corpus_xi();
  const SmoothMap line = make_map("exp_x_so3");
  const SmoothMap quad = make_map("exp_xsq_so3");
  for (double x : {-0.7, 0.0, 0.4}) {
    EXPECT_LT((pullback_maurer_cartan(line, pt(x))[0] - xi).norm(), 1e-9);
    EXPECT_LT((pullback_maurer_cartan(quad, pt(x))[0] - 2 * x * xi).norm(), 1e-9);
  }
}

TEST(Pullback, AnalyticAdjointFormulaMatchesTheGroupComputation) {
  // a_x = Ad(exp(-yB)) A computed through matrices rather than the vector formula.
  const SmoothMap m = make_map("exp_xA_yB_so3");
  const Group so3 = make_so3();
  for (const auto& x : m.lattice) {
    const Eigen::VectorXd ax = adjoint(so3, exp_group(so3, Eigen::VectorXd(-x(1) * corpus_b())), Eigen::VectorXd(corpus_a()));
    EXPECT_LT((m.analytic_pullback(x)[0] - ax).norm(), 1e-13);
  }
}

TEST(Pullback, FiniteDifferencesConvergeAtSecondOrder) {
  const SmoothMap m = make_map("exp_xcube_so3");
  const double e1 = max_pullback_error(m, 1e-2, Derivative::central);
  const double e2 = max_pullback_error(m, 5e-3, Derivative::central);
  EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.2);
  EXPECT_LT(max_pullback_error(m, 1e-4, Derivative::central), 1e-7);
  EXPECT_LT(max_pullback_error(m, 1e-2, Derivative::richardson), e1 / 20);
  const double f1 = max_pullback_error(m, 1e-3, Derivative::forward);
  const double f2 = max_pullback_error(m, 5e-4, Derivative::forward);
  EXPECT_NEAR(std::log2(f1 / f2), 1.0, 0.2);
}

TEST(Pullback, CentralDifferencesAreExactAlongOneParameterIncrements) {
  // F(x - h)^{-1} F(x + h) = exp(2h Ad(exp(-yB)) A) for the product map.
  const SmoothMap m = make_map("exp_xA_yB_so3");
  EXPECT_LT(max_pullback_error(m, 1e-2, Derivative::central), 1e-12);
  EXPECT_LT(max_pullback_error(m, 1e-2, Derivative::forward), 1e-12);
}

TEST(Codifferential, ClosedForms) {
  const Eigen::VectorXd xi = corpus_xi();
  for (auto mode : {Derivative::analytic, Derivative::central, Derivative::richardson}) {
    EXPECT_LT(codifferential(make_map("exp_x_so3"), pt(0.3), kDefaultStep, mode).norm(), 1e-6);
    EXPECT_LT((codifferential(make_map("exp_xsq_so3"), pt(0.3), kDefaultStep, mode) + 2 * xi).norm(), 1e-6);
    EXPECT_LT(codifferential(make_map("exp_xA_yB_so3"), pt(0.2, -0.5), kDefaultStep, mode).norm(), 1e-6);
  }
}

TEST(Tension, SkewConnectionGivesMinusCodifferential) {
  const Group so3 = make_so3();
  testing_support::Gen gen(51);
  const Connection skew = Connection::explicit_tensor(so3, gen.skew_tensor(3));
  for (const auto& name : map_names()) {
    const SmoothMap m = make_map(name);
    if (m.target.name() != "so3") continue;
    SCOPED_TRACE(name);
    for (const auto& x : m.lattice) {
      const Eigen::VectorXd tau = tension_field(m, x, skew, kDefaultStep, Derivative::analytic);
      EXPECT_LT((tau + codifferential(m, x, kDefaultStep, Derivative::analytic)).norm(), 1e-12);
    }
  }
  EXPECT_LT((tension_field(make_map("exp_xsq_so3"), pt(0.8), skew, kDefaultStep, Derivative::analytic) -
             2 * Eigen::VectorXd(corpus_xi()))
                .norm(),
            1e-12);
}

TEST(Tension, SymmetricConnectionAddsAlphaOfThePullback) {
  const Group so3 = make_so3();
  Tensor3<double> t(3);
  t(0, 0, 0) = 1.0;
  const Connection alpha = Connection::explicit_tensor(so3, t);
  const SmoothMap m = make_map("exp_x_so3");
  const Eigen::VectorXd xi = corpus_xi();
  const Eigen::VectorXd tau = tension_field(m, pt(0.1), alpha, kDefaultStep, Derivative::analytic);
  EXPECT_LT((tau - Eigen::Vector3d(xi(0) * xi(0), 0, 0)).norm(), 1e-14);
}

TEST(Codifferential, CommutesWithCovectors) {
  // theta applied after the codifferential against the codifferential of the scalar fields theta(a_i).
  const SmoothMap m = make_map("exp_xA_yB_so3");
  const Eigen::Vector3d theta(0.3, -0.7, 1.1);
  const double h = kDefaultStep;
  for (const auto& x : m.lattice) {
    const double after = theta.dot(codifferential(m, x, h, Derivative::central));
    double scalar = 0;
    for (int i = 0; i < 2; ++i) {
      const Eigen::VectorXd e = h * Eigen::Vector2d::Unit(i);
      scalar -= (theta.dot(pullback_maurer_cartan(m, x + e, h)[static_cast<std::size_t>(i)]) -
                 theta.dot(pullback_maurer_cartan(m, x - e, h)[static_cast<std::size_t>(i)])) /
                (2 * h);
    }
    EXPECT_NEAR(after, scalar, 1e-10);
  }
}

TEST(Pluzhnikov, CorpusVerdicts) {
  const auto corpus = pluzhnikov_corpus();
  ASSERT_EQ(corpus.size(), 3u);
  EXPECT_TRUE(pluzhnikov_check(make_map("exp_x_so3"), make_map("exp_x_so3").lattice, 1e-6).harmonic);
  EXPECT_TRUE(pluzhnikov_check(make_map("exp_xA_yB_so3"), make_map("exp_xA_yB_so3").lattice, 1e-6).harmonic);
  const auto bad = pluzhnikov_check(make_map("exp_xsq_so3"), make_map("exp_xsq_so3").lattice, 1e-6);
  EXPECT_FALSE(bad.harmonic);
  for (const auto& r : bad.residuals) EXPECT_NEAR(r.norm(), 2.0 * corpus_xi().norm(), 1e-6);
  std::ostringstream os;
  write_residual_csv(os, bad);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "x0,r0,r1,r2,error");
  EXPECT_TRUE(pluzhnikov_check(make_map("id_torus2"), make_map("id_torus2").lattice, 1e-6).harmonic);
}

TEST(Pluzhnikov, StepErrorsAreReportedPerPoint) {
  SmoothMap fast = make_map("exp_x_so3");
  const Group so3 = make_so3();
  fast.eval = [so3](const Eigen::VectorXd& x) {
    return exp_group(so3, Eigen::VectorXd(100.0 * x(0) * corpus_xi()));
  };
  // 2 h * 100 = pi exactly hits the cut locus of the central difference.
  const auto res = pluzhnikov_check(fast, {pt(0.0)}, 1e-6, EIGEN_PI / 200.0, Derivative::central);
  EXPECT_FALSE(res.harmonic);
  ASSERT_EQ(res.errors.size(), 1u);
  EXPECT_FALSE(res.errors[0].empty());
  EXPECT_THROW(pullback_maurer_cartan(fast, pt(0.0), EIGEN_PI / 200.0), StepError);
  EXPECT_THROW(pullback_maurer_cartan(make_map("id_r1"), pt(0.0, 0.0)), DimensionError);
}

TEST(MonteCarlo, HarmonicAndNonHarmonicMaps) {
  const Group so3 = make_so3();
  const Connection half = Connection::bracket_multiple(so3, 0.5);
  EXPECT_EQ(harmonicity_monte_carlo(make_map("exp_x_so3"), half, small_settings()).verdict, Verdict::pass);
  const TestReport bad = harmonicity_monte_carlo(make_map("exp_xsq_so3"), half, small_settings());
  EXPECT_EQ(bad.verdict, Verdict::fail);
  EXPECT_NEAR(bad.metric("drift_rate_norm"), corpus_xi().norm(), 0.3);
  // The drift points along +xi, i.e. along -1/2 of the codifferential.
  for (int c = 0; c < 3; ++c) EXPECT_GT(bad.metric("drift_rate_" + std::to_string(c)) * corpus_xi()(c), 0.0);
  const Group r1 = make_rn(1);
  EXPECT_EQ(harmonicity_monte_carlo(make_map("id_r1"), Connection::zero(r1), small_settings()).verdict, Verdict::pass);
}

TEST(MonteCarlo, RequiresSkewConnectionOnTheTarget) {
  const Group so3 = make_so3();
  Tensor3<double> t(3);
  t(0, 0, 0) = 1;
  EXPECT_THROW(harmonicity_monte_carlo(make_map("exp_x_so3"), Connection::explicit_tensor(so3, t), small_settings()),
               ContractViolation);
  EXPECT_THROW(harmonicity_monte_carlo(make_map("exp_x_so3"), Connection::zero(make_su2()), small_settings()),
               DimensionError);
}

TEST(MonteCarlo, BranchErrorsTriggerGridRefinementUpToTheCap) {
  const Group so3 = make_so3();
  auto calls = std::make_shared<int>(0);
  SmoothMap flaky = make_map("exp_x_so3");
  const auto inner = flaky.eval;
  flaky.eval = [inner, calls](const Eigen::VectorXd& x) {
    if ((*calls)++ < 3) throw BranchError("simulated cut-locus hit");
    return inner(x);
  };
  MonteCarloSettings s = small_settings();
  s.ensemble_size = 100;
  s.grid = TimeGrid(1.0, 50);
  const TestReport r = harmonicity_monte_carlo(flaky, Connection::bracket_multiple(so3, 0.5), s);
  EXPECT_EQ(r.provenance.steps, 400);  // three failed attempts, three doublings

  SmoothMap broken = make_map("exp_x_so3");
  broken.eval = [](const Eigen::VectorXd&) -> Eigen::MatrixXd { throw BranchError("always"); };
  s.max_refinements = 2;
  try {
    harmonicity_monte_carlo(broken, Connection::bracket_multiple(so3, 0.5), s);
    ADD_FAILURE() << "expected a numeric error";
  } catch (const BranchError&) {
    ADD_FAILURE() << "branch error escaped the refinement loop";
  } catch (const NumericError&) {
  }
}

TEST(Homomorphisms, RegisteredMapsAreHomomorphisms) {
  for (const auto& name : homomorphism_names()) {
    SCOPED_TRACE(name);
    const auto d = homomorphism_defect(make_homomorphism(name), 61);
    EXPECT_LT(d.multiplicativity, 1e-10);
    EXPECT_LT(d.differential, 1e-6);
  }
  EXPECT_THROW(make_homomorphism("nope"), RegistryError);
}

TEST(Homomorphisms, NaturalityResiduals) {
  const auto id = make_homomorphism("identity_so3");
  const GroupPath x = sample_group_bm(id.domain, TimeGrid(1.0, 256), {1, 1});
  EXPECT_EQ(homomorphism_naturality_check(id, x).maxCoeff(), 0.0);
  EXPECT_EQ(homomorphism_naturality_check(id, x, LogScheme::midpoint).maxCoeff(), 0.0);

  const auto dbl = make_homomorphism("double_r1");
  const GroupPath w = sample_group_bm(dbl.domain, TimeGrid(1.0, 256), {1, 2});
  EXPECT_EQ(homomorphism_naturality_check(dbl, w).maxCoeff(), 0.0);
  EXPECT_EQ(homomorphism_naturality_check(dbl, w, LogScheme::midpoint).maxCoeff(), 0.0);

  const auto cover = make_homomorphism("su2_to_so3");
  const GroupPath q = sample_group_bm(cover.domain, TimeGrid(1.0, 256), {1, 3});
  EXPECT_LT(homomorphism_naturality_check(cover, q).maxCoeff(), 1e-12);
  const double mid = homomorphism_naturality_check(cover, q, LogScheme::midpoint).maxCoeff();
  EXPECT_GT(mid, 1e-6);
  EXPECT_LT(mid, 0.05);
}

TEST(Homomorphisms, CommutationPrecondition) {
  auto phi = make_homomorphism("su2_to_so3");
  const Connection ah = Connection::bracket_multiple(phi.domain, 0.5);
  const Connection ag = Connection::bracket_multiple(phi.codomain, 0.5);
  EXPECT_LT(commutation_residual(phi, ah, ag), 1e-14);
  EXPECT_NO_THROW(require_commutation(phi, ah, ag));
  phi.differential(0, 1) += 1e-3;
  EXPECT_THROW(require_commutation(phi, ah, ag), PreconditionError);
  EXPECT_THROW(homomorphism_harmonicity_experiment(phi, ah, ag, small_settings()), PreconditionError);
}

TEST(Homomorphisms, ExperimentPassesForTheCovering) {
  const auto phi = make_homomorphism("su2_to_so3");
  const TestReport r = homomorphism_harmonicity_experiment(phi, Connection::bracket_multiple(phi.domain, 0.5),
                                                           Connection::bracket_multiple(phi.codomain, 0.5),
                                                           small_settings());
  EXPECT_EQ(r.verdict, Verdict::pass);
  const auto line = make_homomorphism("r1_to_so3");
  EXPECT_EQ(homomorphism_harmonicity_experiment(line, Connection::zero(line.domain),
                                                Connection::bracket_multiple(line.codomain, 0.5), small_settings())
                .verdict,
            Verdict::pass);
}

TEST(Homomorphisms, DomainWithoutBiinvariantMetricIsRejected) {
  const Group h = make_heis3();
  const GroupHomomorphism id{"id_heis3", h, h, [](const Eigen::MatrixXd& g) { return g; },
                             Eigen::MatrixXd::Identity(3, 3)};
  EXPECT_THROW(homomorphism_harmonicity_experiment(id, Connection::zero(h), Connection::zero(h), small_settings()),
               UnsupportedGroupError);
}
