#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "skewlie/calculus.hpp"
#include "skewlie/paths.hpp"
#include "skewlie/stats.hpp"

namespace skewlie {

/// Flat Euclidean source: R^n, or the flat torus R^n / (period Z)^n.
struct SourceDomain {
  int dim = 1;
  bool periodic = false;
  double period = 0.0;
};

/// Smooth map from a flat source into a matrix group, with optional analytic
/// left-trivialized derivatives used as oracles.
struct SmoothMap {
  std::string name;
  SourceDomain source;
  Group target;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> eval;
  // a_i(x) = (F^* omega_G)(d_i), one algebra vector per source direction.
  std::function<std::vector<Eigen::VectorXd>(const Eigen::VectorXd&)> analytic_pullback;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> analytic_codifferential;
  Eigen::VectorXd base_point;
  std::vector<Eigen::VectorXd> lattice;
};

/// How derivatives of the map are obtained.
enum class Derivative { analytic, forward, central, richardson };

inline constexpr double kDefaultStep = 1e-4;

/// a_i(x) = log(F(x)^{-1} F(x + h e_i)) / h (forward), the symmetric variant
/// log(F(x - h e_i)^{-1} F(x + h e_i)) / 2h (central), its Richardson extrapolation
/// (4 a(h/2) - a(h)) / 3, or the analytic rule. Throws StepError when an increment
/// leaves the chart of log.
std::vector<Eigen::VectorXd> pullback_maurer_cartan(const SmoothMap& map, const Eigen::VectorXd& x,
                                                    double h = kDefaultStep, Derivative mode = Derivative::central);

/// d^* F^* omega_G = -sum_i d_i a_i on a flat source.
Eigen::VectorXd codifferential(const SmoothMap& map, const Eigen::VectorXd& x, double h = kDefaultStep,
                               Derivative mode = Derivative::central);

/// Left-trivialized tension sum_i [d_i a_i + alpha(a_i, a_i)].
Eigen::VectorXd tension_field(const SmoothMap& map, const Eigen::VectorXd& x, const Connection& alpha,
                              double h = kDefaultStep, Derivative mode = Derivative::central);

struct PluzhnikovResult {
  bool harmonic = false;
  double max_residual = 0.0;
  std::vector<Eigen::VectorXd> points;
  std::vector<Eigen::VectorXd> residuals;  // codifferential at each point
  std::vector<std::string> errors;         // per-point step errors, empty string if none
};

/// Harmonic iff max over the lattice of |d^* F^* omega_G| <= tol.
PluzhnikovResult pluzhnikov_check(const SmoothMap& map, const std::vector<Eigen::VectorXd>& lattice, double tol,
                                  double h = kDefaultStep, Derivative mode = Derivative::central);

/// CSV: one row per lattice point, source coordinates then residual coordinates.
void write_residual_csv(std::ostream& os, const PluzhnikovResult& result);

struct MonteCarloSettings {
  TimeGrid grid{1.0, 500};
  std::size_t ensemble_size = 10000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double z_max = 4.0;
  int max_refinements = 4;
};

/// Push source Brownian motions through F, take the group Ito integral of every
/// basis covector along F(B_0)^{-1} F(B_t), and test each for zero drift.
/// Metrics: drift_rate_i = mean(I_T)/T per component and their norm.
TestReport harmonicity_monte_carlo(const SmoothMap& map, const Connection& alpha, const MonteCarloSettings& settings);

/// Lie group homomorphism with its differential at the identity
/// (codomain dim x domain dim, acting on coordinate columns).
struct GroupHomomorphism {
  std::string name;
  Group domain;
  Group codomain;
  std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)> eval;
  Eigen::MatrixXd differential;
};

/// max |phi(gh) - phi(g)phi(h)| over random pairs and the finite-difference
/// mismatch of the differential; both should vanish.
struct HomomorphismDefect {
  double multiplicativity = 0.0;
  double differential = 0.0;
};
HomomorphismDefect homomorphism_defect(const GroupHomomorphism& phi, std::uint64_t seed, int samples = 32);

/// d_k = |log(phi(X))_k - phi_* log(X)_k|
Eigen::VectorXd homomorphism_naturality_check(const GroupHomomorphism& phi, const GroupPath& path,
                                              LogScheme scheme = LogScheme::group_log);

/// max over basis pairs of |phi_* alpha_H(X,Y) - alpha_G(phi_* X, phi_* Y)|
double commutation_residual(const GroupHomomorphism& phi, const Connection& alpha_h, const Connection& alpha_g);
/// Throws PreconditionError unless commutation_residual <= tol.
void require_commutation(const GroupHomomorphism& phi, const Connection& alpha_h, const Connection& alpha_g,
                         double tol = 1e-10);

/// Sample Brownian motion on the domain (bi-invariant metric required), map it
/// through phi and run the martingale battery on the codomain.
TestReport homomorphism_harmonicity_experiment(const GroupHomomorphism& phi, const Connection& alpha_h,
                                               const Connection& alpha_g, const MonteCarloSettings& settings);

// Registries.
std::vector<std::string> map_names();
std::vector<std::string> pluzhnikov_corpus();
SmoothMap make_map(const std::string& name);
std::vector<std::string> homomorphism_names();
GroupHomomorphism make_homomorphism(const std::string& name);

// Fixed directions used by the registered maps (so(3) coordinates).
Eigen::Vector3d corpus_xi();
Eigen::Vector3d corpus_a();
Eigen::Vector3d corpus_b();

}  // namespace skewlie
