#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "skewlie/group.hpp"
#include "skewlie/random.hpp"

namespace skewlie {

using Group = GroupDescriptor<double>;

/// Uniform grid t_k = k T / N, k = 0..N.
class TimeGrid {
 public:
  TimeGrid(double horizon, std::int64_t steps);

  double horizon() const { return horizon_; }
  std::int64_t steps() const { return steps_; }
  double dt() const { return horizon_ / static_cast<double>(steps_); }
  double time(std::int64_t k) const { return horizon_ * static_cast<double>(k) / static_cast<double>(steps_); }
  // Index of a grid time; throws PreconditionError when t is not on the grid.
  std::int64_t index_of(double t) const;

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
    return a.horizon_ == b.horizon_ && a.steps_ == b.steps_;
  }

 private:
  double horizon_;
  std::int64_t steps_;
};

/// Algebra-valued path: column k holds the coordinates Y_k.
struct AlgebraPath {
  TimeGrid grid;
  Eigen::MatrixXd values;  // n x (N + 1)
  std::string group;
  NoiseSpec noise{};

  Eigen::Index dim() const { return values.rows(); }
  Eigen::VectorXd at(std::int64_t k) const { return values.col(k); }
  Eigen::VectorXd increment(std::int64_t k) const { return values.col(k + 1) - values.col(k); }
};

/// Group-valued path, one m x m matrix per grid time.
struct GroupPath {
  TimeGrid grid;
  std::vector<Eigen::MatrixXd> values;  // N + 1 entries
  std::string group;
  NoiseSpec noise{};
};

/// Discretizations of the Stratonovich integral of the Maurer-Cartan form.
enum class LogScheme {
  group_log,  // log of the one-step multiplicative increment X_k^{-1} X_{k+1}
  midpoint    // Maurer-Cartan form at the ambient midpoint applied to the chord
};

/// Columns form a <,>-orthonormal basis of the algebra: F = L^{-T} with metric = L L^T.
Eigen::MatrixXd orthonormal_frame(const Group& group);

/// Brownian increments Delta Y_k = sqrt(dt) F xi_k, as an n x N matrix.
Eigen::MatrixXd flat_increments(const Group& group, const TimeGrid& grid, const NoiseSpec& noise);

AlgebraPath sample_flat_bm(const Group& group, const TimeGrid& grid, const NoiseSpec& noise);

/// Flat Brownian motion plus t * drift.
AlgebraPath sample_drifted_martingale(const Group& group, const TimeGrid& grid, const NoiseSpec& noise,
                                      const Eigen::VectorXd& drift);

/// Geodesic random walk X_{k+1} = proj(X_k exp(Delta Y_k)); requires a bi-invariant metric.
GroupPath sample_group_bm(const Group& group, const TimeGrid& grid, const NoiseSpec& noise);

/// (log X)_0 = 0, (log X)_{k+1} = (log X)_k + increment estimate. Requires X_0 = identity.
AlgebraPath stochastic_logarithm(const Group& group, const GroupPath& path, LogScheme scheme = LogScheme::group_log);

/// X_0 = e, X_{k+1} = X_k exp(Delta Y_k). Requires Y_0 = 0. With project=true
/// every product is mapped back onto the group.
GroupPath stochastic_exponential(const Group& group, const AlgebraPath& path, bool project = true);

/// Brownian increments on nested dyadic grids of [0, T], built by Brownian-bridge
/// splitting so that level l+1 refines level l pathwise.
class WienerTree {
 public:
  WienerTree(const Group& group, double horizon, int depth, const NoiseSpec& noise);

  int depth() const { return depth_; }
  double horizon() const { return horizon_; }
  // n x 2^level algebra increments.
  Eigen::MatrixXd increments(int level) const;
  // Cumulative path on the 2^level grid (level >= 1).
  AlgebraPath path(int level) const;

 private:
  std::string group_;
  double horizon_;
  int depth_;
  NoiseSpec noise_;
  Eigen::MatrixXd frame_;
  std::vector<Eigen::MatrixXd> white_;  // standard-coordinate increments per level
};

// CSV frame: '#' header lines with the NoiseSpec, then "t,<coords>" rows.
void write_csv(std::ostream& os, const AlgebraPath& path);
void write_csv(std::ostream& os, const GroupPath& path);
AlgebraPath read_algebra_csv(std::istream& is);

// Compact little-endian binary frame with the same header content.
void write_binary(std::ostream& os, const AlgebraPath& path);
void write_binary(std::ostream& os, const GroupPath& path);
AlgebraPath read_algebra_binary(std::istream& is);
GroupPath read_group_binary(std::istream& is);

}  // namespace skewlie
