#include "skewlie/paths.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "skewlie/errors.hpp"
#include "skewlie/lie_core.hpp"

namespace skewlie {

TimeGrid::TimeGrid(double horizon, std::int64_t steps) : horizon_(horizon), steps_(steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("TimeGrid: horizon must be positive and finite");
  if (steps < 2) throw ConfigError("TimeGrid: at least two steps required");
}

std::int64_t TimeGrid::index_of(double t) const {
  const double k = t / dt();
  const auto idx = static_cast<std::int64_t>(std::llround(k));
  if (idx < 0 || idx > steps_ || std::abs(k - static_cast<double>(idx)) > 1e-9) {
    throw PreconditionError("time " + std::to_string(t) + " is not a point of the grid");
  }
  return idx;
}

Eigen::MatrixXd orthonormal_frame(const Group& group) {
  Eigen::LLT<Eigen::MatrixXd> llt(group.metric());
  if (llt.info() != Eigen::Success) throw FactorizationError("orthonormal_frame: metric is not positive-definite");
  // F = L^{-T}: F^T G F = L^{-1} L L^T L^{-T} = I.
  const Eigen::MatrixXd lower = llt.matrixL();
  return lower.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(group.dim(), group.dim()));
}

Eigen::MatrixXd flat_increments(const Group& group, const TimeGrid& grid, const NoiseSpec& noise) {
  const Eigen::MatrixXd frame = orthonormal_frame(group);
  const double scale = std::sqrt(grid.dt());
  Eigen::MatrixXd inc(group.dim(), grid.steps());
  Eigen::VectorXd xi(group.dim());
  for (std::int64_t k = 0; k < grid.steps(); ++k) {
    standard_normals(noise, kStreamIncrements, static_cast<std::uint64_t>(k), xi);
    inc.col(k) = scale * (frame * xi);
  }
  return inc;
}

namespace {

AlgebraPath cumulative(const Group& group, const TimeGrid& grid, const Eigen::MatrixXd& inc, const NoiseSpec& noise) {
  AlgebraPath path{grid, Eigen::MatrixXd::Zero(group.dim(), grid.steps() + 1), group.name(), noise};
  for (std::int64_t k = 0; k < grid.steps(); ++k) path.values.col(k + 1) = path.values.col(k) + inc.col(k);
  return path;
}

}  // namespace

AlgebraPath sample_flat_bm(const Group& group, const TimeGrid& grid, const NoiseSpec& noise) {
  return cumulative(group, grid, flat_increments(group, grid, noise), noise);
}

AlgebraPath sample_drifted_martingale(const Group& group, const TimeGrid& grid, const NoiseSpec& noise,
                                      const Eigen::VectorXd& drift) {
  group.require_dim(drift);
  AlgebraPath path = sample_flat_bm(group, grid, noise);
  for (std::int64_t k = 0; k <= grid.steps(); ++k) path.values.col(k) += grid.time(k) * drift;
  return path;
}

GroupPath sample_group_bm(const Group& group, const TimeGrid& grid, const NoiseSpec& noise) {
  if (!group.admits_biinvariant_metric()) {
    throw UnsupportedGroupError("sample_group_bm: group '" + group.name() + "' has no bi-invariant metric");
  }
  return stochastic_exponential(group, sample_flat_bm(group, grid, noise), true);
}

namespace {

// Paths remember the group they were sampled on; an empty tag is accepted.
void require_same_group(const Group& group, const std::string& tag, const char* what) {
  if (!tag.empty() && tag != group.name()) {
    throw DimensionError(std::string(what) + ": path belongs to '" + tag + "', not '" + group.name() + "'");
  }
}

}  // namespace

GroupPath stochastic_exponential(const Group& group, const AlgebraPath& path, bool project) {
  if (path.values.rows() != group.dim()) throw DimensionError("stochastic_exponential: path dimension");
  require_same_group(group, path.group, "stochastic_exponential");
  if (path.values.col(0).cwiseAbs().maxCoeff() != 0.0) {
    throw PreconditionError("stochastic_exponential: path must start at 0");
  }
  GroupPath out{path.grid, {}, group.name(), path.noise};
  out.values.reserve(static_cast<std::size_t>(path.grid.steps() + 1));
  out.values.push_back(identity_element(group));
  for (std::int64_t k = 0; k < path.grid.steps(); ++k) {
    Eigen::MatrixXd next = out.values.back() * exp_group(group, Eigen::VectorXd(path.increment(k)));
    if (project) next = project_to_group(group, next);
    out.values.push_back(std::move(next));
  }
  return out;
}

AlgebraPath stochastic_logarithm(const Group& group, const GroupPath& path, LogScheme scheme) {
  if (path.values.size() != static_cast<std::size_t>(path.grid.steps() + 1)) {
    throw DimensionError("stochastic_logarithm: path length does not match its grid");
  }
  require_same_group(group, path.group, "stochastic_logarithm");
  const Eigen::MatrixXd id = identity_element(group);
  group.require_embed(path.values.front());
  if ((path.values.front() - id).cwiseAbs().maxCoeff() > kMembershipTolerance) {
    throw PreconditionError("stochastic_logarithm: path must start at the identity");
  }
  AlgebraPath out{path.grid, Eigen::MatrixXd::Zero(group.dim(), path.grid.steps() + 1), group.name(), path.noise};
  for (std::int64_t k = 0; k < path.grid.steps(); ++k) {
    const auto& a = path.values[static_cast<std::size_t>(k)];
    const auto& b = path.values[static_cast<std::size_t>(k + 1)];
    Eigen::VectorXd inc;
    if (scheme == LogScheme::group_log) {
      inc = log_group(group, Eigen::MatrixXd(inverse_element(group, a) * b));
    } else {
      const Eigen::MatrixXd mid = 0.5 * (a + b);
      inc = group.coordinates(Eigen::MatrixXd(mid.partialPivLu().solve(b - a)));
    }
    out.values.col(k + 1) = out.values.col(k) + inc;
  }
  return out;
}

WienerTree::WienerTree(const Group& group, double horizon, int depth, const NoiseSpec& noise)
    : group_(group.name()), horizon_(horizon), depth_(depth), noise_(noise), frame_(orthonormal_frame(group)) {
  if (depth < 1 || depth > 24) throw ConfigError("WienerTree: depth must be in [1, 24]");
  if (!(horizon > 0.0)) throw ConfigError("WienerTree: horizon must be positive");
  const Eigen::Index n = group.dim();
  Eigen::VectorXd z(n);
  white_.reserve(static_cast<std::size_t>(depth + 1));
  standard_normals(noise, kStreamTree, 0, z);
  white_.push_back(std::sqrt(horizon) * z);
  for (int level = 0; level < depth; ++level) {
    const Eigen::MatrixXd& parent = white_.back();
    const double h = horizon / static_cast<double>(parent.cols());
    Eigen::MatrixXd child(n, 2 * parent.cols());
    for (Eigen::Index k = 0; k < parent.cols(); ++k) {
      standard_normals(noise, kStreamTree + 1 + static_cast<std::uint32_t>(level), static_cast<std::uint64_t>(k), z);
      // Bridge midpoint: B(h/2) | B(h) = w  ~  N(w/2, h/4).
      const Eigen::VectorXd left = 0.5 * parent.col(k) + std::sqrt(0.25 * h) * z;
      child.col(2 * k) = left;
      child.col(2 * k + 1) = parent.col(k) - left;
    }
    white_.push_back(std::move(child));
  }
}

Eigen::MatrixXd WienerTree::increments(int level) const {
  if (level < 0 || level > depth_) throw ConfigError("WienerTree: level out of range");
  return frame_ * white_[static_cast<std::size_t>(level)];
}

AlgebraPath WienerTree::path(int level) const {
  const Eigen::MatrixXd inc = increments(level);
  const TimeGrid grid(horizon_, inc.cols());
  AlgebraPath out{grid, Eigen::MatrixXd::Zero(inc.rows(), inc.cols() + 1), group_, noise_};
  for (Eigen::Index k = 0; k < inc.cols(); ++k) out.values.col(k + 1) = out.values.col(k) + inc.col(k);
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kMagic[4] = {'S', 'K', 'L', 'P'};
constexpr std::uint32_t kFrameVersion = 1;
constexpr std::uint8_t kKindAlgebra = 1;
constexpr std::uint8_t kKindGroup = 2;

void csv_header(std::ostream& os, const std::string& kind, const std::string& group, const TimeGrid& grid,
                const NoiseSpec& noise) {
  os << "# kind=" << kind << " group=" << group << " T=" << grid.horizon() << " N=" << grid.steps()
     << " seed=" << noise.seed << " path_index=" << noise.path_index << '\n';
}

template <typename T>
void put(std::ostream& os, const T& v) {
  // The frame is little-endian; all supported targets are little-endian.
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error("binary path frame truncated");
  return v;
}

void binary_header(std::ostream& os, std::uint8_t kind, const std::string& group, const TimeGrid& grid,
                   const NoiseSpec& noise, std::uint64_t width) {
  os.write(kMagic, 4);
  put(os, kFrameVersion);
  put(os, kind);
  put(os, static_cast<std::uint32_t>(group.size()));
  os.write(group.data(), static_cast<std::streamsize>(group.size()));
  put(os, noise.seed);
  put(os, noise.path_index);
  put(os, grid.horizon());
  put(os, static_cast<std::uint64_t>(grid.steps()));
  put(os, width);
}

struct FrameHeader {
  std::uint8_t kind;
  std::string group;
  NoiseSpec noise;
  double horizon;
  std::uint64_t steps;
  std::uint64_t width;
};

FrameHeader read_header(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw Error("not a path frame");
  if (get<std::uint32_t>(is) != kFrameVersion) throw Error("unsupported path frame version");
  FrameHeader h;
  h.kind = get<std::uint8_t>(is);
  const auto len = get<std::uint32_t>(is);
  h.group.resize(len);
  is.read(h.group.data(), len);
  h.noise.seed = get<std::uint64_t>(is);
  h.noise.path_index = get<std::uint64_t>(is);
  h.horizon = get<double>(is);
  h.steps = get<std::uint64_t>(is);
  h.width = get<std::uint64_t>(is);
  return h;
}

}  // namespace

void write_csv(std::ostream& os, const AlgebraPath& path) {
  csv_header(os, "algebra", path.group, path.grid, path.noise);
  os << 't';
  for (Eigen::Index i = 0; i < path.dim(); ++i) os << ",y" << i;
  os << '\n';
  os.precision(17);
  for (std::int64_t k = 0; k <= path.grid.steps(); ++k) {
    os << path.grid.time(k);
    for (Eigen::Index i = 0; i < path.dim(); ++i) os << ',' << path.values(i, k);
    os << '\n';
  }
}

void write_csv(std::ostream& os, const GroupPath& path) {
  csv_header(os, "group", path.group, path.grid, path.noise);
  const Eigen::Index m = path.values.front().rows();
  os << 't';
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c) os << ",m" << r << c;
  os << '\n';
  os.precision(17);
  for (std::int64_t k = 0; k <= path.grid.steps(); ++k) {
    os << path.grid.time(k);
    const auto& g = path.values[static_cast<std::size_t>(k)];
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index c = 0; c < m; ++c) os << ',' << g(r, c);
    os << '\n';
  }
}

AlgebraPath read_algebra_csv(std::istream& is) {
  std::string line;
  std::getline(is, line);
  if (line.rfind("# kind=algebra", 0) != 0) throw Error("read_algebra_csv: missing algebra header");
  std::istringstream hs(line.substr(2));
  std::string token, group;
  double horizon = 0.0;
  std::int64_t steps = 0;
  NoiseSpec noise;
  while (hs >> token) {
    const auto eq = token.find('=');
    const std::string key = token.substr(0, eq), value = token.substr(eq + 1);
    if (key == "group") group = value;
    else if (key == "T") horizon = std::stod(value);
    else if (key == "N") steps = std::stoll(value);
    else if (key == "seed") noise.seed = std::stoull(value);
    else if (key == "path_index") noise.path_index = std::stoull(value);
  }
  std::getline(is, line);
  const auto dim = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ','));
  AlgebraPath path{TimeGrid(horizon, steps), Eigen::MatrixXd::Zero(dim, steps + 1), group, noise};
  for (std::int64_t k = 0; k <= steps; ++k) {
    if (!std::getline(is, line)) throw Error("read_algebra_csv: truncated");
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    for (Eigen::Index i = 0; i < dim; ++i) {
      std::getline(row, cell, ',');
      path.values(i, k) = std::stod(cell);
    }
  }
  return path;
}

void write_binary(std::ostream& os, const AlgebraPath& path) {
  binary_header(os, kKindAlgebra, path.group, path.grid, path.noise, static_cast<std::uint64_t>(path.dim()));
  os.write(reinterpret_cast<const char*>(path.values.data()),
           static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(path.values.size())));
}

void write_binary(std::ostream& os, const GroupPath& path) {
  const Eigen::Index m = path.values.front().rows();
  binary_header(os, kKindGroup, path.group, path.grid, path.noise, static_cast<std::uint64_t>(m));
  for (const auto& g : path.values) {
    os.write(reinterpret_cast<const char*>(g.data()), static_cast<std::streamsize>(sizeof(double) * g.size()));
  }
}

AlgebraPath read_algebra_binary(std::istream& is) {
  const FrameHeader h = read_header(is);
  if (h.kind != kKindAlgebra) throw Error("read_algebra_binary: frame holds a group path");
  AlgebraPath path{TimeGrid(h.horizon, static_cast<std::int64_t>(h.steps)),
                   Eigen::MatrixXd(static_cast<Eigen::Index>(h.width), static_cast<Eigen::Index>(h.steps + 1)), h.group,
                   h.noise};
  is.read(reinterpret_cast<char*>(path.values.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(path.values.size())));
  if (!is) throw Error("binary path frame truncated");
  return path;
}

GroupPath read_group_binary(std::istream& is) {
  const FrameHeader h = read_header(is);
  if (h.kind != kKindGroup) throw Error("read_group_binary: frame holds an algebra path");
  GroupPath path{TimeGrid(h.horizon, static_cast<std::int64_t>(h.steps)), {}, h.group, h.noise};
  const auto m = static_cast<Eigen::Index>(h.width);
  for (std::uint64_t k = 0; k <= h.steps; ++k) {
    Eigen::MatrixXd g(m, m);
    is.read(reinterpret_cast<char*>(g.data()), static_cast<std::streamsize>(sizeof(double) * g.size()));
    if (!is) throw Error("binary path frame truncated");
    path.values.push_back(std::move(g));
  }
  return path;
}

}  // namespace skewlie
