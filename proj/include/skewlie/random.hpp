#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>

namespace skewlie {

/// (seed, path_index) fully determines every increment of a path.
struct NoiseSpec {
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
};

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

// Independent sub-streams of one path. Tree levels use kStreamTree + level.
inline constexpr std::uint32_t kStreamIncrements = 0;
inline constexpr std::uint32_t kStreamTree = 1;

/// Fill `out` with standard normals keyed by (seed, path_index, stream, step).
/// Pure function of its arguments: identical under any thread schedule.
void standard_normals(const NoiseSpec& noise, std::uint32_t stream, std::uint64_t step, Eigen::Ref<Eigen::VectorXd> out);

/// Uniform in the open interval (0, 1) from the same counter space.
double uniform_open(const NoiseSpec& noise, std::uint32_t stream, std::uint64_t step, std::uint32_t block);

}  // namespace skewlie
