#include "skewlie/random.hpp"

#include <cmath>
#include <stdexcept>

namespace skewlie {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::array<std::uint32_t, 4> block(const NoiseSpec& noise, std::uint32_t stream, std::uint64_t step,
                                   std::uint32_t index) {
  if (step > 0xFFFFFFFFull || index > 0xFFFFu || stream > 0xFFFFu) {
    throw std::out_of_range("standard_normals: counter field overflow");
  }
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(step), index | (stream << 16),
      static_cast<std::uint32_t>(noise.path_index), static_cast<std::uint32_t>(noise.path_index >> 32)};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(noise.seed),
                                            static_cast<std::uint32_t>(noise.seed >> 32)};
  return philox4x32(ctr, key);
}

// 53-bit uniform strictly inside (0, 1).
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

void standard_normals(const NoiseSpec& noise, std::uint32_t stream, std::uint64_t step, Eigen::Ref<Eigen::VectorXd> out) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  const Eigen::Index n = out.size();
  for (Eigen::Index pair = 0; 2 * pair < n; ++pair) {
    const auto r = block(noise, stream, step, static_cast<std::uint32_t>(pair));
    const double u1 = to_open_unit(r[0], r[1]);
    const double u2 = to_open_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    out(2 * pair) = radius * std::cos(kTwoPi * u2);
    if (2 * pair + 1 < n) out(2 * pair + 1) = radius * std::sin(kTwoPi * u2);
  }
}

double uniform_open(const NoiseSpec& noise, std::uint32_t stream, std::uint64_t step, std::uint32_t index) {
  const auto r = block(noise, stream, step, index);
  return to_open_unit(r[0], r[1]);
}

}  // namespace skewlie
