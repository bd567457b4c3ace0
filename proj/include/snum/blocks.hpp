#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "snum/errors.hpp"
#include "snum/params.hpp"

namespace snum {

/// Truncated weighted sequence-space model: levels j <= J, annuli i <= I.
struct WeightedSequenceModel {
  EmbeddingParams params;
  int J = 0;
  int I = 0;
};

/// Dyadic annulus i at level j. `dim` is a lattice-point count, kept as a
/// double because it overflows 64-bit integers for d >= 3 at deep levels.
struct Block {
  int j = 0;
  int i = 0;
  double dim = 1;
  double sigma = 1;

  int level_sum() const noexcept { return j + i; }

  friend bool operator==(const Block&, const Block&) = default;
};

/// Radii 2^m up to these bounds are counted exactly; beyond them the rounded
/// ball volume is used.
inline constexpr int kExactCountMaxLog2Radius2d = 22;
inline constexpr int kExactCountMaxLog2Radius3d = 11;

namespace detail {

/// Largest y >= 0 with y^2 <= v.
inline std::uint64_t isqrt(std::uint64_t v) {
  auto y = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(v)));
  while (y * y > v) --y;
  while ((y + 1) * (y + 1) <= v) ++y;
  return y;
}

/// #{k in Z^2 : |k|^2 < r2}
inline std::uint64_t disk_count_below(std::uint64_t r2) {
  if (r2 == 0) return 0;
  const std::uint64_t xmax = isqrt(r2 - 1);
  std::uint64_t total = 0;
  for (std::uint64_t x = 0; x <= xmax; ++x) {
    const std::uint64_t column = 2 * isqrt(r2 - 1 - x * x) + 1;
    total += x == 0 ? column : 2 * column;
  }
  return total;
}

inline double ball_volume(int d) {
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

}  // namespace detail

/// #{k in Z^d : |k| < 2^m}. Exact for d = 1, for d = 2 up to radius
/// 2^kExactCountMaxLog2Radius2d and for d = 3 up to 2^kExactCountMaxLog2Radius3d;
/// otherwise round(V_d 2^{md}).
inline double lattice_ball_count(int d, int m) {
  if (d < 1) throw ValidationError("d", "dimension must be >= 1");
  if (m < 0) throw ValidationError("m", "radius exponent must be >= 0");
  const double R = std::ldexp(1.0, m);
  if (d == 1) return 2 * R - 1;
  if (d == 2 && m <= kExactCountMaxLog2Radius2d) {
    const auto r = static_cast<std::uint64_t>(R);
    return static_cast<double>(detail::disk_count_below(r * r));
  }
  if (d == 3 && m <= kExactCountMaxLog2Radius3d) {
    const auto r = static_cast<std::uint64_t>(R);
    std::uint64_t total = 0;
    for (std::uint64_t z = 0; z < r; ++z) {
      const std::uint64_t slab = detail::disk_count_below(r * r - z * z);
      total += z == 0 ? slab : 2 * slab;
    }
    return static_cast<double>(total);
  }
  return std::round(detail::ball_volume(d) * std::pow(R, d));
}

/// Number of lattice points in block (j, i).
inline double block_dim(int d, int j, int i) {
  if (i == 0) return lattice_ball_count(d, j);
  return lattice_ball_count(d, j + i) - lattice_ball_count(d, j + i - 1);
}

inline double block_sigma(double delta, double alpha, int j, int i) {
  return std::exp2(-j * delta - i * alpha);
}

inline void validate(const WeightedSequenceModel& m) {
  validate(m.params);
  if (m.J < 0) throw ValidationError("J", "must be >= 0");
  if (m.I < 0) throw ValidationError("I", "must be >= 0");
}

/// One block per (j, i) with j <= J, i <= I, ordered by j then i.
inline std::vector<Block> build_blocks(const WeightedSequenceModel& model) {
  validate(model);
  const auto& p = model.params;
  if (!check_compact(p)) throw NotCompactError("embedding is not compact; block sums diverge");
  const double delta = delta_of(p);
  std::vector<double> counts(static_cast<std::size_t>(model.J + model.I) + 1);
  for (std::size_t m = 0; m < counts.size(); ++m) counts[m] = lattice_ball_count(p.d, static_cast<int>(m));

  std::vector<Block> out;
  out.reserve(static_cast<std::size_t>((model.J + 1) * (model.I + 1)));
  for (int j = 0; j <= model.J; ++j)
    for (int i = 0; i <= model.I; ++i) {
      const double dim = i == 0 ? counts[j] : counts[j + i] - counts[j + i - 1];
      out.push_back({j, i, dim, block_sigma(delta, p.alpha, j, i)});
    }
  return out;
}

/// P: blocks with j + i <= M; Q: the rest. Relative order is preserved.
inline std::pair<std::vector<Block>, std::vector<Block>> split_PQ(const std::vector<Block>& blocks,
                                                                  int M) {
  if (M < 0) throw ValidationError("M", "cutoff must be >= 0");
  std::pair<std::vector<Block>, std::vector<Block>> out;
  for (const auto& b : blocks) (b.level_sum() <= M ? out.first : out.second).push_back(b);
  return out;
}

}  // namespace snum
