#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace oim {

/// Mean, sample standard deviation and the normal-approximation 95%
/// half-width 1.96 s / sqrt(n). The interval needs n >= 2.
struct SampleStats {
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;
  std::optional<double> ci95;
};

/// Sums in index order so results do not depend on how samples were
/// produced.
SampleStats describe(std::span<const double> xs);

}  // namespace oim
