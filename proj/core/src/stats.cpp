#include "oim/stats.hpp"

#include <cmath>

namespace oim {

SampleStats describe(std::span<const double> xs) {
  SampleStats s;
  s.n = xs.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n < 2) return s;
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  s.ci95 = 1.96 * s.std / std::sqrt(static_cast<double>(s.n));
  return s;
}

}  // namespace oim
