#pragma once

// Parameter formulas of the OIM convergence theorem and of its
// dimension-respecting variant.

#include <string>
#include <vector>

namespace oim {

enum class BoundVariant { theorem1, appendix_b };

struct BoundInputs {
  double epsilon = 0.1;
  double delta = 0.1;
  double n_states = 1;
  double n_actions = 1;
  double gamma = 0.9;
  double r0_max = 1.0;

  /// Throws UsageError unless epsilon > 0, 0 < delta < 1, sizes >= 1,
  /// 0 <= gamma < 1 and r0_max > 0.
  void validate() const;
};

struct BoundOutputs {
  BoundVariant variant = BoundVariant::theorem1;
  double epsilon1 = 0;
  double epsilon2 = 0;
  double horizon = 0;
  double sample_size = 0;  // m
  double beta = 0;
  double r_max = 0;
  double step_bound = 0;
  // ceilings of the integer-valued quantities
  double horizon_ceil = 0;
  double sample_size_ceil = 0;
  double step_bound_ceil = 0;
  /// Optimism hypothesis: R_max >= beta^2/eps1 (theorem 1) or
  /// beta^2/(eps1 R0) (appendix B). The appendix-B form holds with equality
  /// so it is checked with a relative slack of 1e-12.
  double r_max_needed = 0;
  bool hypothesis_holds = false;
  std::vector<std::string> warnings;
};

BoundOutputs theorem1_bounds(const BoundInputs& in);
BoundOutputs appendix_b_bounds(const BoundInputs& in);
BoundOutputs compute_bounds(const BoundInputs& in, BoundVariant variant);

/// Leading-order step requirement as printed in the remark after each
/// theorem: 864 |X|^3 |A| ... / (eps^3 (1-gamma)^4) times the log factors.
double published_step_formula(const BoundInputs& in, BoundVariant variant);

/// The same product derived by composing the theorem's own formulas; the
/// power of (1-gamma) is 6, not 4. Equals step_bound exactly.
double composed_step_formula(const BoundInputs& in, BoundVariant variant);

/// Human-readable side-by-side of the exact quantities and the O() form.
std::string asymptotic_report(const BoundInputs& in, BoundVariant variant = BoundVariant::theorem1);

BoundVariant parse_bound_variant(const std::string& name);
std::string to_string(BoundVariant v);

}  // namespace oim
