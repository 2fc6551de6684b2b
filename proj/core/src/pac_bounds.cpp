#include "oim/pac_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "oim/errors.hpp"

namespace oim {

void BoundInputs::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw UsageError("epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw UsageError("delta must lie in (0,1)");
  if (!(n_states >= 1.0) || !(n_actions >= 1.0)) throw UsageError("state and action counts must be >= 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw UsageError("gamma must lie in [0,1)");
  if (!(r0_max > 0.0) || !std::isfinite(r0_max)) throw UsageError("r0_max must be positive");
}

namespace {

// R_max values the experiments found adequate were in the thousands.
constexpr double kPracticalRmax = 1e4;

void finish(const BoundInputs& in, BoundOutputs& o) {
  const double xa = in.n_states * in.n_actions;
  o.beta = in.r0_max / (1.0 - in.gamma) * std::sqrt(2.0 * std::log(2.0 * xa * o.sample_size / in.delta));
  o.horizon_ceil = std::ceil(o.horizon);
  o.sample_size_ceil = std::ceil(o.sample_size);
  o.step_bound_ceil = std::ceil(o.step_bound);
  if (!(o.horizon > 0.0))
    o.warnings.push_back("horizon is not positive: epsilon is too large for these inputs");
  if (o.r_max > 100.0 * kPracticalRmax) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "required R_max %.3g is far above practical values (2000-10000 sufficed in experiments)",
                  o.r_max);
    o.warnings.emplace_back(buf);
  }
}

}  // namespace

BoundOutputs theorem1_bounds(const BoundInputs& in) {
  in.validate();
  BoundOutputs o;
  o.variant = BoundVariant::theorem1;
  const double g1 = 1.0 - in.gamma, r0 = in.r0_max;
  const double xa = in.n_states * in.n_actions;
  o.epsilon1 = in.epsilon / 6.0;
  o.epsilon2 = g1 * g1 / (in.n_states * (g1 + r0)) * o.epsilon1;
  o.horizon = std::log(r0 / (o.epsilon1 * g1)) / g1;
  const double big = std::max(1.0, r0);
  o.sample_size = 2.0 * big * big / (o.epsilon2 * o.epsilon2) * std::log(8.0 / in.delta);
  o.r_max = 2.0 * r0 * r0 * std::log(2.0 * xa * o.sample_size / in.delta) / (o.epsilon1 * g1 * g1 * g1);
  o.step_bound = 2.0 * o.sample_size * xa * o.horizon * r0 / (o.epsilon1 * g1) * std::log(4.0 / in.delta);
  finish(in, o);
  o.r_max_needed = o.beta * o.beta / o.epsilon1;
  o.hypothesis_holds = o.r_max >= o.r_max_needed * (1.0 - 1e-12);
  return o;
}

BoundOutputs appendix_b_bounds(const BoundInputs& in) {
  in.validate();
  BoundOutputs o;
  o.variant = BoundVariant::appendix_b;
  const double g1 = 1.0 - in.gamma, r0 = in.r0_max;
  const double xa = in.n_states * in.n_actions;
  o.epsilon1 = in.epsilon / 6.0;
  o.epsilon2 = g1 * g1 / in.n_states * o.epsilon1;
  o.horizon = std::log(1.0 / (o.epsilon1 * g1)) / g1;
  o.sample_size = 2.0 / (o.epsilon2 * o.epsilon2) * std::log(8.0 / in.delta);
  o.r_max = 2.0 * r0 * std::log(2.0 * xa * o.sample_size / in.delta) / (o.epsilon1 * g1 * g1);
  o.step_bound = 2.0 * o.sample_size * xa * o.horizon / (o.epsilon1 * g1) * std::log(4.0 / in.delta);
  finish(in, o);
  o.r_max_needed = o.beta * o.beta / (o.epsilon1 * r0);
  o.hypothesis_holds = o.r_max >= o.r_max_needed * (1.0 - 1e-12);
  return o;
}

BoundOutputs compute_bounds(const BoundInputs& in, BoundVariant variant) {
  return variant == BoundVariant::theorem1 ? theorem1_bounds(in) : appendix_b_bounds(in);
}

namespace {

double leading_constant(const BoundInputs& in, BoundVariant v) {
  const double x = in.n_states, a = in.n_actions, r0 = in.r0_max, g1 = 1.0 - in.gamma;
  const double big = std::max(1.0, r0);
  const double logs = std::log(4.0 / in.delta) * std::log(8.0 / in.delta);
  if (v == BoundVariant::theorem1)
    return 864.0 * x * x * x * a * r0 * big * big * (g1 + r0) * (g1 + r0) *
           std::log(6.0 * r0 / (in.epsilon * g1)) * logs / std::pow(in.epsilon, 3);
  return 864.0 * x * x * x * a * std::log(6.0 / (in.epsilon * g1)) * logs / std::pow(in.epsilon, 3);
}

}  // namespace

double published_step_formula(const BoundInputs& in, BoundVariant v) {
  in.validate();
  return leading_constant(in, v) / std::pow(1.0 - in.gamma, 4);
}

double composed_step_formula(const BoundInputs& in, BoundVariant v) {
  in.validate();
  return leading_constant(in, v) / std::pow(1.0 - in.gamma, 6);
}

std::string asymptotic_report(const BoundInputs& in, BoundVariant v) {
  const BoundOutputs o = compute_bounds(in, v);
  std::string s;
  char buf[256];
  auto line = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    s += buf;
    s += '\n';
  };
  line("variant        %s", to_string(v).c_str());
  line("inputs         eps=%.6g delta=%.6g |X|=%.6g |A|=%.6g gamma=%.6g R0max=%.6g", in.epsilon,
       in.delta, in.n_states, in.n_actions, in.gamma, in.r0_max);
  line("eps1           %.10g", o.epsilon1);
  line("eps2           %.10g", o.epsilon2);
  line("H              %.10g (ceil %.0f)", o.horizon, o.horizon_ceil);
  line("m              %.10g (ceil %.0f)", o.sample_size, o.sample_size_ceil);
  line("beta           %.10g", o.beta);
  line("R_max          %.10g (needs >= %.10g: %s)", o.r_max, o.r_max_needed,
       o.hypothesis_holds ? "ok" : "VIOLATED");
  line("step bound     %.10g (ceil %.0f)", o.step_bound, o.step_bound_ceil);
  line("closed form    %.10g  [864 ... / (eps^3 (1-gamma)^6)]", composed_step_formula(in, v));
  line("as printed     %.10g  [864 ... / (eps^3 (1-gamma)^4)]", published_step_formula(in, v));
  if (v == BoundVariant::theorem1)
    s += "O-form         O(|X|^3 |A| R0^5 / (eps^3 (1-gamma)^4) ln(R0/(eps(1-gamma))) ln^2(1/delta))\n";
  else
    s += "O-form         O(|X|^3 |A| / (eps^3 (1-gamma)^4) ln(1/(eps(1-gamma))) ln^2(1/delta))\n";
  for (const auto& w : o.warnings) s += "warning        " + w + "\n";
  return s;
}

BoundVariant parse_bound_variant(const std::string& name) {
  if (name == "thm1") return BoundVariant::theorem1;
  if (name == "appxB") return BoundVariant::appendix_b;
  throw UsageError("unknown bound variant '" + name + "' (expected thm1 or appxB)");
}

std::string to_string(BoundVariant v) { return v == BoundVariant::theorem1 ? "thm1" : "appxB"; }

}  // namespace oim
