#include <gtest/gtest.h>

#include <cmath>

#include "oim/errors.hpp"
#include "oim/pac_bounds.hpp"
#include "oim/rng.hpp"
#include "pac_golden.hpp"

using namespace oim;

namespace {

std::array<double, 7> fields(const BoundOutputs& o) {
  return {o.epsilon1, o.epsilon2, o.horizon, o.sample_size, o.beta, o.r_max, o.step_bound};
}

BoundInputs random_inputs(Rng& rng) {
  BoundInputs in;
  in.epsilon = 0.01 + rng.uniform();
  in.delta = 0.01 + 0.9 * rng.uniform();
  in.n_states = static_cast<double>(1 + rng.below(50));
  in.n_actions = static_cast<double>(1 + rng.below(8));
  in.gamma = 0.99 * rng.uniform();
  in.r0_max = 0.1 + 10.0 * rng.uniform();
  return in;
}

void expect_sig10(double got, double want, const char* what) {
  EXPECT_LE(std::abs(got - want), 5e-10 * std::abs(want)) << what << " got " << got;
}

}  // namespace

TEST(PacBounds, MatchHighPrecisionReference) {
  static const char* names[] = {"eps1", "eps2", "H", "m", "beta", "R_max", "steps"};
  for (const auto& c : golden::kCases) {
    const BoundInputs in{c.epsilon, c.delta, c.n_states, c.n_actions, c.gamma, c.r0_max};
    const auto t = fields(theorem1_bounds(in));
    const auto b = fields(appendix_b_bounds(in));
    for (std::size_t i = 0; i < 7; ++i) {
      expect_sig10(t[i], c.thm1[i], names[i]);
      expect_sig10(b[i], c.appx_b[i], names[i]);
    }
  }
}

TEST(PacBounds, Examples) {
  const BoundInputs in{0.6, 0.1, 10, 2, 0.9, 1.0};
  const auto o = theorem1_bounds(in);
  EXPECT_DOUBLE_EQ(o.epsilon1, 0.1);
  EXPECT_NEAR(o.horizon, 10.0 * std::log(100.0), 1e-12);
  EXPECT_EQ(o.sample_size_ceil, std::ceil(o.sample_size));
  EXPECT_EQ(o.step_bound_ceil, std::ceil(o.step_bound));
  EXPECT_GE(o.step_bound_ceil, o.step_bound);
}

TEST(PacBounds, OptimismHypothesisHoldsEverywhere) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto in = random_inputs(rng);
    const auto t = theorem1_bounds(in);
    EXPECT_GE(t.r_max * t.epsilon1, t.beta * t.beta);
    EXPECT_TRUE(t.hypothesis_holds);
    const auto b = appendix_b_bounds(in);
    EXPECT_TRUE(b.hypothesis_holds);
    for (double v : fields(t)) EXPECT_GT(v, 0.0);
  }
}

TEST(PacBounds, Monotonicity) {
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    const auto in = random_inputs(rng);
    for (auto variant : {BoundVariant::theorem1, BoundVariant::appendix_b}) {
      const auto base = compute_bounds(in, variant);
      auto e = in;
      e.epsilon *= 1.0 + rng.uniform();
      const auto eo = compute_bounds(e, variant);
      EXPECT_LE(eo.step_bound, base.step_bound);
      EXPECT_LE(eo.sample_size, base.sample_size);
      auto d = in;
      d.delta += (0.999 - in.delta) * rng.uniform();
      EXPECT_LE(compute_bounds(d, variant).step_bound, base.step_bound);
      auto g = in;
      g.gamma += (0.999 - in.gamma) * rng.uniform();
      EXPECT_GE(compute_bounds(g, variant).horizon, base.horizon);
    }
  }
}

TEST(PacBounds, SampleSizeComposesTheConcentrationLemma) {
  Rng rng(13);
  for (int i = 0; i < 200; ++i) {
    const auto in = random_inputs(rng);
    const auto o = theorem1_bounds(in);
    const double g1 = 1.0 - in.gamma;
    const double e2 = g1 * g1 / (in.n_states * (g1 + in.r0_max)) * in.epsilon / 6.0;
    const double big = std::max(1.0, in.r0_max);
    EXPECT_NEAR(o.sample_size, 2.0 * big * big / (e2 * e2) * std::log(8.0 / in.delta),
                1e-12 * o.sample_size);
  }
}

TEST(PacBounds, DimensionRespectingScaling) {
  const BoundInputs in{0.3, 0.1, 6, 3, 0.9, 1.5};
  auto twice = in;
  twice.r0_max *= 2;
  const auto a = appendix_b_bounds(in), b = appendix_b_bounds(twice);
  EXPECT_NEAR(b.r_max, 2.0 * a.r_max, 1e-12 * b.r_max);
  EXPECT_EQ(a.sample_size, b.sample_size);
  EXPECT_EQ(a.horizon, b.horizon);
}

TEST(PacBounds, StepFormulas) {
  Rng rng(14);
  for (int i = 0; i < 200; ++i) {
    const auto in = random_inputs(rng);
    for (auto v : {BoundVariant::theorem1, BoundVariant::appendix_b}) {
      const auto o = compute_bounds(in, v);
      EXPECT_NEAR(composed_step_formula(in, v), o.step_bound, 1e-9 * o.step_bound);
      const double g1 = 1.0 - in.gamma;
      EXPECT_NEAR(published_step_formula(in, v), o.step_bound * g1 * g1, 1e-9 * o.step_bound);
    }
  }
  const BoundInputs in{0.2, 0.1, 5, 2, 0.9, 1.0};
  auto x2 = in;
  x2.n_states *= 2;
  EXPECT_NEAR(published_step_formula(x2, BoundVariant::theorem1),
              8.0 * published_step_formula(in, BoundVariant::theorem1), 1e-6);
  auto half = in;
  half.epsilon /= 2;
  EXPECT_GE(published_step_formula(half, BoundVariant::theorem1),
            8.0 * published_step_formula(in, BoundVariant::theorem1));
}

TEST(PacBounds, ReportShowsTheExactStepBound) {
  const BoundInputs in{0.1, 0.05, 5, 3, 0.95, 2.0};
  const auto report = asymptotic_report(in);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", theorem1_bounds(in).step_bound);
  EXPECT_NE(report.find(buf), std::string::npos) << report;
  EXPECT_NE(report.find("warning"), std::string::npos);
}

TEST(PacBounds, DomainErrors) {
  EXPECT_THROW(theorem1_bounds({0.0, 0.1, 2, 2, 0.9, 1}), UsageError);
  EXPECT_THROW(theorem1_bounds({0.1, 1.0, 2, 2, 0.9, 1}), UsageError);
  EXPECT_THROW(theorem1_bounds({0.1, 0.1, 0, 2, 0.9, 1}), UsageError);
  EXPECT_THROW(appendix_b_bounds({0.1, 0.1, 2, 2, 1.0, 1}), UsageError);
  EXPECT_THROW(appendix_b_bounds({0.1, 0.1, 2, 2, 0.9, 0}), UsageError);
  EXPECT_THROW(parse_bound_variant("thm2"), UsageError);
}
