#include <cstring>

#include <gtest/gtest.h>

#include "blimp/sweep.hpp"

namespace blimp {
namespace {

Vehicle published() { return {published_vehicle(), published_aero(), {}}; }

// Bitwise equality, so NaN payloads and signed zeros count.
bool same(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool same(const SteadySolution& a, const SteadySolution& b) {
  return same(a.theta, b.theta) && same(a.phi, b.phi) && same(a.psidot, b.psidot) &&
         same(a.V, b.V) && same(a.alpha, b.alpha) && same(a.beta, b.beta) &&
         same(a.residual_norm, b.residual_norm);
}

bool same(const AeroModel& a, const AeroModel& b) {
  for (int c = 0; c < kNumChannels; ++c) {
    if (!same(a.channels[c].c0, b.channels[c].c0) ||
        !same(a.channels[c].calpha, b.channels[c].calpha) ||
        !same(a.channels[c].cbeta, b.channels[c].cbeta)) {
      return false;
    }
  }
  return same(a.K[0], b.K[0]) && same(a.K[1], b.K[1]) && same(a.K[2], b.K[2]);
}

TEST(Grids, Sizes) {
  EXPECT_EQ(straight_grid().size(), 11u);
  EXPECT_EQ(spiral_grid().size(), 36u);
  for (const TrimCell& c : spiral_grid()) EXPECT_NEAR(newton_to_gf(c.Fl + c.Fr), 7.0, 1e-12);
  EXPECT_GE(parallel_threads(), 1);
}

TEST(Sweep, ParallelMatchesSerial) {
  std::vector<TrimCell> cells = straight_grid();
  for (const TrimCell& c : spiral_grid()) cells.push_back(c);
  cells.push_back({0.5, 0.0, 0.0});  // outside the rail: must fail the same way
  for (SolveMode mode : {SolveMode::kStraight, SolveMode::kSpiral, SolveMode::kSteady}) {
    const auto a = sweep_serial(cells, published(), mode);
    const auto b = sweep_parallel(cells, published(), mode);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      ASSERT_EQ(a[i].sol.has_value(), b[i].sol.has_value()) << i;
      EXPECT_EQ(a[i].error, b[i].error);
      if (a[i].sol) EXPECT_TRUE(same(*a[i].sol, *b[i].sol)) << i;
    }
  }
}

TEST(Sweep, ExtractAndSynthMatchSerial) {
  const Vehicle veh = published();
  std::vector<TrimCell> cells = {straight_grid()[2], spiral_grid()[5], spiral_grid()[30]};
  const auto solved = sweep_serial(cells, veh, SolveMode::kSteady);
  const auto ta = synth_trials_serial(solved, veh, 8.0);
  const auto tb = synth_trials_parallel(solved, veh, 8.0);
  ASSERT_EQ(ta.size(), tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    EXPECT_EQ(ta[i].id, tb[i].id);
    ASSERT_EQ(ta[i].samples.size(), tb[i].samples.size());
    for (std::size_t k = 0; k < ta[i].samples.size(); ++k) {
      EXPECT_TRUE(same(ta[i].samples[k].p.x(), tb[i].samples[k].p.x()));
      EXPECT_TRUE(same(ta[i].samples[k].e.psi, tb[i].samples[k].e.psi));
    }
  }
  const auto ea = extract_serial(ta, veh.params);
  const auto eb = extract_parallel(ta, veh.params);
  ASSERT_EQ(ea.size(), eb.size());
  for (std::size_t i = 0; i < ea.size(); ++i) {
    ASSERT_TRUE(ea[i].obs && eb[i].obs) << ea[i].error;
    EXPECT_TRUE(same(ea[i].obs->V, eb[i].obs->V));
    EXPECT_TRUE(same(ea[i].obs->psidot, eb[i].obs->psidot));
    EXPECT_TRUE(same(ea[i].obs->beta, eb[i].obs->beta));
  }
}

TEST(Sweep, MonteCarloMatchesSerial) {
  const Vehicle veh = published();
  std::vector<TrimCell> cells = straight_grid();
  for (const TrimCell& c : spiral_grid()) cells.push_back(c);
  std::vector<LoadSample> base;
  std::size_t i = 0;
  for (const auto& r : sweep_serial(cells, veh, SolveMode::kSteady)) {
    const TrialKind kind = i++ < 11 ? TrialKind::kStraight : TrialKind::kSpiral;
    const auto o = observation_from_solution(*r.sol, kind, r.cell.dr_x);
    base.push_back({o, invert_aero(o, veh.params)});
  }
  const auto a = monte_carlo_serial(base, veh.params, veh.params.A_ref, 4, 0.02, 1000);
  const auto b = monte_carlo_parallel(base, veh.params, veh.params.A_ref, 4, 0.02, 1000);
  ASSERT_EQ(a.size(), 4u);
  ASSERT_EQ(b.size(), 4u);
  for (std::size_t r = 0; r < a.size(); ++r) EXPECT_TRUE(same(a[r], b[r])) << r;
  EXPECT_FALSE(same(a[0], a[1]));
}

}  // namespace
}  // namespace blimp
