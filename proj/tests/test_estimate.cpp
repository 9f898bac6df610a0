#include <doctest.h>

#include <cmath>

#include "levyg/estimate.hpp"
#include "reference_triple.hpp"

using namespace levyg;

namespace {

EstimationConfig small_config() {
  EstimationConfig cfg;
  cfg.level_steps = {100, 200, 400};
  return cfg;
}

}  // namespace

TEST_CASE("driftless symmetric process estimates the identity drift") {
  auto g = GroupDescriptor::rd(2);
  ExtendedLevyTriple t;
  t.group = g;
  t.drift = piecewise_exponential_drift(g, 1.0, 400,
                                        [](double) { return GVec::Zero(2); }, {});
  GMat a_rate = GMat::Identity(2, 2) * 0.3;
  t.cov = linear_cov(g, 1.0, 400, a_rate);
  auto q = quadruple_from_triple(t);
  Simulator sim(q, g);
  TripleEstimator est(g, 1.0, small_config());
  sim.ensemble(5, 2000, [&](int, const SamplePath& p) { est.add_path(p); });
  auto r = est.finalize();
  CHECK(r.atoms.empty());
  for (int k = 0; k <= r.drift.steps; k += 50)
    CHECK(g.distance(r.drift.values[k], g.identity()) < 0.05);
}

TEST_CASE("deterministic one-parameter drift is recovered") {
  auto g = GroupDescriptor::so3();
  ExtendedLevyTriple t;
  t.group = g;
  t.drift = piecewise_exponential_drift(g, 1.0, 400, [](double) {
    GVec v = GVec::Zero(3);
    v(0) = 1.0;
    return v;
  }, {});
  t.cov = linear_cov(g, 1.0, 400, GMat::Zero(3, 3));
  auto q = quadruple_from_triple(t);
  Simulator sim(q, g);
  TripleEstimator est(g, 1.0, small_config());
  est.add_path(sim.path(1, 0));  // deterministic: one path suffices
  auto r = est.finalize();
  CHECK(r.atoms.empty());
  for (int k = 0; k <= 400; k += 80) {
    GVec v = GVec::Zero(3);
    v(0) = k / 400.0;
    CHECK(g.distance(r.drift.values[k], g.exp(v)) < 1e-6);
  }
}

TEST_CASE("pure Brownian covariance matches the declared matrix function") {
  auto g = GroupDescriptor::rd(2);
  ExtendedLevyTriple t;
  t.group = g;
  t.drift = piecewise_exponential_drift(g, 1.0, 400, [](double) {
    GVec v(2);
    v << 0.1, -0.2;
    return v;
  }, {});
  GMat a_rate(2, 2);
  a_rate << 0.3, 0.1, 0.1, 0.2;
  t.cov = linear_cov(g, 1.0, 400, a_rate);
  auto q = quadruple_from_triple(t);
  Simulator sim(q, g);
  TripleEstimator est(g, 1.0, small_config());
  sim.ensemble(7, 3000, [&](int, const SamplePath& p) { est.add_path(p); });
  auto r = est.finalize();
  CHECK(r.atoms.empty());
  GMat A1 = r.cov_estimate(1.0);
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k)
      CHECK(std::abs(A1(j, k) - a_rate(j, k)) < 0.04);
  GMat Ah = r.cov_estimate(0.5);
  CHECK(std::abs(Ah(0, 0) - 0.15) < 0.03);
}

TEST_CASE("stochastically continuous process has no detected atoms") {
  auto t = testref::make_reference_triple(400, 1.0);
  t.atoms.clear();
  t.drift = piecewise_exponential_drift(t.group, 1.0, 400,
                                        testref::reference_velocity, {});
  auto q = quadruple_from_triple(t);
  Simulator sim(q, t.group);
  TripleEstimator est(t.group, 1.0, small_config());
  sim.ensemble(13, 1500, [&](int, const SamplePath& p) { est.add_path(p); });
  CHECK(est.finalize().atoms.empty());
}

TEST_CASE("mixed process round trip on the rotation group") {
  auto t = testref::make_reference_triple(1400);
  auto q = quadruple_from_triple(t);
  Simulator sim(q, t.group);
  TripleEstimator est(t.group, t.T());  // default levels
  sim.ensemble(21, 4000, [&](int, const SamplePath& p) { est.add_path(p); });
  auto r = est.finalize();

  // The fixed-time jump measure is detected and close in total variation.
  REQUIRE(r.atoms.size() == 1);
  CHECK(r.atoms[0].time == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(tv_distance(r.atoms[0].nu, testref::reference_nu1(t.group), t.group) <=
        0.05);

  // Drift path within tolerance, jump included.
  for (double u : {0.5, 0.9, 1.0, 1.4})
    CHECK(t.group.distance(r.drift.at(u), t.drift.at(u)) < 0.05);

  // Jump-intensity integrals of functions vanishing near the identity.
  auto f1 = [&](const GMat& g) {
    return std::max(0.0, t.group.chart_radius(g) - 0.3);
  };
  auto f2 = [&](const GMat& g) {
    double c = t.group.coord(g, 2);
    return c * c * (t.group.chart_radius(g) > 0.3 ? 1.0 : 0.0);
  };
  for (auto& f : {std::function<double(const GMat&)>(f1),
                  std::function<double(const GMat&)>(f2)}) {
    double truth = 0.7 * t.levy.integrate_at(0.35, t.group, f);
    double got = r.eta_estimate(0.7, f);
    CHECK(std::abs(got - truth) < 0.08 * truth + 0.01);
  }

  // Extracted covariance trace; off-diagonals of the declared matrix are 0.
  GMat A = r.cov_estimate(1.4);
  double truth = 0.5 * 1.4;
  CHECK(std::abs(A.trace() - truth) < 0.15 * truth);
  CHECK(std::abs(A(0, 1)) < 0.05);
  CHECK(std::abs(A(1, 2)) < 0.05);

  // Continuity moduli are small away from the atom.
  auto [mod_q, mod_b] = r.continuity_moduli(0.05);
  CHECK(mod_q < 0.1);
  CHECK(mod_b < 0.2);
}
