#include <doctest.h>

#include <cmath>

#include "levyg/simulate.hpp"
#include "reference_triple.hpp"

using namespace levyg;

TEST_CASE("quadruple materialization sums back to the triple") {
  auto t = testref::make_reference_triple(140);
  auto q = quadruple_from_triple(t);
  REQUIRE(q.steps == 140);
  GVec b_sum = GVec::Zero(3);
  GMat a_sum = GMat::Zero(3, 3);
  for (int k = 0; k < q.steps; ++k) {
    b_sum += q.db[k];
    a_sum += q.dA[k];
    CHECK(q.deta[k].mass() == doctest::Approx(1.5 * q.dt()));
  }
  auto comps = drift_path_to_components(t.drift, t.group);
  CHECK((b_sum - comps.values.back()).norm() < 1e-12);
  CHECK((a_sum - t.cov.values.back()).norm() < 1e-12);
  REQUIRE(q.atoms.size() == 1);
  CHECK(q.atoms[0].time == doctest::Approx(1.0));
}

TEST_CASE("transforms reduce to the identity for a trivial drift") {
  auto t = testref::make_reference_triple(70);
  t.atoms.clear();  // keep the fixed-jump recentring out of this check
  t.drift = piecewise_exponential_drift(t.group, 1.4, 70,
                                        testref::reference_velocity, {});
  auto q = quadruple_from_triple(t);

  DriftPath trivial;
  trivial.T = 1.4;
  trivial.steps = 70;
  trivial.values.assign(71, t.group.identity());

  auto bar = bar_transform(q, trivial, t.group);
  auto moved = transform_quadruple_by_drift(q, trivial, t.group);
  for (int k = 0; k < q.steps; ++k) {
    CHECK(bar.db[k].norm() < 1e-12);  // the conjugation defect vanishes
    CHECK((bar.dA[k] - q.dA[k]).norm() < 1e-12);
    CHECK((moved.db[k] - q.db[k]).norm() < 1e-12);
    CHECK((moved.dA[k] - q.dA[k]).norm() < 1e-12);
    for (size_t i = 0; i < q.deta[k].atoms.size(); ++i) {
      CHECK((bar.deta[k].atoms[i] - q.deta[k].atoms[i]).norm() < 1e-12);
      CHECK((moved.deta[k].atoms[i] - q.deta[k].atoms[i]).norm() < 1e-12);
    }
  }
}

TEST_CASE("translation-group ensemble matches declared moments") {
  // On a vector group the log coordinates of the path are Gaussian with
  // mean b(t) and covariance A(t) when there are no jumps.
  auto g = GroupDescriptor::rd(2);
  ExtendedLevyTriple t;
  t.group = g;
  t.drift = piecewise_exponential_drift(
      g, 1.0, 100,
      [](double) {
        GVec v(2);
        v << 0.4, -0.3;
        return v;
      },
      {});
  GMat rate = GMat::Zero(2, 2);
  rate << 0.25, 0.1, 0.1, 0.16;
  t.cov = linear_cov(g, 1.0, 100, rate);
  auto q = quadruple_from_triple(t);
  Simulator sim(q, g);

  int n = 20000;
  GVec mean = GVec::Zero(2);
  GMat cov = GMat::Zero(2, 2);
  sim.ensemble(42, n, [&](int, const SamplePath& p) {
    GVec v = g.log(p.values.back());
    mean += v;
    cov += v * v.transpose();
  });
  mean /= n;
  cov = cov / n - mean * mean.transpose();
  GVec want(2);
  want << 0.4, -0.3;
  // Standard errors: sqrt(A_jj / n) ~ 0.0035.
  CHECK((mean - want).lpNorm<Eigen::Infinity>() < 0.012);
  CHECK((cov - rate).lpNorm<Eigen::Infinity>() < 0.02);
}

TEST_CASE("jump counts and fixed-jump frequencies") {
  auto t = testref::make_reference_triple(140);
  auto q = quadruple_from_triple(t);
  Simulator sim(q, t.group);
  int n = 4000;
  double total_poisson = 0.0;
  int first_atom = 0;
  sim.ensemble(7, n, [&](int, const SamplePath& p) {
    int fixed = 0;
    for (const auto& j : p.jumps) {
      if (!j.fixed) total_poisson += 1.0;
      if (j.fixed) {
        ++fixed;
        CHECK(j.time == doctest::Approx(1.0));
        GVec v = t.group.log(j.factor);
        if (v(0) > 0) ++first_atom;
      }
    }
    CHECK(fixed == 1);
  });
  double mean_count = total_poisson / n;
  // rate * T = 1.5 * 1.4 = 2.1, sd of the mean ~ sqrt(2.1/4000) ~ 0.023.
  CHECK(std::abs(mean_count - 2.1) < 0.1);
  CHECK(std::abs(static_cast<double>(first_atom) / n - 0.6) < 0.03);
}

TEST_CASE("paths are reproducible by key") {
  auto t = testref::make_reference_triple(140);
  auto q = quadruple_from_triple(t);
  Simulator sim(q, t.group);
  SamplePath a = sim.path(123, 17);
  SamplePath b = sim.path(123, 17);
  REQUIRE(a.values.size() == b.values.size());
  for (size_t k = 0; k < a.values.size(); ++k)
    CHECK((a.values[k] - b.values[k]).norm() == 0.0);
  SamplePath c = sim.path(123, 18);
  CHECK((a.values.back() - c.values.back()).norm() > 0.0);
}

TEST_CASE("jump surgery is bit exact") {
  auto t = testref::make_reference_triple(140);
  auto q = quadruple_from_triple(t);
  Simulator sim(q, t.group);
  // Find a path with at least one Poisson jump.
  for (std::uint64_t idx = 0; idx < 20; ++idx) {
    SamplePath p = sim.path(55, idx);
    if (p.jumps.size() < 2) continue;
    std::vector<GMat> before = p.values;
    size_t pick = 0;
    auto removed = remove_jump(p, pick, t.group);
    // The path actually changed.
    CHECK((p.values.back() - before.back()).norm() > 0.0);
    insert_jump(p, removed, t.group);
    REQUIRE(p.values.size() == before.size());
    for (size_t k = 0; k < before.size(); ++k) {
      CHECK((p.values[k] - before[k]).cwiseAbs().maxCoeff() == 0.0);
    }
    return;
  }
  FAIL("no path with jumps found");
}

TEST_CASE("left limits at the fixed jump") {
  auto t = testref::make_reference_triple(140);
  auto q = quadruple_from_triple(t);
  Simulator sim(q, t.group);
  SamplePath p = sim.path(9, 3);
  for (size_t j = 0; j < p.jumps.size(); ++j) {
    if (!p.jumps[j].fixed) continue;
    const GMat& pre = p.at_minus_fixed(static_cast<int>(j));
    GMat post = pre * p.jumps[j].factor;
    // The fixed jump is the last event in its cell.
    CHECK((post - p.values[p.jumps[j].cell + 1]).norm() < 1e-14);
  }
}
