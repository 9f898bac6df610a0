// Acceptance suite: one line per criterion, nonzero exit on any failure.
// A1 martingale z-score suite with negative controls, A2 triple
// round-trip from the same ensemble, A3 fixed-jump law recovery, A4
// abelian characteristic-function cross-check, A5 irreducible sphere,
// A6 projection/lift law equality, A7 exact pathwise identities.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <vector>

#include "levyg/homogeneous.hpp"
#include "levyg/io.hpp"
#include "reference_triple.hpp"

using namespace levyg;

namespace {

int g_failures = 0;

void outcome(const char* id, bool pass, const std::string& detail) {
  std::printf("%s: %s — %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// ---------------------------------------------------------------- A1-A3
void run_a123() {
  const int steps = 1400;  // mesh 1e-3 on [0, 1.4]
  const int M = 20000;
  auto t = testref::make_reference_triple(steps);
  const auto& g = t.group;
  auto q = quadruple_from_triple(t);

  // Negative control 1: doubled continuous jump rate.
  auto rate2 = testref::make_reference_triple(steps, 1.4, 3.0);
  auto q_rate = quadruple_from_triple(rate2);

  // Negative control 2: fixed-jump weights swapped, drift kept
  // consistent with the wrong atom so only the law is off.
  auto wrong = testref::make_reference_triple(steps);
  wrong.atoms[0].nu.weights = {0.2, 0.8};
  wrong.drift = piecewise_exponential_drift(g, 1.4, steps,
                                            testref::reference_velocity,
                                            wrong.atoms);
  auto q_nu = quadruple_from_triple(wrong);

  auto cfg = default_check_config(g, t.T());
  MartingaleChecker checker({&q, &q_rate, &q_nu}, g, cfg);
  TripleEstimator est(g, t.T(), {});

  // A3 tallies: the fixed jump factor is x_{1-}^{-1} x_1.
  const GMat ja = t.atoms[0].nu.atoms[0], jb = t.atoms[0].nu.atoms[1];
  long na = 0, nb = 0, nother = 0;

  auto t0 = std::chrono::steady_clock::now();
  Simulator sim(q, g);
  sim.ensemble(20260823, M, [&](int, const SamplePath& x) {
    checker.add_path(x);
    est.add_path(x);
    bool hit = false;
    for (const auto& j : x.jumps) {
      if (!j.fixed) continue;
      hit = true;
      if ((j.factor - ja).norm() < 1e-9)
        ++na;
      else if ((j.factor - jb).norm() < 1e-9)
        ++nb;
      else
        ++nother;
    }
    if (!hit) ++nother;  // nu_1 has no identity mass: every path jumps
  });
  double secs = elapsed_s(t0);

  // A1: >= 95% of the true-triple entries within |z| <= 4; each control
  // produces at least one entry beyond 6.
  auto rep = checker.report(0);
  int npass = 0;
  for (const auto& c : rep.cells)
    if (std::abs(c.z) <= 4.0) ++npass;
  double z1 = checker.report(1).max_abs_z;
  double z2 = checker.report(2).max_abs_z;
  bool a1 = npass >= int(0.95 * rep.cells.size()) && z1 > 6.0 && z2 > 6.0 &&
            secs <= 300.0;
  outcome("A1", a1,
          fmt("suite %d/%zu in-band (max |z| = %.2f); controls max |z| = "
              "%.1f, %.1f; ensemble %.0f s",
              npass, rep.cells.size(), rep.max_abs_z, z1, z2, secs));

  // A2: estimate the triple back from the same ensemble.
  auto r = est.finalize();
  const FixedJumpAtom* atom = nullptr;
  for (const auto& a : r.atoms)
    if (std::abs(a.time - 1.0) < 2e-3) atom = &a;
  double tv = atom ? tv_distance(atom->nu, t.atoms[0].nu, g) : 1.0;
  double tr_est = r.cov_estimate(1.0).trace();
  double tr_err = std::abs(tr_est - 0.5) / 0.5;
  int kb_est = int(std::lround(1.0 * r.drift.steps / r.T));
  int kb_true = int(std::lround(1.0 * t.drift.steps / t.T()));
  double bd = g.distance(r.drift.values[kb_est], t.drift.values[kb_true]);

  // Jump-intensity values for three bumps vanishing near the identity.
  double eta_worst = 0.0;
  int eta_n = 0;
  double t_probe = 0.98;
  for (int j = 0; j < 3; ++j) {
    GVec v = GVec::Zero(3);
    v(j) = (j == 0) ? -0.6 : 0.6;  // sit near the declared jump points
    TestFunction f;
    f.center_inv = g.inverse(g.exp(v));
    f.a = 0.2;
    f.b = 0.5;
    double truth = 0.0;
    for (int k = 0; k < steps; ++k) {
      double u = t.T() * k / steps;
      if (u >= t_probe) break;
      truth += (t.T() / steps) *
               t.levy.integrate_at(u, g, [&](const GMat& x) { return f.eval(g, x); });
    }
    if (truth < 1e-3) continue;
    double est_v =
        r.eta_estimate(t_probe, [&](const GMat& x) { return f.eval(g, x); });
    eta_worst = std::max(eta_worst, std::abs(est_v - truth) / truth);
    ++eta_n;
  }
  bool a2 = atom && tv <= 0.05 && tr_err <= 0.15 && bd <= 0.05 &&
            eta_n == 3 && eta_worst <= 0.10;
  outcome("A2", a2,
          fmt("atom %s, TV = %.3f; trace rel err = %.3f; drift dist = %.3f; "
              "eta worst rel err = %.3f over %d probes",
              atom ? "found" : "missing", tv, tr_err, bd, eta_worst, eta_n));

  // A3: empirical fixed-jump law against nu_1.
  FiniteMeasure emp;
  emp.add(ja, double(na) / M);
  emp.add(jb, double(nb) / M);
  if (nother > 0) emp.add(g.identity(), double(nother) / M);
  double tv3 = tv_distance(emp, t.atoms[0].nu, g);
  outcome("A3", tv3 <= 0.05,
          fmt("empirical law of x_{1-}^{-1} x_1: TV = %.4f (M = %d)", tv3, M));
}

// ------------------------------------------------------------------ A4
void run_a4() {
  auto g = GroupDescriptor::rd(2);
  const int steps = 500, M = 50000;
  ExtendedLevyTriple t;
  t.group = g;
  GVec shift = GVec::Zero(2);
  shift(0) = 0.4;
  FiniteMeasure nu;
  nu.add(g.exp(shift), 0.7);
  nu.add(g.identity(), 0.3);
  t.atoms.push_back({0.5, nu});
  GVec vel(2);
  vel << 0.1, -0.2;
  t.drift = piecewise_exponential_drift(t.group, 1.0, steps,
                                        [&](double) { return vel; }, t.atoms);
  t.cov = linear_cov(g, 1.0, steps, GMat::Identity(2, 2));
  GVec j1 = GVec::Zero(2), j2 = GVec::Zero(2);
  j1(0) = 1.0;
  j2(1) = -0.8;
  FiniteMeasure law;
  law.add(g.exp(j1), 0.6);
  law.add(g.exp(j2), 0.4);
  t.levy.pieces.push_back({0.0, 1.0, 1.0, SpatialLaw::discrete(law)});

  auto q = quadruple_from_triple(t);
  Simulator sim(q, g);
  // Empirical characteristic function of x_1 on a 5 x 5 frequency grid.
  std::vector<double> freqs = {-2.0, -1.0, 0.0, 1.0, 2.0};
  double re[25] = {}, im[25] = {};
  sim.ensemble(41, M, [&](int, const SamplePath& p) {
    const GMat& m = p.values.back();
    double x0 = m(0, 2), x1 = m(1, 2);  // translation block
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b) {
        double ph = freqs[a] * x0 + freqs[b] * x1;
        re[a * 5 + b] += std::cos(ph);
        im[a * 5 + b] += std::sin(ph);
      }
  });

  // Exact exponent: drift and jump compensator, Gaussian part, compound
  // Poisson part; times the fixed-jump factor.
  double mean0 = 0.1 - (0.6 * 1.0), mean1 = -0.2 - (0.4 * -0.8);
  double worst = 0.0;
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) {
      double u0 = freqs[a], u1 = freqs[b];
      double cp_re = 0.6 * std::cos(u0 * 1.0) + 0.4 * std::cos(u1 * -0.8) - 1.0;
      double cp_im = 0.6 * std::sin(u0 * 1.0) + 0.4 * std::sin(u1 * -0.8);
      double mod = std::exp(-0.5 * (u0 * u0 + u1 * u1) + cp_re);
      double arg = u0 * mean0 + u1 * mean1 + cp_im;
      double ex_re = mod * std::cos(arg), ex_im = mod * std::sin(arg);
      double at_re = 0.7 * std::cos(u0 * 0.4) + 0.3;
      double at_im = 0.7 * std::sin(u0 * 0.4);
      double cf_re = ex_re * at_re - ex_im * at_im;
      double cf_im = ex_re * at_im + ex_im * at_re;
      double dr = re[a * 5 + b] / M - cf_re, di = im[a * 5 + b] / M - cf_im;
      worst = std::max(worst, std::hypot(dr, di));
    }
  outcome("A4", worst <= 0.02,
          fmt("ECF vs exact exponent on 5x5 grid: max modulus error = %.4f "
              "(M = %d)",
              worst, M));
}

// ------------------------------------------------------------------ A5
void run_a5() {
  SphereSpace sp;
  SphereTriple t;
  t.T = 1.0;
  t.steps = 500;
  t.a.resize(501);
  for (int k = 0; k <= 500; ++k) t.a[k] = 0.4 * k / 500.0;
  SphereSimulator sim(sp, t);
  SphereEstimator est(sp, 1.0, 250);
  std::vector<double> colats;
  sim.ensemble(77, 8000, [&](int, const SpherePath& p) {
    est.add_path(p);
    colats.push_back(SphereSpace::colatitude(p.values.back()));
  });
  double ks = ks_against_heat_law(colats, 0.4);
  GVec m = est.mean_coords();
  double se = est.mean_coords_se();
  double mc = std::max(std::abs(m(0)), std::abs(m(1)));
  GMat A = est.cov_estimate();
  double tr = A.trace();
  double aniso = (A - 0.5 * tr * GMat::Identity(2, 2)).norm() / tr;
  bool pass = ks <= 0.02 && mc <= 3.0 * se && aniso <= 0.1;
  outcome("A5", pass,
          fmt("anisotropy = %.3f; |mean coords| = %.4f (3 sigma = %.4f); "
              "colatitude KS = %.4f",
              aniso, mc, 3.0 * se, ks));
}

// ------------------------------------------------------------------ A6
void run_a6() {
  SphereSpace sp;
  SphereTriple t;
  t.T = 1.0;
  t.steps = 400;
  t.a.resize(401);
  for (int k = 0; k <= 400; ++k) t.a[k] = 0.3 * k / 400;
  t.pieces.push_back({0.0, 1.0, 1.0, {{0.8, 1.7}, {0.7, 0.3}}});
  t.atoms.push_back({0.6, {{0.0, 0.9}, {0.5, 0.5}}});

  auto lifted = lift_triple(sp, t);
  auto q = quadruple_from_triple(lifted);
  Simulator gsim(q, sp.G());
  SphereSimulator xsim(sp, t);
  auto bank = sphere_function_bank();
  const int M = 2500;
  std::vector<int> cells = {200, 400};  // t = 0.5, 1.0
  double sum[2][6][2] = {}, sumsq[2][6][2] = {};
  gsim.ensemble(5150, M, [&](int, const SamplePath& gp) {
    for (size_t fi = 0; fi < bank.size(); ++fi)
      for (size_t ci = 0; ci < cells.size(); ++ci) {
        double v = bank[fi].eval(sp.act(gp.values[cells[ci]], sp.origin()));
        sum[0][fi][ci] += v;
        sumsq[0][fi][ci] += v * v;
      }
  });
  xsim.ensemble(6160, M, [&](int, const SpherePath& xp) {
    for (size_t fi = 0; fi < bank.size(); ++fi)
      for (size_t ci = 0; ci < cells.size(); ++ci) {
        double v = bank[fi].eval(xp.values[cells[ci]]);
        sum[1][fi][ci] += v;
        sumsq[1][fi][ci] += v * v;
      }
  });
  double worst = 0.0;
  for (size_t fi = 0; fi < bank.size(); ++fi)
    for (size_t ci = 0; ci < cells.size(); ++ci) {
      double m0 = sum[0][fi][ci] / M, m1 = sum[1][fi][ci] / M;
      double v0 = (sumsq[0][fi][ci] - M * m0 * m0) / (M - 1);
      double v1 = (sumsq[1][fi][ci] - M * m1 * m1) / (M - 1);
      double z = (m0 - m1) / std::sqrt(v0 / M + v1 / M + 1e-300);
      worst = std::max(worst, std::abs(z));
    }
  outcome("A6", worst <= 4.0,
          fmt("lift-project vs direct, 6 functions x t in {0.5, 1}: "
              "max |z| = %.2f (M = %d per stream)",
              worst, M));
}

// ------------------------------------------------------------------ A7
void run_a7() {
  std::vector<std::string> parts;
  bool pass = true;
  auto record = [&](const char* name, double value, double bound,
                    const char* unit = "") {
    bool ok = value <= bound;
    pass = pass && ok;
    parts.push_back(fmt("%s = %.2e%s%s", name, value, unit, ok ? "" : " (!)"));
  };

  // Bar-transform pathwise identity.
  {
    auto t = testref::make_reference_triple(140);
    auto q = quadruple_from_triple(t);
    auto qbar = bar_transform(q, t.drift, t.group);
    MartingaleCheckConfig cfg;
    cfg.funcs = default_function_bank(t.group);
    MartingaleChecker checker(qbar, t.group, cfg);
    Simulator sim(q, t.group);
    double worst = 0.0;
    for (std::uint64_t idx = 0; idx < 5; ++idx) {
      SamplePath x = sim.path(77, idx);
      SamplePath z = shift_path_by_drift_inverse(x, t.drift, t.group);
      for (size_t fi = 0; fi < cfg.funcs.size(); ++fi) {
        auto a = shifted_martingale_series(x, t, cfg.funcs[fi]);
        auto b = quadruple_martingale_series(checker, z, int(fi), t.group);
        for (size_t k = 0; k < a.size(); ++k)
          worst = std::max(worst, std::abs(a[k] - b[k]));
      }
    }
    record("bar_transform", worst, 1e-9);
  }

  // Jump surgery is bit-exact.
  {
    auto t = testref::make_reference_triple(140);
    auto q = quadruple_from_triple(t);
    Simulator sim(q, t.group);
    double worst = 1.0;
    for (std::uint64_t idx = 0; idx < 20; ++idx) {
      SamplePath p = sim.path(55, idx);
      if (p.jumps.size() < 2) continue;
      std::vector<GMat> before = p.values;
      auto removed = remove_jump(p, 0, t.group);
      insert_jump(p, removed, t.group);
      worst = 0.0;
      for (size_t k = 0; k < before.size(); ++k)
        worst = std::max(worst,
                         double((p.values[k] - before[k]).cwiseAbs().maxCoeff()));
      break;
    }
    record("jump_surgery", worst, 0.0);
  }

  // Section-independence of the homogeneous-space functional.
  {
    SphereSpace sp;
    SphereTriple t;
    t.T = 1.0;
    t.steps = 200;
    t.a.resize(201);
    for (int k = 0; k <= 200; ++k) t.a[k] = 0.3 * k / 200.0;
    t.pieces.push_back({0.0, 1.0, 1.0, {{0.8, 1.7}, {0.7, 0.3}}});
    t.atoms.push_back({0.6, {{0.0, 0.9}, {0.5, 0.5}}});
    SphereSimulator sim(sp, t);
    auto bank = sphere_function_bank();
    double worst = 0.0;
    for (std::uint64_t idx = 0; idx < 3; ++idx) {
      SpherePath p = sim.path(31, idx);
      for (const auto& f : bank) {
        auto s0 = sphere_martingale_series(sp, p, t, f, 0);
        auto s1 = sphere_martingale_series(sp, p, t, f, 1);
        for (size_t k = 0; k < s0.size(); ++k)
          worst = std::max(worst, std::abs(s0[k] - s1[k]));
      }
    }
    record("section_independence", worst, 1e-9);
  }

  // Ad homomorphism, exp/log, drift components.
  {
    double worst_ad = 0.0, worst_exp = 0.0;
    for (const auto& g : {GroupDescriptor::so3(), GroupDescriptor::se2()}) {
      Philox rng(13, 0);
      for (int i = 0; i < 30; ++i) {
        GVec v(g.dim), w(g.dim);
        for (int j = 0; j < g.dim; ++j) {
          v(j) = 1.2 * (rng.uniform() - 0.5);
          w(j) = 1.2 * (rng.uniform() - 0.5);
        }
        GMat a = g.exp(v), b = g.exp(w);
        worst_ad = std::max(
            worst_ad, double((g.adjoint(a * b) - g.adjoint(a) * g.adjoint(b))
                                 .norm()));
        worst_exp = std::max(worst_exp, double((g.log(g.exp(v)) - v).norm()));
      }
    }
    record("ad_homomorphism", worst_ad, 1e-9);
    record("exp_log", worst_exp, 1e-8);
  }
  {
    auto t = testref::make_reference_triple(140);
    auto comps = drift_path_to_components(t.drift, t.group);
    auto back = components_to_drift_path(comps, t.group);
    double worst = 0.0;
    for (int k = 0; k <= t.drift.steps; ++k)
      worst = std::max(worst,
                       t.group.distance(back.values[k], t.drift.values[k]));
    record("drift_components", worst, 1e-6);
  }

  std::string detail;
  for (size_t i = 0; i < parts.size(); ++i)
    detail += (i ? "; " : "") + parts[i];
  outcome("A7", pass, detail);
}

}  // namespace

int main() {
  run_a123();
  run_a4();
  run_a5();
  run_a6();
  run_a7();
  return g_failures;
}
