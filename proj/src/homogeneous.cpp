#include "levyg/homogeneous.hpp"

#include <algorithm>
#include <cmath>

namespace levyg {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp1(double c) { return std::max(-1.0, std::min(1.0, c)); }

}  // namespace

SphereSpace::SphereSpace(int k_nodes) : g_(GroupDescriptor::so3()) {
  k_grid_.reserve(k_nodes);
  GVec v = GVec::Zero(3);
  for (int i = 0; i < k_nodes; ++i) {
    v(2) = 2.0 * kPi * i / k_nodes;
    k_grid_.push_back(g_.exp(v));
  }
}

XPoint SphereSpace::act(const GMat& g, const XPoint& x) const {
  XPoint y;
  for (int r = 0; r < 3; ++r)
    y(r) = g(r, 0) * x(0) + g(r, 1) * x(1) + g(r, 2) * x(2);
  return y;
}

double SphereSpace::colatitude(const XPoint& x) { return std::acos(clamp1(x(2))); }

XPoint SphereSpace::from_angles(double theta, double lambda) {
  return XPoint(std::sin(theta) * std::cos(lambda),
                std::sin(theta) * std::sin(lambda), std::cos(theta));
}

GMat SphereSpace::section(const XPoint& x, int which) const {
  double theta = colatitude(x);
  GVec v = GVec::Zero(3);
  if (theta < 1e-14) {
    // origin: identity
  } else if (theta > kPi - 1e-12) {
    v(0) = kPi;  // antipode: fixed axis convention
  } else {
    // Rotation of the origin to x about the axis origin cross x; its log
    // lies in the horizontal plane, so near the origin this is the
    // horizontal exponential chart.
    double s = theta / std::sin(theta);
    v(0) = -x(1) * s;
    v(1) = x(0) * s;
  }
  GMat S = g_.exp(v);
  if (which != 0) {
    // Same coset, nontrivial stabilizer factor on the right.  The angle
    // is quantized to 1/16 of the circle so that the direction ring of
    // the discretized second-order operator and any longitude grid whose
    // size is a multiple of 16 are mapped onto themselves; the discrete
    // sums then agree between the two sections to roundoff rather than
    // to quadrature aliasing (which can be large when a stencil strides
    // a bump edge).
    GVec w = GVec::Zero(3);
    long m = std::lround((0.8 + 0.5 * x(0)) * 16.0 / (2.0 * kPi));
    w(2) = 2.0 * kPi * double(m == 0 ? 1 : m) / 16.0;
    S = S * g_.exp(w);
  }
  return S;
}

GVec SphereSpace::coords(const XPoint& x) const {
  double theta = colatitude(x);
  GVec out = GVec::Zero(2);
  double cut = g_.bump(theta);
  if (cut == 0.0 || theta < 1e-14) return out;
  double s = theta / std::sin(theta);
  out(0) = -x(1) * s * cut;
  out(1) = x(0) * s * cut;
  return out;
}

XPoint SphereSpace::from_coords(const GVec& v) const {
  GVec w = GVec::Zero(3);
  w(0) = v(0);
  w(1) = v(1);
  return act(g_.exp(w), origin());
}

double SphereSpace::haar_average(const std::function<double(const XPoint&)>& f,
                                 const XPoint& x) const {
  double s = 0.0;
  for (const auto& k : k_grid_) s += f(act(k, x));
  return s / double(k_grid_.size());
}

double SphereSpace::equivariance_residual(const XPoint& x) const {
  GVec phi2 = coords(x);
  GVec phi3 = GVec::Zero(3);
  phi3.head(2) = phi2;
  GMat lhs_base = g_.algebra(phi3);
  double worst = 0.0;
  for (const auto& k : k_grid_) {
    GMat lhs = k * lhs_base * g_.inverse(k);  // sum phi_i(x) Ad(k) xi_i
    GVec pk = coords(act(k, x));
    GVec pk3 = GVec::Zero(3);
    pk3.head(2) = pk;
    worst = std::max(worst, (lhs - g_.algebra(pk3)).norm());
  }
  return worst;
}

double ColatitudeMixture::mass() const {
  double s = 0.0;
  for (double w : weight) s += w;
  return s;
}

double ColatitudeMixture::integrate_zonal(
    const std::function<double(double)>& f) const {
  double s = 0.0;
  for (size_t i = 0; i < colat.size(); ++i) s += weight[i] * f(colat[i]);
  return s;
}

double SphereTriple::rate_at(double t) const {
  for (const auto& p : pieces)
    if (t >= p.t0 - 1e-12 && t < p.t1 - 1e-12) return p.rate;
  if (!pieces.empty() && std::abs(t - pieces.back().t1) < 1e-12)
    return pieces.back().rate;
  return 0.0;
}

const ColatitudeMixture* SphereTriple::law_at(double t) const {
  for (const auto& p : pieces)
    if (t >= p.t0 - 1e-12 && t < p.t1 - 1e-12) return &p.law;
  if (!pieces.empty() && std::abs(t - pieces.back().t1) < 1e-12)
    return &pieces.back().law;
  return nullptr;
}

const SphereTriple::Atom* SphereTriple::atom_at(double time, double tol) const {
  for (const auto& a : atoms)
    if (std::abs(a.time - time) < tol) return &a;
  return nullptr;
}

std::vector<std::string> validate_sphere_triple(const SphereTriple& t) {
  std::vector<std::string> bad;
  if (int(t.a.size()) != t.steps + 1) bad.push_back("a grid size mismatch");
  if (!t.a.empty() && std::abs(t.a[0]) > 1e-12) bad.push_back("a(0) != 0");
  for (size_t k = 0; k + 1 < t.a.size(); ++k)
    if (t.a[k + 1] < t.a[k] - 1e-12) bad.push_back("a decreasing");
  for (const auto& p : t.pieces) {
    if (p.rate < 0.0) bad.push_back("negative rate");
    for (double th : p.law.colat)
      if (th < 0.0 || th > kPi) bad.push_back("colatitude out of range");
  }
  double prev = 0.0;
  for (const auto& a : t.atoms) {
    if (a.time <= prev || a.time > t.T) bad.push_back("atom time out of order");
    prev = a.time;
    if (std::abs(a.nu.mass() - 1.0) > 1e-9) bad.push_back("atom mass != 1");
  }
  return bad;
}

SphereSimulator::SphereSimulator(const SphereSpace& space,
                                 const SphereTriple& triple)
    : space_(&space), triple_(&triple) {}

SpherePath SphereSimulator::path(std::uint64_t seed,
                                 std::uint64_t path_index) const {
  const SphereTriple& t = *triple_;
  Philox rng(seed, path_index);
  SpherePath p;
  p.T = t.T;
  p.steps = t.steps;
  p.values.resize(t.steps + 1);
  p.values[0] = space_->origin();
  double dt = t.dt();
  GVec w(2);
  for (int k = 0; k < t.steps; ++k) {
    double tl = t.T * k / t.steps;
    double tr = t.T * (k + 1) / t.steps;
    double da = t.a[k + 1] - t.a[k];
    double sd = std::sqrt(std::max(0.0, da));
    w(0) = sd * rng.normal();
    w(1) = sd * rng.normal();
    XPoint x = space_->act(space_->section(p.values[k]), space_->from_coords(w));
    const ColatitudeMixture* law = t.law_at(tl);
    int npois = rng.poisson(t.rate_at(tl) * dt);
    for (int j = 0; j < npois && law; ++j) {
      int c = rng.categorical(law->weight.data(), int(law->weight.size()));
      double lam = 2.0 * kPi * rng.uniform();
      XPoint tau = SphereSpace::from_angles(law->colat[c], lam);
      XPoint pre = x;
      x = space_->act(space_->section(x), tau);
      p.jumps.push_back({k, false, tr, pre, x});
    }
    if (const auto* atom = t.atom_at(tr)) {
      int c = rng.categorical(atom->nu.weight.data(), int(atom->nu.weight.size()));
      double lam = 2.0 * kPi * rng.uniform();
      XPoint tau = SphereSpace::from_angles(atom->nu.colat[c], lam);
      XPoint pre = x;
      x = space_->act(space_->section(x), tau);
      p.jumps.push_back({k, true, tr, pre, x});
    }
    p.values[k + 1] = x / x.norm();
  }
  return p;
}

void SphereSimulator::ensemble(
    std::uint64_t seed, int paths,
    const std::function<void(int, const SpherePath&)>& sink) const {
  for (int i = 0; i < paths; ++i) sink(i, path(seed, std::uint64_t(i)));
}

ExtendedLevyTriple lift_triple(const SphereSpace& space, const SphereTriple& t,
                               int longitudes) {
  const GroupDescriptor& g = space.G();
  ExtendedLevyTriple out;
  out.group = g;
  // Trivial drift: every invariant point of the irreducible sphere is the
  // origin, and the lifted atom means are the identity.
  out.drift.T = t.T;
  out.drift.steps = t.steps;
  out.drift.values.assign(t.steps + 1, g.identity());
  // Covariance padded with a zero stabilizer block.
  out.cov.T = t.T;
  out.cov.steps = t.steps;
  out.cov.values.resize(t.steps + 1);
  for (int k = 0; k <= t.steps; ++k) {
    GMat A = GMat::Zero(3, 3);
    A(0, 0) = t.a[k];
    A(1, 1) = t.a[k];
    out.cov.values[k] = A;
  }
  // Conjugate-averaged jump laws: each colatitude component becomes a
  // uniform conjugation orbit, discretized in longitude.
  auto lift_mixture = [&](const ColatitudeMixture& m) {
    FiniteMeasure fm;
    GVec v = GVec::Zero(3);
    for (size_t c = 0; c < m.colat.size(); ++c) {
      if (m.colat[c] < 1e-14) {
        fm.add(g.identity(), m.weight[c]);
        continue;
      }
      for (int i = 0; i < longitudes; ++i) {
        double lam = 2.0 * kPi * i / longitudes;
        v(0) = m.colat[c] * std::cos(lam);
        v(1) = m.colat[c] * std::sin(lam);
        fm.add(g.exp(v), m.weight[c] / longitudes);
      }
    }
    return fm;
  };
  for (const auto& p : t.pieces)
    out.levy.pieces.push_back(
        {p.t0, p.t1, p.rate, SpatialLaw::discrete(lift_mixture(p.law))});
  for (const auto& a : t.atoms) out.atoms.push_back({a.time, lift_mixture(a.nu)});
  return out;
}

SpherePath project_path(const SphereSpace& space, const SamplePath& g_path) {
  SpherePath p;
  p.T = g_path.T;
  p.steps = g_path.steps;
  p.values.resize(g_path.values.size());
  for (size_t k = 0; k < g_path.values.size(); ++k)
    p.values[k] = space.act(g_path.values[k], space.origin());
  // Only fixed-time jump records carry over; their left limits are what
  // the martingale functional consumes.
  for (const auto& [jidx, pre] : g_path.pre_fixed) {
    const auto& j = g_path.jumps[jidx];
    p.jumps.push_back({j.cell, true, j.time, space.act(pre, space.origin()),
                       space.act(pre * j.factor, space.origin())});
  }
  return p;
}

double XTestFunction::eval(const XPoint& x) const {
  double ca = clamp1(center.dot(x));
  double r = std::acos(ca);
  if (r <= a) return 1.0;
  if (r >= b) return 0.0;
  double s = (r - a) / (b - a);
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

std::vector<XTestFunction> sphere_function_bank() {
  std::vector<XTestFunction> bank;
  bank.push_back({XPoint(0, 0, 1), 0.5, 1.5, "origin_narrow"});
  bank.push_back({XPoint(0, 0, 1), 0.9, 2.4, "origin_wide"});
  bank.push_back({SphereSpace::from_angles(0.7, 0.3), 0.6, 1.8, "tilt_a"});
  bank.push_back({SphereSpace::from_angles(1.2, 2.0), 0.6, 1.8, "tilt_b"});
  bank.push_back({SphereSpace::from_angles(2.2, 4.1), 0.7, 2.0, "south_east"});
  bank.push_back({XPoint(0, 0, -1), 0.6, 1.8, "antipode"});
  return bank;
}

namespace {

// Per-cell compensator increment shared by the series and the checker.
// S is the section at the frozen left endpoint; pts holds the stencil
// and jump-argument points so several functions can reuse them.
struct SphereCellGeometry {
  XPoint x;
  std::vector<XPoint> st;        // circular direction stencil through S
  std::vector<XPoint> jump_pts;  // law atoms conjugated into position
  std::vector<double> jump_w;    // weights scaled by rate * dt
  bool has_jumps = false;
};

class SphereCompensator {
 public:
  SphereCompensator(const SphereSpace& space, const SphereTriple& triple,
                    int section, double fd_step, bool irreducible_form,
                    double exclusion_eps, int longitudes)
      : space_(&space),
        triple_(&triple),
        section_(section),
        h_(fd_step),
        irreducible_(irreducible_form),
        eps_(exclusion_eps),
        L_(longitudes) {
    // Uniform circle of horizontal directions.  The circle average of the
    // second difference gives half the Laplacian, and unlike an
    // axis-aligned stencil its finite-h error is invariant (to spectral
    // accuracy) under the stabilizer rotations a section swap induces,
    // which is what makes the functional section-independent at 1e-9.
    const GroupDescriptor& g = space.G();
    GVec v = GVec::Zero(3);
    sten_.reserve(kDirs);
    for (int i = 0; i < kDirs; ++i) {
      double ang = 2.0 * kPi * i / kDirs;
      v(0) = h_ * std::cos(ang);
      v(1) = h_ * std::sin(ang);
      sten_.push_back(g.exp(v));
    }
  }

  void cell_geometry(const SpherePath& path, int k, SphereCellGeometry* geo) const {
    const SphereTriple& t = *triple_;
    double tl = t.T * k / t.steps;
    geo->x = path.values[k];
    GMat S = space_->section(geo->x, section_);
    geo->st.resize(kDirs);
    for (int i = 0; i < kDirs; ++i)
      geo->st[i] = space_->act(S * sten_[i], space_->origin());
    geo->jump_pts.clear();
    geo->jump_w.clear();
    const ColatitudeMixture* law = t.law_at(tl);
    double lam = t.rate_at(tl) * t.dt();
    geo->has_jumps = law != nullptr && lam > 0.0;
    if (!geo->has_jumps) return;
    for (size_t c = 0; c < law->colat.size(); ++c) {
      double th = law->colat[c];
      if (th <= eps_) continue;  // principal-value exclusion
      if (th < 1e-14) continue;
      for (int i = 0; i < L_; ++i) {
        double ang = 2.0 * kPi * i / L_;
        geo->jump_pts.push_back(
            space_->act(S, SphereSpace::from_angles(th, ang)));
        geo->jump_w.push_back(lam * law->weight[c] / L_);
      }
    }
  }

  // Compensator increment of f over cell k given the geometry; adds the
  // fixed-jump term when the cell ends at an atom time.
  double increment(const SpherePath& path, int k, const SphereCellGeometry& geo,
                   const XTestFunction& f) const {
    const SphereTriple& t = *triple_;
    double f0 = f.eval(geo.x);
    double ring = 0.0;
    for (const auto& p : geo.st) ring += f.eval(p);
    ring /= kDirs;
    double lap = 4.0 * (ring - f0) / (h_ * h_);
    double da = t.a[k + 1] - t.a[k];
    double comp = 0.5 * da * lap;
    if (geo.has_jumps) {
      double jsum = 0.0, wsum = 0.0;
      for (size_t i = 0; i < geo.jump_pts.size(); ++i) {
        jsum += geo.jump_w[i] * f.eval(geo.jump_pts[i]);
        wsum += geo.jump_w[i];
      }
      comp += jsum - wsum * f0;
      if (!irreducible_) {
        // First-order jump compensator: vanishes for invariant laws
        // because the coordinate sums over each orbit cancel.
        double d1 = (f.eval(geo.st[0]) - f.eval(geo.st[kDirs / 2])) / (2.0 * h_);
        double d2 =
            (f.eval(geo.st[kDirs / 4]) - f.eval(geo.st[3 * kDirs / 4])) /
            (2.0 * h_);
        double m1 = 0.0, m2 = 0.0;
        double tl = t.T * k / t.steps;
        const ColatitudeMixture* law = t.law_at(tl);
        double lam = t.rate_at(tl) * t.dt();
        for (size_t c = 0; law && c < law->colat.size(); ++c) {
          double th = law->colat[c];
          if (th <= eps_ || th < 1e-14) continue;
          for (int i = 0; i < L_; ++i) {
            double ang = 2.0 * kPi * i / L_;
            GVec phi = space_->coords(SphereSpace::from_angles(th, ang));
            double w = lam * law->weight[c] / L_;
            m1 += w * phi(0);
            m2 += w * phi(1);
          }
        }
        comp -= m1 * d1 + m2 * d2;
      }
    }
    double tr = t.T * (k + 1) / t.steps;
    if (const auto* atom = t.atom_at(tr)) {
      // Left limit just before the fixed jump of this cell.
      XPoint pre = path.values[k + 1];
      for (const auto& j : path.jumps)
        if (j.fixed && j.cell == k) pre = j.pre;
      GMat Sp = space_->section(pre, section_);
      double fpre = f.eval(pre);
      double s = 0.0;
      for (size_t c = 0; c < atom->nu.colat.size(); ++c) {
        double th = atom->nu.colat[c];
        if (th < 1e-14) continue;  // f(x o) - f(x) = 0
        double sc = 0.0;
        for (int i = 0; i < L_; ++i)
          sc += f.eval(
              space_->act(Sp, SphereSpace::from_angles(th, 2.0 * kPi * i / L_)));
        s += atom->nu.weight[c] * (sc / L_ - fpre);
      }
      comp += s;
    }
    return comp;
  }

 private:
  const SphereSpace* space_;
  const SphereTriple* triple_;
  int section_;
  double h_;
  bool irreducible_;
  double eps_;
  int L_;
  static constexpr int kDirs = 16;
  std::vector<GMat> sten_;
};

}  // namespace

std::vector<double> sphere_martingale_series(
    const SphereSpace& space, const SpherePath& path, const SphereTriple& triple,
    const XTestFunction& f, int section, double fd_step, bool irreducible_form,
    double exclusion_eps, int longitudes) {
  SphereCompensator comp(space, triple, section, fd_step, irreducible_form,
                         exclusion_eps, longitudes);
  std::vector<double> out(path.steps + 1);
  out[0] = f.eval(path.values[0]);
  double acc = 0.0;
  SphereCellGeometry geo;
  for (int k = 0; k < path.steps; ++k) {
    comp.cell_geometry(path, k, &geo);
    acc += comp.increment(path, k, geo, f);
    out[k + 1] = f.eval(path.values[k + 1]) - acc;
  }
  return out;
}

SphereCheckConfig default_sphere_check_config(double T) {
  SphereCheckConfig cfg;
  cfg.funcs = sphere_function_bank();
  cfg.windows = {{0.3 * T, 0.7 * T}, {0.7 * T, T}};
  return cfg;
}

SphereMartingaleChecker::SphereMartingaleChecker(const SphereSpace& space,
                                                 const SphereTriple& triple,
                                                 SphereCheckConfig cfg)
    : space_(&space), triple_(&triple), cfg_(std::move(cfg)) {
  acc_.resize(cfg_.funcs.size() * cfg_.windows.size() * 3);
}

void SphereMartingaleChecker::add_path(const SpherePath& path) {
  SphereCompensator comp(*space_, *triple_, 0, cfg_.fd_step, true, 0.0,
                         cfg_.longitudes);
  const size_t nf = cfg_.funcs.size(), nw = cfg_.windows.size();
  std::vector<double> window_sum(nf * nw, 0.0);
  SphereCellGeometry geo;
  for (size_t w = 0; w < nw; ++w) {
    int k0 = int(std::lround(cfg_.windows[w].first * path.steps / path.T));
    int k1 = int(std::lround(cfg_.windows[w].second * path.steps / path.T));
    for (int k = k0; k < k1; ++k) {
      comp.cell_geometry(path, k, &geo);
      for (size_t fi = 0; fi < nf; ++fi)
        window_sum[fi * nw + w] += comp.increment(path, k, geo, cfg_.funcs[fi]);
    }
    for (size_t fi = 0; fi < nf; ++fi) {
      double D = cfg_.funcs[fi].eval(path.values[k1]) -
                 cfg_.funcs[fi].eval(path.values[k0]) - window_sum[fi * nw + w];
      // Conditioners: constant, scaled colatitude at the window start,
      // first horizontal coordinate at the window start.
      double conds[3] = {1.0, SphereSpace::colatitude(path.values[k0]) / kPi,
                         space_->coords(path.values[k0])(0)};
      for (int c = 0; c < 3; ++c) {
        Acc& a = acc_[(fi * nw + w) * 3 + c];
        double v = D * conds[c];
        a.n += 1;
        a.sum += v;
        a.sumsq += v * v;
      }
    }
  }
}

MartingaleReport SphereMartingaleChecker::report() const {
  MartingaleReport rep;
  const size_t nf = cfg_.funcs.size(), nw = cfg_.windows.size();
  for (size_t fi = 0; fi < nf; ++fi)
    for (size_t w = 0; w < nw; ++w)
      for (int c = 0; c < 3; ++c) {
        const Acc& a = acc_[(fi * nw + w) * 3 + c];
        MartingaleCell cell;
        cell.func = int(fi);
        cell.window = int(w);
        cell.cond = c;
        cell.n = a.n;
        if (a.n > 1) {
          cell.mean = a.sum / a.n;
          double var = (a.sumsq - a.sum * a.sum / a.n) / (a.n - 1);
          cell.se = std::sqrt(std::max(0.0, var) / a.n);
          cell.z = cell.se > 0.0 ? cell.mean / cell.se : 0.0;
        }
        rep.max_abs_z = std::max(rep.max_abs_z, std::abs(cell.z));
        rep.cells.push_back(cell);
      }
  return rep;
}

namespace {

// Colatitude distribution of the isotropic heat semigroup at "time" a:
// density proportional to sin(theta) * sum (2l+1) e^{-l(l+1)a/2}
// P_l(cos theta), tabulated and integrated on a fixed grid.
std::vector<double> heat_cdf_table(double a, int lmax, int grid) {
  std::vector<double> dens(grid + 1), cdf(grid + 1, 0.0);
  for (int i = 0; i <= grid; ++i) {
    double th = kPi * i / grid;
    double c = std::cos(th);
    double p_prev = 1.0, p = c, s = 1.0;  // l = 0 term
    s += 3.0 * std::exp(-1.0 * a) * p;    // l = 1, l(l+1)/2 = 1
    for (int l = 1; l < lmax; ++l) {
      double p_next = ((2 * l + 1) * c * p - l * p_prev) / (l + 1);
      p_prev = p;
      p = p_next;
      s += (2 * (l + 1) + 1) * std::exp(-0.5 * (l + 1) * (l + 2) * a) * p;
    }
    dens[i] = std::max(0.0, s) * std::sin(th);
  }
  for (int i = 1; i <= grid; ++i)
    cdf[i] = cdf[i - 1] + 0.5 * (dens[i - 1] + dens[i]) * (kPi / grid);
  double total = cdf[grid];
  for (auto& v : cdf) v /= total;
  return cdf;
}

}  // namespace

double heat_colatitude_cdf(double theta, double a, int lmax) {
  const int grid = 2000;
  auto cdf = heat_cdf_table(a, lmax, grid);
  double u = std::max(0.0, std::min(kPi, theta)) * grid / kPi;
  int i = std::min(grid - 1, int(u));
  double frac = u - i;
  return cdf[i] * (1.0 - frac) + cdf[i + 1] * frac;
}

double ks_against_heat_law(std::vector<double> colats, double a) {
  std::sort(colats.begin(), colats.end());
  const int grid = 2000;
  auto cdf = heat_cdf_table(a, 80, grid);
  double ks = 0.0;
  size_t n = colats.size();
  for (size_t i = 0; i < n; ++i) {
    double u = std::max(0.0, std::min(kPi, colats[i])) * grid / kPi;
    int j = std::min(grid - 1, int(u));
    double F = cdf[j] + (u - j) * (cdf[j + 1] - cdf[j]);
    ks = std::max(ks, std::abs(F - double(i) / n));
    ks = std::max(ks, std::abs(F - double(i + 1) / n));
  }
  return ks;
}

SphereEstimator::SphereEstimator(const SphereSpace& space, double T, int cells,
                                 double ball_radius)
    : space_(&space),
      T_(T),
      cells_(cells),
      ball_(ball_radius),
      s1_(GVec::Zero(2)),
      s2_(GMat::Zero(2, 2)) {}

void SphereEstimator::add_path(const SpherePath& path) {
  int stride = path.steps / cells_;
  ++paths_;
  for (int i = 0; i < cells_; ++i) {
    GMat Sinv = space_->G().inverse(
        space_->section(path.values[size_t(i) * stride]));
    XPoint y = space_->act(Sinv, path.values[size_t(i + 1) * stride]);
    if (SphereSpace::colatitude(y) >= ball_) continue;
    GVec phi = space_->coords(y);
    s1_ += phi;
    s2_ += phi * phi.transpose();
    s1sq_ += phi.squaredNorm();
    ++count_;
  }
}

GVec SphereEstimator::mean_coords() const {
  return count_ > 0 ? GVec(s1_ / double(count_)) : GVec(GVec::Zero(2));
}

double SphereEstimator::mean_coords_se() const {
  if (count_ < 2) return 0.0;
  double var_per = s1sq_ / (2.0 * count_);  // per-axis increment variance
  return std::sqrt(var_per / count_);
}

GMat SphereEstimator::cov_estimate() const {
  if (paths_ == 0) return GMat::Zero(2, 2);
  GMat C = s2_;
  if (count_ > 0) C -= s1_ * (s1_ / double(count_)).transpose();
  return GMat(C / double(paths_));
}

double point_invariance_residual(const SphereSpace& space, const XPoint& x) {
  double worst = 0.0;
  for (const auto& k : space.k_grid())
    worst = std::max(worst, (space.act(k, x) - x).norm());
  return worst;
}

double ad_invariance_residual(const SphereSpace& space, const GMat& A2) {
  double worst = 0.0;
  for (const auto& k : space.k_grid()) {
    // Horizontal block of Ad(k) is the planar rotation by k's angle.
    double c = k(0, 0), s = k(1, 0);
    GMat R(2, 2);
    R << c, -s, s, c;
    worst = std::max(worst, (R * A2 * R.transpose() - A2).norm());
  }
  return worst;
}

double measure_invariance_residual(const SphereSpace& space,
                                   const std::vector<XPoint>& atoms,
                                   const std::vector<double>& weights) {
  auto bank = sphere_function_bank();
  double worst = 0.0;
  for (const auto& f : bank) {
    double base = 0.0;
    for (size_t i = 0; i < atoms.size(); ++i) base += weights[i] * f.eval(atoms[i]);
    for (const auto& k : space.k_grid()) {
      double s = 0.0;
      for (size_t i = 0; i < atoms.size(); ++i)
        s += weights[i] * f.eval(space.act(k, atoms[i]));
      worst = std::max(worst, std::abs(s - base));
    }
  }
  return worst;
}

}  // namespace levyg
