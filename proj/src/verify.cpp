#include "levyg/verify.hpp"

#include <algorithm>
#include <cmath>

namespace levyg {

void TestFunction::prepare() {
  constexpr double kPi = 3.14159265358979323846;
  cos_a = std::cos(std::min(a, kPi));
  cos_b = b >= kPi ? -2.0 : std::cos(b);
  double lo = std::max(cos_b, -1.0), hi = cos_a;
  int n = 512;
  tab_lo = lo;
  tab_step = (hi - lo) / n;
  tab_val.resize(n + 1);
  tab_der.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    double c = std::min(std::max(lo + i * tab_step, -1.0), 1.0);
    double r = std::acos(c);
    tab_val[i] = radius_ramp(r);
    double dv = 0.0;
    if (r > a && r < b) {
      double s = (r - a) / (b - a);
      double q = 1.0 - s * s;
      double dramp = tab_val[i] * (-2.0 * s / (q * q)) / (b - a);
      double sinr = std::sqrt(std::max(1.0 - c * c, 1e-12));
      dv = dramp * (-1.0 / sinr);
    }
    tab_der[i] = dv;
  }
}

double TestFunction::eval(const GroupDescriptor& desc, const GMat& g) const {
  if (desc.kind == GroupKind::SO3) {
    GMat m = center_inv * g;
    return eval_left(desc, m, nullptr);
  }
  return radius_ramp(desc.chart_radius(center_inv * g));
}

double TestFunction::eval_left(const GroupDescriptor& desc, const GMat& Y,
                               const GMat* E) const {
  if (desc.kind == GroupKind::SO3) {
    double tr;
    if (E) {
      const double* y = Y.data();
      const double* e = E->data();
      // trace(Y * E) with both stored column major, 3x3.
      tr = y[0] * e[0] + y[3] * e[1] + y[6] * e[2] +
           y[1] * e[3] + y[4] * e[4] + y[7] * e[5] +
           y[2] * e[6] + y[5] * e[7] + y[8] * e[8];
    } else {
      tr = Y(0, 0) + Y(1, 1) + Y(2, 2);
    }
    double c = (tr - 1.0) * 0.5;
    if (c >= cos_a) return 1.0;
    if (c <= cos_b) return 0.0;
    c = c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
    if (!tab_val.empty()) {
      double x = (c - tab_lo) / tab_step;
      int i = static_cast<int>(x);
      int n = static_cast<int>(tab_val.size()) - 2;
      i = i < 0 ? 0 : (i > n ? n : i);
      double u = x - i;
      double v0 = tab_val[i], v1 = tab_val[i + 1];
      double d0 = tab_der[i] * tab_step, d1 = tab_der[i + 1] * tab_step;
      double u2 = u * u, u3 = u2 * u;
      return (2.0 * u3 - 3.0 * u2 + 1.0) * v0 + (u3 - 2.0 * u2 + u) * d0 +
             (-2.0 * u3 + 3.0 * u2) * v1 + (u3 - u2) * d1;
    }
    return radius_ramp(std::acos(c));
  }
  if (E) return radius_ramp(desc.chart_radius(Y * *E));
  return radius_ramp(desc.chart_radius(Y));
}

std::vector<TestFunction> default_function_bank(const GroupDescriptor& desc) {
  std::vector<TestFunction> out;
  TestFunction narrow;
  narrow.center_inv = desc.identity();
  narrow.a = 0.5;
  narrow.b = 1.5;
  narrow.name = "bump_e_narrow";
  out.push_back(narrow);
  TestFunction wide = narrow;
  wide.a = 0.9;
  wide.b = 2.4;
  wide.name = "bump_e_wide";
  out.push_back(wide);
  for (int j = 0; j < desc.dim; ++j) {
    for (double sgn : {1.0, -1.0}) {
      GVec v = GVec::Zero(desc.dim);
      v(j) = 0.5 * sgn;
      TestFunction f;
      f.center_inv = desc.inverse(desc.exp(v));
      f.a = 0.5;
      f.b = 1.5;
      f.name = "bump_" + std::to_string(j) + (sgn > 0 ? "p" : "m");
      out.push_back(f);
    }
  }
  return out;
}

std::vector<Conditioner> default_conditioners(const GroupDescriptor& desc) {
  std::vector<Conditioner> out;
  out.push_back({"one", [](const GroupDescriptor&, const SamplePath&, double) {
                   return 1.0;
                 }});
  for (int j = 0; j < std::min(desc.dim, 3); ++j) {
    out.push_back({"phi" + std::to_string(j) + "_at_s",
                   [j](const GroupDescriptor& g, const SamplePath& p, double s) {
                     return g.coord(p.values[static_cast<int>(
                                        std::lround(s / p.dt()))],
                                    j);
                   }});
  }
  if (desc.dim >= 2) {
    out.push_back(
        {"phi0_half_phi1_s",
         [](const GroupDescriptor& g, const SamplePath& p, double s) {
           int half = static_cast<int>(std::lround(0.5 * s / p.dt()));
           int at = static_cast<int>(std::lround(s / p.dt()));
           return g.coord(p.values[half], 0) * g.coord(p.values[at], 1);
         }});
  }
  return out;
}

MartingaleCheckConfig default_check_config(const GroupDescriptor& desc,
                                           double T) {
  MartingaleCheckConfig cfg;
  cfg.funcs = default_function_bank(desc);
  cfg.conditioners = default_conditioners(desc);
  // Window ends at fractions of T; for T = 1.4 the cut points are
  // 0, 0.5, 0.9, 1.1, 1.4, so a fixed-jump time of 1 sits strictly
  // inside the third window.
  double f0 = 5.0 / 14.0, f1 = 9.0 / 14.0, f2 = 11.0 / 14.0;
  cfg.windows = {{0.0, f0 * T}, {f0 * T, f1 * T}, {f1 * T, f2 * T}, {f2 * T, T}};
  return cfg;
}

int MartingaleChecker::idx(int v, int f, int w, int c) const {
  return ((v * static_cast<int>(cfg_.funcs.size()) + f) *
              static_cast<int>(cfg_.windows.size()) +
          w) *
             static_cast<int>(cfg_.conditioners.size()) +
         c;
}

MartingaleChecker::MartingaleChecker(const GridQuadruple& q,
                                     const GroupDescriptor& desc,
                                     MartingaleCheckConfig config)
    : MartingaleChecker(std::vector<const GridQuadruple*>{&q}, desc,
                        std::move(config)) {}

MartingaleChecker::MartingaleChecker(
    const std::vector<const GridQuadruple*>& variants,
    const GroupDescriptor& desc, MartingaleCheckConfig config)
    : desc_(&desc),
      cfg_(std::move(config)),
      T_(variants.at(0)->T),
      steps_(variants.at(0)->steps),
      nv_(static_cast<int>(variants.size())) {
  for (auto& f : cfg_.funcs) f.prepare();
  double h = cfg_.fd_step;
  int d = desc.dim;
  for (int j = 0; j < d; ++j) {
    GVec v = GVec::Zero(d);
    v(j) = h;
    sten_p_.push_back(desc.exp(v));
    sten_m_.push_back(desc.exp(GVec(-v)));
  }
  // Cross directions only for index pairs that actually occur in dA.
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      bool used = false;
      for (const GridQuadruple* q : variants)
        for (const auto& m : q->dA)
          if (std::abs(m(j, k)) > 1e-14) used = true;
      if (!used) continue;
      pair_j_.push_back(j);
      pair_k_.push_back(k);
      GVec v = GVec::Zero(d);
      v(j) = h;
      v(k) = h;
      sten_pp_.push_back(desc.exp(v));
      sten_mm_.push_back(desc.exp(GVec(-v)));
    }
  const GridQuadruple& q0 = *variants[0];
  cells_.resize(steps_);
  for (int k = 0; k < steps_; ++k) {
    CellPlan& c = cells_[k];
    for (size_t i = 0; i < q0.deta[k].atoms.size(); ++i) {
      CellPlan::Atom a;
      a.x = q0.deta[k].atoms[i];
      a.phi = desc.coords(a.x);
      c.atoms.push_back(std::move(a));
    }
    c.variant.resize(nv_);
    for (int v = 0; v < nv_; ++v) {
      const GridQuadruple& q = *variants[v];
      if (q.steps != steps_ || q.deta[k].atoms.size() != c.atoms.size())
        throw std::invalid_argument(
            "martingale check variants must share grid and jump geometry");
      VariantCell& vc = c.variant[v];
      vc.db = q.db[k];
      vc.dA = q.dA[k];
      vc.atom_w = q.deta[k].weights;
      vc.any_drift = vc.db.lpNorm<Eigen::Infinity>() > 1e-15;
      for (int j = 0; j < d; ++j)
        if (std::abs(vc.dA(j, j)) > 1e-15) vc.any_diag = true;
      for (size_t p = 0; p < pair_j_.size(); ++p)
        if (std::abs(vc.dA(pair_j_[p], pair_k_[p])) > 1e-15)
          vc.any_cross = true;
      vc.fixed = q.atom_at(q0.time(k + 1), 0.5 * q0.dt());
      if (vc.any_drift || vc.any_diag || vc.any_cross || !c.atoms.empty())
        c.any_work = true;
      if (vc.fixed) c.any_fixed = true;
    }
  }
  acc_.resize(nv_ * cfg_.funcs.size() * cfg_.windows.size() *
              cfg_.conditioners.size());
}

void MartingaleChecker::comp_cell(const CellPlan& c, const GMat& z,
                                  const GMat& z_pre_fixed,
                                  const TestFunction& f, double* out) const {
  const GroupDescriptor& g = *desc_;
  double h = cfg_.fd_step;
  int d = g.dim;
  for (int v = 0; v < nv_; ++v) out[v] = 0.0;
  if (c.any_work) {
    GMat Y = f.center_inv * z;
    double f0 = f.eval_left(g, Y, nullptr);
    double grad[kMaxDim] = {0};
    double hess[kMaxDim] = {0};
    for (int j = 0; j < d; ++j) {
      double fp = f.eval_left(g, Y, &sten_p_[j]);
      double fm = f.eval_left(g, Y, &sten_m_[j]);
      grad[j] = (fp - fm) / (2.0 * h);
      hess[j] = (fp - 2.0 * f0 + fm) / (h * h);
    }
    double cross_sym[kMaxDim * kMaxDim];
    bool cross_done = false;
    // Jump-term pieces, shared across variants with per-variant weights.
    atom_scratch_.resize(c.atoms.size());
    double* atom_jump = atom_scratch_.data();
    for (size_t i = 0; i < c.atoms.size(); ++i) {
      const auto& a = c.atoms[i];
      double fx = f.eval_left(g, Y, &a.x);
      double lin = 0.0;
      for (int j = 0; j < d; ++j) lin += a.phi(j) * grad[j];
      atom_jump[i] = fx - f0 - lin;
    }
    for (int v = 0; v < nv_; ++v) {
      const VariantCell& vc = c.variant[v];
      double total = 0.0;
      if (vc.any_drift) total += vc.db.dot(Eigen::Map<const GVec>(grad, d));
      if (vc.any_diag)
        for (int j = 0; j < d; ++j) total += 0.5 * vc.dA(j, j) * hess[j];
      if (vc.any_cross) {
        if (!cross_done) {
          for (size_t p = 0; p < pair_j_.size(); ++p) {
            double d2 = (f.eval_left(g, Y, &sten_pp_[p]) - 2.0 * f0 +
                         f.eval_left(g, Y, &sten_mm_[p])) /
                        (h * h);
            cross_sym[p] = 0.5 * (d2 - hess[pair_j_[p]] - hess[pair_k_[p]]);
          }
          cross_done = true;
        }
        for (size_t p = 0; p < pair_j_.size(); ++p)
          total += vc.dA(pair_j_[p], pair_k_[p]) * cross_sym[p];
      }
      for (size_t i = 0; i < c.atoms.size(); ++i)
        total += vc.atom_w[i] * atom_jump[i];
      out[v] = total;
    }
  }
  if (c.any_fixed) {
    GMat Y = f.center_inv * z_pre_fixed;
    double fpre = f.eval_left(g, Y, nullptr);
    for (int v = 0; v < nv_; ++v) {
      const FixedJumpAtom* fx = c.variant[v].fixed;
      if (!fx) continue;
      for (size_t i = 0; i < fx->nu.atoms.size(); ++i)
        out[v] += fx->nu.weights[i] *
                  (f.eval_left(g, Y, &fx->nu.atoms[i]) - fpre);
    }
  }
}

namespace {

const GMat* pre_fixed_at_cell(const SamplePath& p, int cell) {
  for (const auto& [jidx, v] : p.pre_fixed)
    if (p.jumps[jidx].cell == cell) return &v;
  return nullptr;
}

}  // namespace

void MartingaleChecker::add_path(const SamplePath& p) {
  int nf = static_cast<int>(cfg_.funcs.size());
  int nw = static_cast<int>(cfg_.windows.size());
  int nc = static_cast<int>(cfg_.conditioners.size());
  double dt = T_ / steps_;
  std::vector<double> comp(nv_ * nf * nw, 0.0);
  double cell_out[16];
  for (int k = 0; k < steps_; ++k) {
    double mid = (k + 0.5) * dt;
    int w = -1;
    for (int i = 0; i < nw; ++i)
      if (mid > cfg_.windows[i].first && mid < cfg_.windows[i].second) w = i;
    if (w < 0) continue;
    const CellPlan& c = cells_[k];
    const GMat* pre = c.any_fixed ? pre_fixed_at_cell(p, k) : nullptr;
    const GMat& z_pre = pre ? *pre : p.values[k + 1];
    for (int f = 0; f < nf; ++f) {
      comp_cell(c, p.values[k], z_pre, cfg_.funcs[f], cell_out);
      for (int v = 0; v < nv_; ++v)
        comp[(v * nf + f) * nw + w] += cell_out[v];
    }
  }
  for (int w = 0; w < nw; ++w) {
    double s = cfg_.windows[w].first, t = cfg_.windows[w].second;
    int si = static_cast<int>(std::lround(s / dt));
    int ti = static_cast<int>(std::lround(t / dt));
    double cond[16];
    for (int cc = 0; cc < nc; ++cc)
      cond[cc] = cfg_.conditioners[cc].eval(*desc_, p, s);
    for (int f = 0; f < nf; ++f) {
      double df = cfg_.funcs[f].eval(*desc_, p.values[ti]) -
                  cfg_.funcs[f].eval(*desc_, p.values[si]);
      for (int v = 0; v < nv_; ++v) {
        double D = df - comp[(v * nf + f) * nw + w];
        for (int cc = 0; cc < nc; ++cc) {
          Acc& a = acc_[idx(v, f, w, cc)];
          double val = D * cond[cc];
          a.n += 1;
          a.sum += val;
          a.sumsq += val * val;
        }
      }
    }
  }
}

MartingaleReport MartingaleChecker::report(int variant) const {
  MartingaleReport out;
  int nf = static_cast<int>(cfg_.funcs.size());
  int nw = static_cast<int>(cfg_.windows.size());
  int nc = static_cast<int>(cfg_.conditioners.size());
  for (int f = 0; f < nf; ++f)
    for (int w = 0; w < nw; ++w)
      for (int c = 0; c < nc; ++c) {
        const Acc& a = acc_[idx(variant, f, w, c)];
        MartingaleCell cell;
        cell.func = f;
        cell.window = w;
        cell.cond = c;
        cell.n = a.n;
        if (a.n > 1) {
          cell.mean = a.sum / a.n;
          double var = (a.sumsq / a.n - cell.mean * cell.mean) *
                       (static_cast<double>(a.n) / (a.n - 1));
          cell.se = std::sqrt(std::max(var, 0.0) / a.n);
          // Degenerate conditioners (identically zero products) count as
          // clean passes.
          cell.z = cell.se > 0.0 ? cell.mean / cell.se : 0.0;
        }
        out.max_abs_z = std::max(out.max_abs_z, std::abs(cell.z));
        out.cells.push_back(cell);
      }
  return out;
}

std::vector<double> MartingaleChecker::compensator_profile(
    const SamplePath& p, int func_index, int variant) const {
  std::vector<double> out(steps_, 0.0);
  double cell_out[16];
  for (int k = 0; k < steps_; ++k) {
    const CellPlan& c = cells_[k];
    const GMat* pre = c.any_fixed ? pre_fixed_at_cell(p, k) : nullptr;
    const GMat& z_pre = pre ? *pre : p.values[k + 1];
    comp_cell(c, p.values[k], z_pre, cfg_.funcs[func_index], cell_out);
    out[k] = cell_out[variant];
  }
  return out;
}

std::vector<double> quadruple_martingale_series(const MartingaleChecker& checker,
                                                const SamplePath& z,
                                                int func_index,
                                                const GroupDescriptor& desc) {
  const TestFunction& f = checker.config().funcs[func_index];
  std::vector<double> comp = checker.compensator_profile(z, func_index);
  std::vector<double> out(z.steps + 1);
  double acc = 0.0;
  out[0] = f.eval(desc, z.values[0]);
  for (int k = 0; k < z.steps; ++k) {
    acc += comp[k];
    out[k + 1] = f.eval(desc, z.values[k + 1]) - acc;
  }
  return out;
}

std::vector<double> shifted_martingale_series(const SamplePath& x,
                                              const ExtendedLevyTriple& triple,
                                              const TestFunction& func_in,
                                              double fd_step) {
  TestFunction f = func_in;
  f.prepare();
  const GroupDescriptor& g = triple.group;
  int d = g.dim;
  double h = fd_step;
  SamplePath z = shift_path_by_drift_inverse(x, triple.drift, g);
  std::vector<GMat> sp, sm;
  for (int j = 0; j < d; ++j) {
    GVec v = GVec::Zero(d);
    v(j) = h;
    sp.push_back(g.exp(v));
    sm.push_back(g.exp(GVec(-v)));
  }
  std::vector<GMat> spp, smm;
  std::vector<int> pj, pk;
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      pj.push_back(j);
      pk.push_back(k);
      GVec v = GVec::Zero(d);
      v(j) = h;
      v(k) = h;
      spp.push_back(g.exp(v));
      smm.push_back(g.exp(GVec(-v)));
    }
  double dt = x.dt();
  std::vector<double> out(x.steps + 1);
  out[0] = f.eval(g, z.values[0]);
  double acc = 0.0;
  for (int cell = 0; cell < x.steps; ++cell) {
    double tm = cell * dt;
    const GMat& bt = triple.drift.values[cell];
    GMat ad = g.adjoint(bt);
    GMat binv = g.inverse(bt);
    const GMat& zc = z.values[cell];
    double f0 = f.eval(g, zc);
    double grad[kMaxDim], hess[kMaxDim];
    for (int j = 0; j < d; ++j) {
      double fp = f.eval(g, zc * sp[j]);
      double fm = f.eval(g, zc * sm[j]);
      grad[j] = (fp - fm) / (2.0 * h);
      hess[j] = (fp - 2.0 * f0 + fm) / (h * h);
    }
    // [Ad(b_s) xi_j][Ad(b_s) xi_k] f dA_jk contracted through the
    // conjugated covariance increment.
    GMat dA = triple.cov.increment(tm, tm + dt);
    GMat dAbar = ad * dA * ad.transpose();
    for (int j = 0; j < d; ++j) acc += 0.5 * dAbar(j, j) * hess[j];
    for (size_t p = 0; p < pj.size(); ++p) {
      if (std::abs(dAbar(pj[p], pk[p])) < 1e-15) continue;
      double d2 = (f.eval(g, zc * spp[p]) - 2.0 * f0 + f.eval(g, zc * smm[p])) /
                  (h * h);
      double sym = 0.5 * (d2 - hess[pj[p]] - hess[pk[p]]);
      acc += dAbar(pj[p], pk[p]) * sym;
    }
    // eta^c term with argument b_s x b_s^{-1} and the phi_j(x) Ad drift
    // compensation.
    const SpatialLaw* law = triple.levy.law_at(tm + 0.5 * dt);
    double rate = triple.levy.rate_at(tm + 0.5 * dt);
    if (law && rate > 0.0) {
      const FiniteMeasure& quad = law->quadrature(g);
      for (size_t i = 0; i < quad.atoms.size(); ++i) {
        double w = rate * dt * quad.weights[i];
        GMat conj = bt * quad.atoms[i] * binv;
        GVec dir = ad * g.coords(quad.atoms[i]);
        double lin = 0.0;
        for (int j = 0; j < d; ++j) lin += dir(j) * grad[j];
        acc += w * (f.eval(g, zc * conj) - f0 - lin);
      }
    }
    // Fixed jump at the end of this cell.
    if (const FixedJumpAtom* a = triple.atom_at(tm + dt, 0.5 * dt)) {
      const GMat* pre = pre_fixed_at_cell(z, cell);
      const GMat& z_pre = pre ? *pre : z.values[cell + 1];
      GMat bm = triple.drift.at_minus(a->time);
      GMat bm_inv = g.inverse(bm);
      GMat h_inv = g.inverse(mean_of_measure(a->nu, g));
      double fpre = f.eval(g, z_pre);
      for (size_t i = 0; i < a->nu.atoms.size(); ++i)
        acc += a->nu.weights[i] *
               (f.eval(g, z_pre * (bm * a->nu.atoms[i] * h_inv * bm_inv)) -
                fpre);
    }
    out[cell + 1] = f.eval(g, z.values[cell + 1]) - acc;
  }
  return out;
}

std::vector<double> direct_martingale_series(const SamplePath& x,
                                             const ExtendedLevyTriple& triple,
                                             const TestFunction& f,
                                             double fd_step) {
  auto q = quadruple_from_triple(triple);
  MartingaleCheckConfig cfg;
  cfg.funcs = {f};
  cfg.fd_step = fd_step;
  MartingaleChecker checker(q, triple.group, cfg);
  return quadruple_martingale_series(checker, x, 0, triple.group);
}

SamplePath shift_path_by_drift_inverse(const SamplePath& x, const DriftPath& b,
                                       const GroupDescriptor& desc) {
  SamplePath z;
  z.T = x.T;
  z.steps = x.steps;
  z.values.resize(x.values.size());
  for (size_t k = 0; k < x.values.size(); ++k)
    z.values[k] = x.values[k] * desc.inverse(b.values[k]);
  z.jumps = x.jumps;
  for (const auto& [jidx, xpre] : x.pre_fixed) {
    double u = x.jumps[jidx].time;
    GMat z_pre = xpre * desc.inverse(b.at_minus(u));
    z.pre_fixed.push_back({jidx, z_pre});
    GMat z_post = z.values[x.jumps[jidx].cell + 1];
    z.jumps[jidx].factor = desc.inverse(z_pre) * z_post;
  }
  return z;
}

}  // namespace levyg
