#pragma once

#include <string>

#include "levyg/simulate.hpp"

namespace levyg {

// Smooth compactly supported radial test function
// f(g) = ramp(||log(c^{-1} g)||) with ramp = 1 below a and 0 above b.
// Radial profiles keep evaluation down to one invariant of c^{-1}g.
struct TestFunction {
  GMat center_inv;
  double a = 0.5;
  double b = 1.5;
  std::string name;
  // Rotation-trace shortcuts; the defaults are never-taken sentinels, so
  // an unprepared function is still evaluated correctly.
  double cos_a = 2.0, cos_b = -2.0;
  // Hermite table of ramp(acos(c)) over the ramp region; built by
  // prepare() and used by every evaluator thereafter, so all martingale
  // forms see bitwise the same function.
  std::vector<double> tab_val, tab_der;
  double tab_lo = 0.0, tab_step = 0.0;

  void prepare();

  double radius_ramp(double r) const {
    if (r <= a) return 1.0;
    if (r >= b) return 0.0;
    double s = (r - a) / (b - a);
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
  }
  double eval(const GroupDescriptor& desc, const GMat& g) const;

  // Evaluation given the precomputed left product Y = center_inv * z;
  // the argument is z * E, i.e. the function is read off Y * E.  E may be
  // null for the point z itself.  Shares one matrix product across a
  // whole finite-difference stencil.
  double eval_left(const GroupDescriptor& desc, const GMat& Y,
                   const GMat* E) const;
};

// Bank of bumps at the identity (two scales) and at exp(+-0.5 xi_j).
std::vector<TestFunction> default_function_bank(const GroupDescriptor& desc);

// Bounded functions of the path up to the window start; each increment
// statistic is multiplied by the conditioner value, which probes the
// conditional-expectation form of the martingale property.
struct Conditioner {
  std::string name;
  std::function<double(const GroupDescriptor&, const SamplePath&, double s)> eval;
};

std::vector<Conditioner> default_conditioners(const GroupDescriptor& desc);

struct MartingaleCheckConfig {
  std::vector<TestFunction> funcs;
  std::vector<std::pair<double, double>> windows;
  std::vector<Conditioner> conditioners;
  double fd_step = 1e-3;
};

MartingaleCheckConfig default_check_config(const GroupDescriptor& desc, double T);

struct MartingaleCell {
  int func, window, cond;
  long n = 0;
  double mean = 0.0, se = 0.0, z = 0.0;
};

struct MartingaleReport {
  std::vector<MartingaleCell> cells;
  double max_abs_z = 0.0;
};

// Accumulates, over a stream of paths of a process z, the studentized
// means of
//   [ f(z_t) - f(z_s) - compensator(s,t] ] * conditioner(path up to s)
// where the compensator is the drift + diffusion + compensated-jump +
// fixed-jump expression of the quadruple's martingale property,
// discretized on the quadruple's own grid with the integrand frozen at
// the left endpoint of each cell.  All entries have mean zero when z
// actually has the quadruple's martingale property.
// Several variant quadruples (e.g. the declared one plus negative
// controls) may be checked in one pass over the ensemble when they share
// the grid and the continuous-jump atom geometry; the finite-difference
// stencil evaluations, by far the dominant cost, are then shared.
class MartingaleChecker {
 public:
  MartingaleChecker(const GridQuadruple& q, const GroupDescriptor& desc,
                    MartingaleCheckConfig config);
  MartingaleChecker(const std::vector<const GridQuadruple*>& variants,
                    const GroupDescriptor& desc, MartingaleCheckConfig config);

  void add_path(const SamplePath& path);
  MartingaleReport report(int variant = 0) const;
  const MartingaleCheckConfig& config() const { return cfg_; }
  int variants() const { return nv_; }

  // Per-cell compensator increments of one function along one path;
  // exposed for the exact pathwise-identity checks.
  std::vector<double> compensator_profile(const SamplePath& path,
                                          int func_index,
                                          int variant = 0) const;

 private:
  struct VariantCell {
    GVec db;
    GMat dA;
    bool any_drift = false, any_diag = false, any_cross = false;
    std::vector<double> atom_w;    // aligned with CellPlan::atoms
    const FixedJumpAtom* fixed = nullptr;
  };
  struct CellPlan {
    struct Atom {
      GMat x;
      GVec phi;
    };
    std::vector<Atom> atoms;       // shared geometry across variants
    std::vector<VariantCell> variant;
    bool any_work = false, any_fixed = false;
  };

  void comp_cell(const CellPlan& c, const GMat& z, const GMat& z_pre_fixed,
                 const TestFunction& f, double* out) const;

  const GroupDescriptor* desc_;
  MartingaleCheckConfig cfg_;
  double T_;
  int steps_;
  int nv_;
  std::vector<CellPlan> cells_;
  std::vector<GMat> sten_p_, sten_m_;    // exp(+-h xi_j)
  std::vector<GMat> sten_pp_, sten_mm_;  // exp(+-h (xi_j + xi_k)), j < k
  std::vector<int> pair_j_, pair_k_;
  // Moment accumulators per (variant, func, window, cond).
  struct Acc {
    long n = 0;
    double sum = 0.0, sumsq = 0.0;
  };
  std::vector<Acc> acc_;
  mutable std::vector<double> atom_scratch_;
  int idx(int v, int f, int w, int c) const;
};

// The shifted process z_t = x_t b_t^{-1} built pathwise from an x path;
// only values, fixed-jump records and left limits are filled in.
SamplePath shift_path_by_drift_inverse(const SamplePath& x, const DriftPath& b,
                                       const GroupDescriptor& desc);

// Time series of the martingale functional M_t f at grid times for the
// quadruple's martingale property along one z path: f(z_t) minus the
// accumulated compensator.
std::vector<double> quadruple_martingale_series(const MartingaleChecker& checker,
                                                const SamplePath& z,
                                                int func_index,
                                                const GroupDescriptor& desc);

// Same functional in the shifted form stated directly against the
// original triple: second derivatives conjugated by Ad(b_s), jump
// arguments b_s x b_s^{-1}, fixed jumps b_{u-} x h_u^{-1} b_{u-}^{-1}.
// Takes the x path, shifts it internally.  Agrees with the quadruple
// series under the bar transform to roundoff.
std::vector<double> shifted_martingale_series(const SamplePath& x,
                                              const ExtendedLevyTriple& triple,
                                              const TestFunction& f,
                                              double fd_step = 1e-3);

// The five-term functional evaluated on the x path itself (valid when
// the drift has finite variation).
std::vector<double> direct_martingale_series(const SamplePath& x,
                                             const ExtendedLevyTriple& triple,
                                             const TestFunction& f,
                                             double fd_step = 1e-3);

}  // namespace levyg
