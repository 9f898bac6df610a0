#pragma once

#include "levyg/estimate.hpp"
#include "levyg/verify.hpp"

namespace levyg {

// Point of the sphere S^2, the rotation group modulo rotations about the
// vertical axis, stored as the unit vector g * o.
using XPoint = Eigen::Vector3d;

// S^2 as a quotient of the rotation group: origin at the north pole, the
// stabilizer generated by the third basis element, and the horizontal
// plane spanned by the first two as the invariant complement.  The
// stabilizer's normalized invariant measure is a uniform circle grid.
class SphereSpace {
 public:
  explicit SphereSpace(int k_nodes = 256);

  const GroupDescriptor& G() const { return g_; }
  int n() const { return 2; }  // dimension of the horizontal subspace
  XPoint origin() const { return XPoint(0.0, 0.0, 1.0); }
  const std::vector<GMat>& k_grid() const { return k_grid_; }

  XPoint act(const GMat& g, const XPoint& x) const;

  static double colatitude(const XPoint& x);

  // Point at colatitude theta and longitude lambda.
  static XPoint from_angles(double theta, double lambda);

  // Section maps: index 0 rotates the origin to x about the axis
  // (origin x x), which near the origin is the horizontal exponential
  // chart; index 1 composes a nontrivial stabilizer factor on the right
  // and exists only to demonstrate section-independence.  The antipode
  // uses a fixed axis.
  GMat section(const XPoint& x, int which = 0) const;

  // Cutoff horizontal coordinates: x = exp(phi_1 xi_1 + phi_2 xi_2) * o
  // inside the chart plateau.
  GVec coords(const XPoint& x) const;
  XPoint from_coords(const GVec& v) const;

  // Average of f over the stabilizer orbit of x.
  double haar_average(const std::function<double(const XPoint&)>& f,
                      const XPoint& x) const;

  // Residual of the coordinate equivariance sum phi_i(x) Ad(k) xi_i =
  // sum phi_i(kx) xi_i, maximized over the stabilizer grid.
  double equivariance_residual(const XPoint& x) const;

 private:
  GroupDescriptor g_;
  std::vector<GMat> k_grid_;
};

// Invariant laws on the sphere: mixtures of uniform colatitude circles
// (colatitude zero meaning the origin itself).
struct ColatitudeMixture {
  std::vector<double> colat;
  std::vector<double> weight;
  double mass() const;
  double integrate_zonal(const std::function<double(double)>& f) const;
};

// Triple on the irreducible sphere: no drift, isotropic covariance
// a(t) I, finite-activity invariant jump intensity, invariant fixed-time
// jump laws (mass 1, the origin component included).
struct SphereLevyPiece {
  double t0 = 0.0, t1 = 1.0;
  double rate = 0.0;
  ColatitudeMixture law;
};

struct SphereTriple {
  double T = 1.0;
  int steps = 0;
  std::vector<double> a;  // steps + 1 grid values, a[0] = 0, nondecreasing
  std::vector<SphereLevyPiece> pieces;
  struct Atom {
    double time;
    ColatitudeMixture nu;  // mass 1
  };
  std::vector<Atom> atoms;

  double dt() const { return T / steps; }
  double rate_at(double t) const;
  const ColatitudeMixture* law_at(double t) const;
  const Atom* atom_at(double time, double tol = 1e-12) const;
};

std::vector<std::string> validate_sphere_triple(const SphereTriple& t);

struct SpherePath {
  double T = 1.0;
  int steps = 0;
  std::vector<XPoint> values;  // steps + 1
  struct Jump {
    int cell;
    bool fixed;
    double time;
    XPoint pre;   // value just before the jump
    XPoint post;  // value just after
  };
  std::vector<Jump> jumps;

  double dt() const { return T / steps; }
  double time(int k) const { return T * k / steps; }
  // Left limit at fixed-jump index j of the jumps list.
  const XPoint& at_minus_fixed(int j) const { return jumps[j].pre; }
};

// Direct simulation on the sphere through section products: per cell a
// horizontal Gaussian exponential step, then Poisson jumps from the
// invariant law (uniform longitude), then the fixed jump.
class SphereSimulator {
 public:
  SphereSimulator(const SphereSpace& space, const SphereTriple& triple);
  SpherePath path(std::uint64_t seed, std::uint64_t path_index) const;
  void ensemble(std::uint64_t seed, int paths,
                const std::function<void(int, const SpherePath&)>& sink) const;

 private:
  const SphereSpace* space_;
  const SphereTriple* triple_;
};

// Lift of an invariant sphere triple to the rotation group: trivial
// drift, covariance padded with a zero stabilizer block, jump laws
// averaged over conjugation (uniform circle orbits discretized at the
// given number of longitudes).
ExtendedLevyTriple lift_triple(const SphereSpace& space, const SphereTriple& t,
                               int longitudes = 64);

// Pointwise action of a group path on the origin.
SpherePath project_path(const SphereSpace& space, const SamplePath& g_path);

// Zonal-type bump test functions f(x) = ramp(angle between x and c).
struct XTestFunction {
  XPoint center;
  double a = 0.6, b = 1.8;
  std::string name;
  double eval(const XPoint& x) const;
};
std::vector<XTestFunction> sphere_function_bank();

// Martingale functional time series on one sphere path, products through
// the chosen section map.  The full form carries the first-order jump
// compensator; with an invariant jump intensity that term vanishes to
// quadrature roundoff, which is what the irreducible form exploits.
// exclusion_eps excludes jumps with colatitude <= eps from the
// compensator (the principal-value construction); with finite activity
// away from the origin the series is eps-independent.
std::vector<double> sphere_martingale_series(const SphereSpace& space,
                                             const SpherePath& path,
                                             const SphereTriple& triple,
                                             const XTestFunction& f,
                                             int section = 0,
                                             double fd_step = 1e-3,
                                             bool irreducible_form = false,
                                             double exclusion_eps = 0.0,
                                             int longitudes = 128);

// Ensemble z-score report for the sphere martingale property, same cell
// layout as the group-level checker (func x window x conditioner).
struct SphereCheckConfig {
  std::vector<XTestFunction> funcs;
  std::vector<std::pair<double, double>> windows;
  int longitudes = 128;
  double fd_step = 1e-3;
};
SphereCheckConfig default_sphere_check_config(double T);

class SphereMartingaleChecker {
 public:
  SphereMartingaleChecker(const SphereSpace& space, const SphereTriple& triple,
                          SphereCheckConfig cfg);
  void add_path(const SpherePath& path);
  MartingaleReport report() const;

 private:
  const SphereSpace* space_;
  const SphereTriple* triple_;
  SphereCheckConfig cfg_;
  struct Acc {
    long n = 0;
    double sum = 0.0, sumsq = 0.0;
  };
  std::vector<Acc> acc_;  // funcs x windows x 3 conditioners
};

// Colatitude distribution function of the isotropic heat semigroup run
// for "time" a, by Legendre series truncation.
double heat_colatitude_cdf(double theta, double a, int lmax = 80);

// Kolmogorov-Smirnov distance of sampled colatitudes against the heat
// law (sorts a copy).
double ks_against_heat_law(std::vector<double> colats, double a);

// Streaming estimator of the sphere triple's isotropic parts from an
// ensemble of direct paths: per-cell horizontal-coordinate moments.
class SphereEstimator {
 public:
  SphereEstimator(const SphereSpace& space, double T, int cells,
                  double ball_radius = 0.25);
  void add_path(const SpherePath& path);
  GVec mean_coords() const;       // averaged drift coordinates, should be 0
  double mean_coords_se() const;  // its standard error scale
  GMat cov_estimate() const;      // 2x2 extracted covariance at T
  long increments() const { return count_; }

 private:
  const SphereSpace* space_;
  double T_;
  int cells_;
  double ball_;
  GVec s1_;
  GMat s2_;
  double s1sq_ = 0.0;
  long count_ = 0;
  long paths_ = 0;
};

// Invariance residuals (exact objects, quadrature-grid maxima).
double point_invariance_residual(const SphereSpace& space, const XPoint& x);
double ad_invariance_residual(const SphereSpace& space, const GMat& A2);
double measure_invariance_residual(const SphereSpace& space,
                                   const std::vector<XPoint>& atoms,
                                   const std::vector<double>& weights);

}  // namespace levyg
