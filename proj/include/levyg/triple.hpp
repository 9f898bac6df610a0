#pragma once

#include <optional>
#include <string>
#include <vector>

#include "levyg/measure.hpp"

namespace levyg {

// Right-continuous drift path with left limits on [0, T], given on a
// uniform grid together with an explicit list of its jump times.  The
// value at a jump time is the post-jump value; the pre-jump value is the
// previous grid value.
struct DriftPath {
  double T = 1.0;
  int steps = 0;                 // grid is t_k = k T / steps
  std::vector<GMat> values;      // steps + 1 entries, values[0] = identity
  struct Jump {
    double time;
    GMat factor;                 // b_{t-}^{-1} b_t
  };
  std::vector<Jump> jumps;       // sorted by time, times on the grid

  double dt() const { return T / steps; }
  double time(int k) const { return T * k / steps; }
  // Value at t (right-continuous step interpolation on the grid).
  const GMat& at(double t) const;
  // Left limit: at a jump time the jump factor is stripped off.
  GMat at_minus(double t) const;
};

// Continuous nondecreasing matrix function A(t) with A(0) = 0, stored at
// grid times and interpolated linearly.  Increments over grid cells must
// be positive semidefinite.
struct CovMatrixFunction {
  double T = 1.0;
  int steps = 0;
  std::vector<GMat> values;      // steps + 1 entries, d x d, values[0] = 0

  GMat at(double t) const;
  GMat increment(double t0, double t1) const { return at(t1) - at(t0); }
};

// Continuous part of the jump intensity: piecewise-in-time finite
// activity, each piece a rate times a spatial probability law.  The
// measure of [s,t] x B is the integral of rate(u) * law_u(B).
struct LevyPiece {
  double t0 = 0.0, t1 = 1.0;
  double rate = 0.0;
  SpatialLaw law;
};

struct LevyMeasureFunctionC {
  std::vector<LevyPiece> pieces;  // disjoint in time, ordered

  double rate_at(double t) const;
  const SpatialLaw* law_at(double t) const;
  // Integral of f against the spatial law at time t, scaled by rate(t).
  double integrate_at(double t, const GroupDescriptor& desc,
                      const std::function<double(const GMat&)>& f) const;
  GVec phi_moments_at(double t, const GroupDescriptor& desc) const;
};

// Fixed-time atoms: eta({u} x .) for the finitely many u where it is
// nonzero.  nu_u is the probability measure eta({u} x .) filled up with
// mass at the identity.
struct FixedJumpAtom {
  double time;
  FiniteMeasure nu;              // mass 1, may include an identity atom
};

struct ExtendedLevyTriple {
  GroupDescriptor group;
  DriftPath drift;
  CovMatrixFunction cov;
  LevyMeasureFunctionC levy;
  std::vector<FixedJumpAtom> atoms;  // sorted by time

  double T() const { return drift.T; }
  const FixedJumpAtom* atom_at(double time, double tol = 1e-12) const;

  // Mean of nu_u, exp(sum_j nu_u(phi_j) xi_j); identity off atom times.
  GMat jump_mean(double time) const;
};

// Structural checks: grids consistent, drift starts at the identity and
// its jumps equal the means of the declared atoms, A(0) = 0 with psd
// increments, atom masses equal 1.  Returns human-readable violations.
std::vector<std::string> validate_extended_triple(const ExtendedLevyTriple& triple);

// Component functions b_j(t) of the drift: b_t = b_{t_k} exp(sum_j
// (b_j(t_{k+1}) - b_j(t_k)) xi_j) step by step, with jump factors taken
// out separately.  Continuous piece only; jumps are reported as is.
struct DriftComponents {
  double T = 1.0;
  int steps = 0;
  std::vector<GVec> values;      // steps + 1 entries, values[0] = 0
  std::vector<DriftPath::Jump> jumps;
};

DriftComponents drift_path_to_components(const DriftPath& path,
                                         const GroupDescriptor& desc);
DriftPath components_to_drift_path(const DriftComponents& comps,
                                   const GroupDescriptor& desc);

// Pointwise inverse path t -> b_t^{-1}.
DriftPath inverse_path(const DriftPath& path, const GroupDescriptor& desc);

// Helpers to build the common cases.
DriftPath piecewise_exponential_drift(const GroupDescriptor& desc, double T,
                                      int steps,
                                      const std::function<GVec(double)>& velocity,
                                      const std::vector<FixedJumpAtom>& atoms);

CovMatrixFunction linear_cov(const GroupDescriptor& desc, double T, int steps,
                             const GMat& rate_matrix);

}  // namespace levyg
