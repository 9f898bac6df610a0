#pragma once

#include "levyg/triple.hpp"

namespace levyg {

// Grid materialization of the martingale-property data (b, A, eta, nu):
// per-cell drift-component increments, covariance increments, and a
// finite-atom slice of the continuous jump intensity, plus the fixed-time
// jump measures.  Cell k covers (t_k, t_{k+1}]; integrands that depend on
// time are frozen at the cell's left endpoint.
struct GridQuadruple {
  GroupDescriptor group;
  double T = 1.0;
  int steps = 0;
  std::vector<GVec> db;               // steps entries
  std::vector<GMat> dA;               // steps entries, d x d
  std::vector<FiniteMeasure> deta;    // steps entries, mass = rate * dt
  std::vector<FixedJumpAtom> atoms;   // sorted by time

  double dt() const { return T / steps; }
  double time(int k) const { return T * k / steps; }
  const FixedJumpAtom* atom_at(double time, double tol = 1e-9) const;
};

// The quadruple of the declared process itself: b from the drift
// components, nu from the atoms.
GridQuadruple quadruple_from_triple(const ExtendedLevyTriple& triple);

// The quadruple satisfied by z_t = x_t b_t^{-1} when x_t follows the
// declared triple with drift b: covariance conjugated by Ad(b), jump
// atoms conjugated by b, drift reduced to the conjugation defect of the
// jump intensity, fixed jumps recentred by the jump-measure mean.
GridQuadruple bar_transform(const GridQuadruple& q, const DriftPath& b,
                            const GroupDescriptor& desc);

// The quadruple satisfied by z_t u_t when z_t satisfies q and u is a
// continuous drift of finite variation.
GridQuadruple transform_quadruple_by_drift(const GridQuadruple& q,
                                           const DriftPath& u,
                                           const GroupDescriptor& desc);

}  // namespace levyg
