#pragma once

// Shared rotation-group test triple: smooth drift, one fixed-time jump
// measure at t = 1, linear diagonal covariance, and a three-point
// compound-Poisson jump intensity whose jumps are well separated from
// the identity.

#include "levyg/triple.hpp"

namespace levyg::testref {

inline FiniteMeasure reference_nu1(const GroupDescriptor& g) {
  FiniteMeasure nu;
  GVec a = GVec::Zero(3), b = GVec::Zero(3);
  a(0) = 0.25;
  b(0) = -0.35;
  nu.add(g.exp(a), 0.6);
  nu.add(g.exp(b), 0.4);
  return nu;
}

inline GVec reference_velocity(double t) {
  GVec v(3);
  v << 0.3, -0.2, 0.1 + 0.2 * t;
  return v;
}

inline SpatialLaw reference_jump_law(const GroupDescriptor& g) {
  FiniteMeasure m;
  GVec x1 = GVec::Zero(3), x2 = GVec::Zero(3), x3 = GVec::Zero(3);
  x1(1) = 0.5;
  x2(0) = -0.45;
  x2(2) = 0.2;
  x3(2) = 0.55;
  m.add(g.exp(x1), 0.5);
  m.add(g.exp(x2), 0.3);
  m.add(g.exp(x3), 0.2);
  return SpatialLaw::discrete(m);
}

inline ExtendedLevyTriple make_reference_triple(int steps, double T = 1.4,
                                                double rate = 1.5) {
  ExtendedLevyTriple t;
  t.group = GroupDescriptor::so3();
  t.atoms.push_back({1.0, reference_nu1(t.group)});
  t.drift = piecewise_exponential_drift(t.group, T, steps, reference_velocity,
                                        t.atoms);
  GMat a_rate = GMat::Zero(3, 3);
  a_rate(0, 0) = 0.2;
  a_rate(1, 1) = 0.2;
  a_rate(2, 2) = 0.1;
  t.cov = linear_cov(t.group, T, steps, a_rate);
  t.levy.pieces.push_back({0.0, T, rate, reference_jump_law(t.group)});
  return t;
}

}  // namespace levyg::testref
