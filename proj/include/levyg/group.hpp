#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "levyg/linalg.hpp"

namespace levyg {

struct OutOfChartError : std::runtime_error {
  explicit OutOfChartError(const std::string& what) : std::runtime_error(what) {}
};

enum class GroupKind { SO3, SE2, RD, Circle };

// A matrix Lie group in its defining representation, together with the
// chart data the triple calculus needs: a basis of the Lie algebra,
// exp/log, Ad, a left-invariant metric surrogate, and the cutoff
// coordinate functions phi_j (bump-truncated log coordinates).
class GroupDescriptor {
 public:
  static GroupDescriptor so3();
  static GroupDescriptor se2();
  static GroupDescriptor rd(int d);
  static GroupDescriptor circle();
  static GroupDescriptor by_name(const std::string& name, int d = 0);

  GroupKind kind;
  std::string name;
  int dim;   // d, dimension of the Lie algebra
  int n;     // matrix size of the defining representation
  std::vector<GMat> basis;
  double r_in;    // bump plateau radius
  double r_out;   // bump support radius
  double r_cut;   // chart validity radius

  GMat identity() const { return GMat::Identity(n, n); }

  // Sum_j v_j xi_j as a matrix.
  GMat algebra(const GVec& v) const;

  GMat exp(const GVec& v) const;

  // Inverse of exp near the identity; throws OutOfChartError at the
  // chart boundary (e.g. SO(3) angle >= pi).
  GVec log(const GMat& g) const;

  GMat inverse(const GMat& g) const;

  // ||log g|| where defined, otherwise a value >= r_out.  Total, cheap,
  // and exact inside the chart; used to gate the bump without a full log.
  double chart_radius(const GMat& g) const;

  // Smooth cutoff: 1 on [0, r_in], 0 on [r_out, inf).
  double bump(double t) const;

  // phi_.(g) = bump(||log g||) * log g.  Total on G.
  GVec coords(const GMat& g) const;
  double coord(const GMat& g, int j) const { return coords(g)(j); }

  // d x d matrix of Ad(g): g xi_k g^{-1} = sum_j Ad_{jk} xi_j.
  GMat adjoint(const GMat& g) const;

  // Left-invariant metric: ||log(g^{-1}h)|| in-chart, monotone surrogate
  // beyond (pi-capped angle for SO(3), Euclidean-plus-angle for SE(2)).
  double distance(const GMat& g, const GMat& h) const;

  double membership_residual(const GMat& g) const;
  GMat renormalize(const GMat& g) const;

  GroupDescriptor() = default;   // inert until assigned from a factory

 private:
  void finish();                 // precompute the basis projector
  Eigen::MatrixXd basis_pinv_;   // d x n^2, maps vec(M) to basis coefficients
};

// Running product that re-projects onto the group manifold periodically so
// long products keep a small membership residual.
class GroupAccumulator {
 public:
  explicit GroupAccumulator(const GroupDescriptor& desc)
      : desc_(&desc), value_(desc.identity()) {}

  void multiply(const GMat& g) {
    value_ = value_ * g;
    if (++count_ % 64 == 0) value_ = desc_->renormalize(value_);
  }

  const GMat& value() const { return value_; }

 private:
  const GroupDescriptor* desc_;
  GMat value_;
  long count_ = 0;
};

}  // namespace levyg
