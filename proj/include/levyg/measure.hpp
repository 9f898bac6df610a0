#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "levyg/group.hpp"
#include "levyg/rng.hpp"

namespace levyg {

// A finite measure on G with finitely many atoms.
struct FiniteMeasure {
  std::vector<GMat> atoms;
  std::vector<double> weights;

  double mass() const;
  void add(const GMat& g, double w) {
    atoms.push_back(g);
    weights.push_back(w);
  }

  double integrate(const std::function<double(const GMat&)>& f) const;

  // Vector of integrals of the coordinate functions, mu(phi_.).
  GVec phi_moments(const GroupDescriptor& desc) const;

  FiniteMeasure normalized() const;
  GMat sample(const GroupDescriptor& desc, Philox& rng) const;
};

// phi-truncated mean exp(sum_j mu(phi_j) xi_j); mu must be a probability
// measure.
GMat mean_of_measure(const FiniteMeasure& mu, const GroupDescriptor& desc);

// Total variation distance between two finite measures whose atoms are
// identified when closer than match_radius; unmatched atoms count in
// full.
double tv_distance(const FiniteMeasure& a, const FiniteMeasure& b,
                   const GroupDescriptor& desc, double match_radius = 0.1);

// True iff the support sits inside the coordinate plateau, where
// phi = log exactly.
bool is_small(const FiniteMeasure& mu, const GroupDescriptor& desc,
              double tol = 1e-8);

// Spatial law of a jump piece: a probability measure on G that can be
// sampled exactly and integrated against through a deterministic
// finite-atom quadrature.
struct DiscreteLaw {
  FiniteMeasure atoms;  // mass 1
};
struct GaussianRdLaw {
  GVec mean;
  GMat cov;  // d x d
};
struct LaplaceRdLaw {
  GVec loc;
  GVec scale;  // per-axis
};
struct WrappedGaussianSO3Law {
  double sigma = 0.3;  // isotropic in log coordinates
};

class SpatialLaw {
 public:
  using Variant = std::variant<DiscreteLaw, GaussianRdLaw, LaplaceRdLaw, WrappedGaussianSO3Law>;

  SpatialLaw() = default;
  explicit SpatialLaw(Variant v) : v_(std::move(v)) {}
  static SpatialLaw discrete(FiniteMeasure m) { return SpatialLaw(DiscreteLaw{std::move(m)}); }

  GMat sample(const GroupDescriptor& desc, Philox& rng) const;

  // Deterministic finite-atom representation used for all integrals
  // (exact for discrete laws, quadrature for the parametric families).
  const FiniteMeasure& quadrature(const GroupDescriptor& desc) const;

  GVec phi_moments(const GroupDescriptor& desc) const {
    return quadrature(desc).phi_moments(desc);
  }

  const Variant& variant() const { return v_; }

 private:
  Variant v_;
  mutable FiniteMeasure quad_;
  mutable bool quad_ready_ = false;
};

}  // namespace levyg
