#pragma once

#include <functional>

#include "levyg/simulate.hpp"

namespace levyg {

struct EstimationConfig {
  // Partition levels as step counts on [0, T]; each must divide the
  // simulation grid.  An atom must be detected at every level.
  std::vector<int> level_steps = {140, 280, 700};
  double detect_radius = 0.12;    // "non-identity" increment radius
  double detect_threshold = 0.05; // cell probability that flags an atom
  // A flagged cell must also stand out against the level's background:
  // its frequency must exceed this multiple of the median cell frequency
  // (diffusion and Poisson tails raise every cell, an atom raises one).
  double background_factor = 3.0;
  double store_radius = 0.12;     // increments kept verbatim above this
  // Shrinking-ball radii for the covariance extraction, as fractions of
  // the coordinate plateau radius r_in.
  std::vector<double> ball_fracs = {0.5, 0.35, 0.25};
  double cluster_radius = 0.1;    // jump-law clustering scale
};

struct EstimationResult {
  GroupDescriptor group;
  double T = 0.0;
  long paths = 0;

  // Detected fixed-time jump measures (delta_e mass filled in).
  std::vector<FixedJumpAtom> atoms;

  // Product-of-cell-means drift path on the finest level.
  DriftPath drift;

  // Large increments (phi coordinates and time), the finite-activity
  // part of the jump-intensity sum.
  struct BigJump {
    double time;
    GVec phi;
    bool in_atom_cell = false;
  };
  std::vector<BigJump> big_jumps;

  // eta_n(t, f): the empirical jump-intensity measure function applied
  // to f; exact for f vanishing on the ball of store_radius.
  double eta_estimate(double t, const std::function<double(const GMat&)>& f) const;

  // Extracted covariance matrix function at time t: shrinking-ball
  // second moments with the jump-measure contributions removed and the
  // ball radius extrapolated to zero; increments eigenvalue-clipped to
  // be positive semidefinite.
  GMat cov_estimate(double t) const;

  // Modulus-of-continuity diagnostics away from detected atoms:
  // max increment of the second-moment trace (first) and of the drift
  // distance (second) over windows of the given width.
  std::pair<double, double> continuity_moduli(double window) const;

  // Internal tables filled by the estimator (finest level).
  int steps = 0;
  std::vector<double> cell_trace_by_ball;   // steps * balls, per-cell corrected
  std::vector<GMat> cell_cov_by_ball;       // steps * balls
  std::vector<GVec> cell_mean_phi;          // steps
  std::vector<double> ball_radii;
};

// Streaming implementation of the partition constructions: per level and
// cell it keeps the increment count, phi-moment sums, in-ball second
// moments, and out-of-ball counts; raw increments are stored only above
// store_radius.
class TripleEstimator {
 public:
  TripleEstimator(const GroupDescriptor& desc, double T,
                  EstimationConfig config = {});

  void add_path(const SamplePath& path);
  EstimationResult finalize() const;

 private:
  struct BallStats {
    long n = 0;
    GVec s1;
    GMat s2;
  };
  struct CellStats {
    long n = 0;
    GVec sum_phi;
    long n_big = 0;
    std::vector<BallStats> balls;
  };
  const GroupDescriptor* desc_;
  double T_;
  EstimationConfig cfg_;
  std::vector<std::vector<CellStats>> levels_;
  std::vector<EstimationResult::BigJump> big_;  // finest level
  std::vector<double> radii_;
  long paths_ = 0;
};

}  // namespace levyg
