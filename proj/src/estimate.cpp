#include "levyg/estimate.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace levyg {

TripleEstimator::TripleEstimator(const GroupDescriptor& desc, double T,
                                 EstimationConfig config)
    : desc_(&desc), T_(T), cfg_(std::move(config)) {
  if (cfg_.level_steps.empty())
    throw std::invalid_argument("estimator needs at least one level");
  for (size_t l = 0; l + 1 < cfg_.level_steps.size(); ++l)
    if (cfg_.level_steps[l + 1] <= cfg_.level_steps[l])
      throw std::invalid_argument("partition levels must refine");
  for (double f : cfg_.ball_fracs) radii_.push_back(f * desc.r_in);
  levels_.resize(cfg_.level_steps.size());
  for (size_t l = 0; l < levels_.size(); ++l) {
    levels_[l].resize(cfg_.level_steps[l]);
    for (auto& c : levels_[l]) {
      c.sum_phi = GVec::Zero(desc.dim);
      c.balls.resize(radii_.size());
      for (auto& b : c.balls) {
        b.s1 = GVec::Zero(desc.dim);
        b.s2 = GMat::Zero(desc.dim, desc.dim);
      }
    }
  }
}

void TripleEstimator::add_path(const SamplePath& path) {
  for (int cells : cfg_.level_steps)
    if (path.steps % cells != 0)
      throw std::invalid_argument("path grid does not refine every level");
  ++paths_;
  for (size_t l = 0; l < levels_.size(); ++l) {
    int cells = cfg_.level_steps[l];
    int stride = path.steps / cells;
    for (int i = 0; i < cells; ++i) {
      GMat inc = desc_->inverse(path.values[size_t(i) * stride]) *
                 path.values[size_t(i + 1) * stride];
      GVec phi = desc_->coords(inc);
      double r = desc_->chart_radius(inc);
      CellStats& c = levels_[l][i];
      c.n += 1;
      c.sum_phi += phi;
      if (r > cfg_.detect_radius) c.n_big += 1;
      for (size_t b = 0; b < radii_.size(); ++b) {
        if (r < radii_[b]) {
          c.balls[b].n += 1;
          c.balls[b].s1 += phi;
          c.balls[b].s2 += phi * phi.transpose();
        }
      }
      if (l + 1 == levels_.size() && r >= cfg_.store_radius)
        big_.push_back({T_ * (i + 1) / cells, phi, false});
    }
  }
}

EstimationResult TripleEstimator::finalize() const {
  EstimationResult out;
  out.group = *desc_;
  out.T = T_;
  out.paths = paths_;
  out.ball_radii = radii_;
  const int d = desc_->dim;
  const int fine = cfg_.level_steps.back();
  out.steps = fine;
  out.big_jumps = big_;

  // Fixed-time jumps: a finest cell qualifies when its non-identity
  // increment frequency clears the threshold, and the enclosing cell does
  // so at every coarser level as well (a genuine atom survives refinement,
  // a heavy-tailed continuous stretch does not).
  // Per-level effective threshold: the absolute one, raised to a multiple
  // of the level's median cell frequency when diffusion or Poisson tails
  // push the whole background over it.
  std::vector<double> level_threshold(levels_.size(), cfg_.detect_threshold);
  for (size_t l = 0; l < levels_.size(); ++l) {
    std::vector<double> freq;
    for (const auto& c : levels_[l])
      freq.push_back(c.n > 0 ? double(c.n_big) / double(c.n) : 0.0);
    std::nth_element(freq.begin(), freq.begin() + freq.size() / 2, freq.end());
    level_threshold[l] = std::max(
        cfg_.detect_threshold, cfg_.background_factor * freq[freq.size() / 2]);
  }

  std::vector<int> atom_cells;
  for (int i = 0; i < fine; ++i) {
    const CellStats& c = levels_.back()[i];
    if (c.n == 0 ||
        double(c.n_big) / double(c.n) < level_threshold.back())
      continue;
    bool ok = true;
    for (size_t l = 0; l + 1 < levels_.size(); ++l) {
      // Coarser cell whose interval contains this cell's right endpoint
      // (levels refine without necessarily nesting pairwise).
      int j = ((i + 1) * cfg_.level_steps[l] + fine - 1) / fine - 1;
      const CellStats& cc = levels_[l][j];
      if (cc.n == 0 || double(cc.n_big) / double(cc.n) < level_threshold[l])
        ok = false;
    }
    if (ok) atom_cells.push_back(i);
  }

  // Empirical jump law per detected cell: greedy clustering of the stored
  // increments in phi coordinates, remainder filled at the identity.
  for (int i : atom_cells) {
    double t_cell = T_ * (i + 1) / fine;
    struct Cluster {
      GVec sum;
      long n = 0;
    };
    std::vector<Cluster> clusters;
    for (auto& bj : out.big_jumps) {
      if (std::abs(bj.time - t_cell) > 0.5 * T_ / fine) continue;
      bj.in_atom_cell = true;
      bool placed = false;
      for (auto& cl : clusters) {
        if ((bj.phi - cl.sum / double(cl.n)).norm() < cfg_.cluster_radius) {
          cl.sum += bj.phi;
          cl.n += 1;
          placed = true;
          break;
        }
      }
      if (!placed) clusters.push_back({bj.phi, 1});
    }
    std::sort(clusters.begin(), clusters.end(),
              [](const Cluster& a, const Cluster& b) { return a.n > b.n; });
    FiniteMeasure nu;
    double mass = 0.0;
    for (const auto& cl : clusters) {
      double w = double(cl.n) / double(paths_);
      nu.add(desc_->exp(cl.sum / double(cl.n)), w);
      mass += w;
    }
    if (mass < 1.0) nu.add(desc_->identity(), 1.0 - mass);
    out.atoms.push_back({t_cell, nu});
  }

  // Drift: running product of the per-cell phi-mean exponentials.  The
  // detected atoms are recorded as jumps with the law's mean as factor.
  out.drift.T = T_;
  out.drift.steps = fine;
  out.drift.values.resize(fine + 1, desc_->identity());
  out.cell_mean_phi.resize(fine, GVec::Zero(d));
  GroupAccumulator acc(*desc_);
  for (int i = 0; i < fine; ++i) {
    const CellStats& c = levels_.back()[i];
    if (c.n > 0) out.cell_mean_phi[i] = c.sum_phi / double(c.n);
    acc.multiply(desc_->exp(out.cell_mean_phi[i]));
    out.drift.values[i + 1] = desc_->renormalize(acc.value());
  }
  for (const auto& a : out.atoms)
    out.drift.jumps.push_back({a.time, mean_of_measure(a.nu, *desc_)});

  // Shrinking-ball second moments, centered at the cell mean, with the
  // in-ball jump-measure contributions removed cell by cell.
  const size_t nb = radii_.size();
  out.cell_cov_by_ball.assign(size_t(fine) * nb, GMat::Zero(d, d));
  out.cell_trace_by_ball.assign(size_t(fine) * nb, 0.0);
  for (int i = 0; i < fine; ++i) {
    const CellStats& c = levels_.back()[i];
    GVec m = out.cell_mean_phi[i];
    for (size_t b = 0; b < nb; ++b) {
      const BallStats& bs = c.balls[b];
      GMat C = (bs.s2 - m * bs.s1.transpose() - bs.s1 * m.transpose() +
                double(bs.n) * m * m.transpose()) /
               double(paths_);
      out.cell_cov_by_ball[size_t(i) * nb + b] = C;
    }
  }
  for (const auto& bj : out.big_jumps) {
    if (bj.in_atom_cell) continue;
    int i = std::min(fine - 1, int(std::lround(bj.time * fine / T_)) - 1);
    for (size_t b = 0; b < nb; ++b)
      if (bj.phi.norm() < radii_[b])
        out.cell_cov_by_ball[size_t(i) * nb + b] -=
            bj.phi * bj.phi.transpose() / double(paths_);
  }
  for (const auto& a : out.atoms) {
    int i = std::min(fine - 1, int(std::lround(a.time * fine / T_)) - 1);
    GVec h = a.nu.phi_moments(*desc_);
    for (size_t k = 0; k < a.nu.atoms.size(); ++k) {
      GVec phi = desc_->coords(a.nu.atoms[k]);
      for (size_t b = 0; b < nb; ++b)
        if (phi.norm() < radii_[b])
          out.cell_cov_by_ball[size_t(i) * nb + b] -=
              a.nu.weights[k] * (phi - h) * (phi - h).transpose();
    }
  }
  for (size_t k = 0; k < out.cell_cov_by_ball.size(); ++k)
    out.cell_trace_by_ball[k] = out.cell_cov_by_ball[k].trace();

  return out;
}

double EstimationResult::eta_estimate(
    double t, const std::function<double(const GMat&)>& f) const {
  double s = 0.0;
  for (const auto& bj : big_jumps)
    if (bj.time <= t + 1e-12) s += f(group.exp(bj.phi));
  return s / double(paths);
}

GMat EstimationResult::cov_estimate(double t) const {
  const int d = group.dim;
  const size_t nb = ball_radii.size();
  int upto = std::min<long>(steps, std::lround(t * steps / T));
  std::vector<GMat> M(nb, GMat::Zero(d, d));
  for (int i = 0; i < upto; ++i)
    for (size_t b = 0; b < nb; ++b) M[b] += cell_cov_by_ball[size_t(i) * nb + b];
  // Entrywise linear fit in the ball radius, evaluated at radius zero.
  GMat A = GMat::Zero(d, d);
  if (nb == 1) {
    A = M[0];
  } else {
    double sr = 0.0, srr = 0.0;
    for (double r : ball_radii) {
      sr += r;
      srr += r * r;
    }
    double n = double(nb);
    double det = n * srr - sr * sr;
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        double sy = 0.0, sry = 0.0;
        for (size_t b = 0; b < nb; ++b) {
          sy += M[b](j, k);
          sry += ball_radii[b] * M[b](j, k);
        }
        A(j, k) = (srr * sy - sr * sry) / det;  // intercept
      }
  }
  A = 0.5 * (A + A.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(A)};
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd clipped =
      es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return GMat(clipped);
}

std::pair<double, double> EstimationResult::continuity_moduli(
    double window) const {
  int w = std::max(1, int(std::lround(window * steps / T)));
  const size_t nb = ball_radii.size();
  std::vector<double> q(steps + 1, 0.0);
  for (int i = 0; i < steps; ++i)
    q[i + 1] = q[i] + cell_trace_by_ball[size_t(i) * nb + nb - 1];
  double mod_q = 0.0, mod_b = 0.0;
  for (int i = 0; i + w <= steps; ++i) {
    double t0 = T * i / steps, t1 = T * (i + w) / steps;
    bool has_atom = false;
    for (const auto& a : atoms)
      if (a.time > t0 + 1e-12 && a.time <= t1 + 1e-12) has_atom = true;
    if (has_atom) continue;
    mod_q = std::max(mod_q, q[i + w] - q[i]);
    mod_b = std::max(mod_b, group.distance(drift.values[i], drift.values[i + w]));
  }
  return {mod_q, mod_b};
}

}  // namespace levyg
