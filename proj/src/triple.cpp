#include "levyg/triple.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace levyg {

namespace {

int grid_index(double t, double T, int steps, bool round_down) {
  double x = t / T * steps;
  int k = round_down ? static_cast<int>(std::floor(x + 1e-9))
                     : static_cast<int>(std::ceil(x - 1e-9));
  return std::clamp(k, 0, steps);
}

}  // namespace

const GMat& DriftPath::at(double t) const {
  return values[grid_index(t, T, steps, true)];
}

GMat DriftPath::at_minus(double t) const {
  int k = grid_index(t, T, steps, true);
  GMat v = values[k];
  for (const auto& j : jumps)
    if (std::abs(j.time - t) < 1e-9 * T) v = v * j.factor.inverse();
  return v;
}

GMat CovMatrixFunction::at(double t) const {
  if (t <= 0.0) return values.front() * 0.0;
  if (t >= T) return values.back();
  double x = t / T * steps;
  int k = static_cast<int>(std::floor(x));
  double frac = x - k;
  if (k >= steps) return values.back();
  return (1.0 - frac) * values[k] + frac * values[k + 1];
}

double LevyMeasureFunctionC::rate_at(double t) const {
  for (const auto& p : pieces)
    if (t >= p.t0 - 1e-12 && t < p.t1 - 1e-12) return p.rate;
  if (!pieces.empty() && std::abs(t - pieces.back().t1) < 1e-12)
    return pieces.back().rate;
  return 0.0;
}

const SpatialLaw* LevyMeasureFunctionC::law_at(double t) const {
  for (const auto& p : pieces)
    if (t >= p.t0 - 1e-12 && t < p.t1 - 1e-12) return &p.law;
  if (!pieces.empty() && std::abs(t - pieces.back().t1) < 1e-12)
    return &pieces.back().law;
  return nullptr;
}

double LevyMeasureFunctionC::integrate_at(
    double t, const GroupDescriptor& desc,
    const std::function<double(const GMat&)>& f) const {
  const SpatialLaw* law = law_at(t);
  if (!law) return 0.0;
  return rate_at(t) * law->quadrature(desc).integrate(f);
}

GVec LevyMeasureFunctionC::phi_moments_at(double t,
                                          const GroupDescriptor& desc) const {
  const SpatialLaw* law = law_at(t);
  if (!law) return GVec::Zero(desc.dim);
  return rate_at(t) * law->phi_moments(desc);
}

const FixedJumpAtom* ExtendedLevyTriple::atom_at(double time, double tol) const {
  for (const auto& a : atoms)
    if (std::abs(a.time - time) < tol) return &a;
  return nullptr;
}

GMat ExtendedLevyTriple::jump_mean(double time) const {
  const FixedJumpAtom* a = atom_at(time, 1e-9);
  if (!a) return group.identity();
  return mean_of_measure(a->nu, group);
}

std::vector<std::string> validate_extended_triple(const ExtendedLevyTriple& t) {
  std::vector<std::string> out;
  const auto& g = t.group;
  if (t.drift.values.empty() || t.drift.steps <= 0) {
    out.push_back("drift: empty grid");
    return out;
  }
  if ((t.drift.values.front() - g.identity()).norm() > 1e-9)
    out.push_back("drift: b_0 is not the identity");
  if (t.cov.steps != t.drift.steps || std::abs(t.cov.T - t.drift.T) > 1e-12)
    out.push_back("cov: grid differs from the drift grid");
  if (!t.cov.values.empty() && t.cov.values.front().norm() > 1e-12)
    out.push_back("cov: A(0) is not zero");
  for (size_t k = 0; k + 1 < t.cov.values.size(); ++k) {
    GMat inc = t.cov.values[k + 1] - t.cov.values[k];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(inc)};
    if (es.eigenvalues().minCoeff() < -1e-10) {
      out.push_back("cov: increment over cell " + std::to_string(k) +
                    " is not positive semidefinite");
      break;
    }
  }
  for (const auto& a : t.atoms) {
    if (std::abs(a.nu.mass() - 1.0) > 1e-9)
      out.push_back("atom at t=" + std::to_string(a.time) + ": mass is not 1");
    if (a.time <= 0.0 || a.time > t.T() + 1e-12)
      out.push_back("atom at t=" + std::to_string(a.time) + ": outside (0, T]");
  }
  for (size_t i = 0; i + 1 < t.atoms.size(); ++i)
    if (t.atoms[i].time >= t.atoms[i + 1].time)
      out.push_back("atoms: times not strictly increasing");
  // Drift jumps must match the atom means: b_{t-}^{-1} b_t = h_t.
  for (const auto& j : t.drift.jumps) {
    GMat h = t.jump_mean(j.time);
    if ((j.factor - h).norm() > 1e-8)
      out.push_back("drift jump at t=" + std::to_string(j.time) +
                    " does not equal the jump-measure mean");
  }
  for (const auto& a : t.atoms) {
    GMat h = mean_of_measure(a.nu, g);
    if ((h - g.identity()).norm() > 1e-9) {
      bool found = false;
      for (const auto& j : t.drift.jumps)
        if (std::abs(j.time - a.time) < 1e-9) found = true;
      if (!found)
        out.push_back("drift: missing jump at atom time t=" +
                      std::to_string(a.time));
    }
  }
  for (const auto& p : t.levy.pieces) {
    if (p.rate < 0.0) out.push_back("levy: negative rate");
    if (p.t1 <= p.t0) out.push_back("levy: empty time interval");
  }
  return out;
}

DriftComponents drift_path_to_components(const DriftPath& path,
                                         const GroupDescriptor& desc) {
  DriftComponents out;
  out.T = path.T;
  out.steps = path.steps;
  out.jumps = path.jumps;
  out.values.resize(path.steps + 1, GVec::Zero(desc.dim));
  for (int k = 0; k < path.steps; ++k) {
    GMat step = desc.inverse(path.values[k]) * path.values[k + 1];
    // Strip any declared jump inside (t_k, t_{k+1}].
    for (const auto& j : path.jumps)
      if (j.time > path.time(k) + 1e-12 && j.time <= path.time(k + 1) + 1e-12)
        step = step * desc.inverse(j.factor);
    out.values[k + 1] = out.values[k] + desc.log(step);
  }
  return out;
}

DriftPath components_to_drift_path(const DriftComponents& comps,
                                   const GroupDescriptor& desc) {
  DriftPath out;
  out.T = comps.T;
  out.steps = comps.steps;
  out.jumps = comps.jumps;
  out.values.resize(comps.steps + 1);
  out.values[0] = desc.identity();
  for (int k = 0; k < comps.steps; ++k) {
    GMat next = out.values[k] * desc.exp(comps.values[k + 1] - comps.values[k]);
    for (const auto& j : comps.jumps)
      if (j.time > out.time(k) + 1e-12 && j.time <= out.time(k + 1) + 1e-12)
        next = next * j.factor;
    out.values[k + 1] = next;
  }
  return out;
}

DriftPath inverse_path(const DriftPath& path, const GroupDescriptor& desc) {
  DriftPath out = path;
  for (auto& v : out.values) v = desc.inverse(v);
  for (auto& j : out.jumps) j.factor = desc.inverse(j.factor);
  return out;
}

DriftPath piecewise_exponential_drift(
    const GroupDescriptor& desc, double T, int steps,
    const std::function<GVec(double)>& velocity,
    const std::vector<FixedJumpAtom>& atoms) {
  DriftPath out;
  out.T = T;
  out.steps = steps;
  out.values.resize(steps + 1);
  out.values[0] = desc.identity();
  double dt = T / steps;
  for (int k = 0; k < steps; ++k) {
    double tm = (k + 0.5) * dt;
    GMat next = out.values[k] * desc.exp(GVec(dt * velocity(tm)));
    for (const auto& a : atoms) {
      if (a.time > k * dt + 1e-12 && a.time <= (k + 1) * dt + 1e-12) {
        GMat h = mean_of_measure(a.nu, desc);
        if ((h - desc.identity()).norm() > 1e-14) {
          next = next * h;
          out.jumps.push_back({a.time, h});
        }
      }
    }
    out.values[k + 1] = next;
  }
  return out;
}

CovMatrixFunction linear_cov(const GroupDescriptor& desc, double T, int steps,
                             const GMat& rate_matrix) {
  CovMatrixFunction out;
  out.T = T;
  out.steps = steps;
  out.values.resize(steps + 1);
  for (int k = 0; k <= steps; ++k) out.values[k] = (T * k / steps) * rate_matrix;
  (void)desc;
  return out;
}

}  // namespace levyg
