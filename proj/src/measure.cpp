#include "levyg/measure.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace levyg {

namespace {

// Gauss-Hermite nodes/weights (weight e^{-x^2}) via the Jacobi matrix.
void gauss_hermite(int m, std::vector<double>& nodes, std::vector<double>& weights) {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m);
  for (int i = 1; i < m; ++i) {
    double b = std::sqrt(i / 2.0);
    jac(i, i - 1) = b;
    jac(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  nodes.resize(m);
  weights.resize(m);
  double sqrt_pi = std::sqrt(3.14159265358979323846);
  for (int i = 0; i < m; ++i) {
    nodes[i] = es.eigenvalues()(i);
    double v0 = es.eigenvectors()(0, i);
    weights[i] = v0 * v0 * sqrt_pi;
  }
}

int nodes_per_axis(int d) { return d == 1 ? 32 : (d == 2 ? 16 : 8); }

// Tensor quadrature of a centered standard normal in R^d, pushed through
// the affine map v -> loc + scale_map(v) and then through exp.
FiniteMeasure gaussian_quadrature(const GroupDescriptor& desc, const GVec& loc,
                                  const GMat& chol) {
  int d = desc.dim;
  int m = nodes_per_axis(d);
  std::vector<double> nodes, weights;
  gauss_hermite(m, nodes, weights);
  double sqrt2 = std::sqrt(2.0), norm = std::pow(std::sqrt(3.14159265358979323846), -d);
  FiniteMeasure out;
  std::vector<int> idx(d, 0);
  for (;;) {
    GVec t(d);
    double w = norm;
    for (int j = 0; j < d; ++j) {
      t(j) = nodes[idx[j]] * sqrt2;
      w *= weights[idx[j]];
    }
    out.add(desc.exp(loc + chol * t), w);
    int j = 0;
    while (j < d && ++idx[j] == m) idx[j++] = 0;
    if (j == d) break;
  }
  return out;
}

}  // namespace

double FiniteMeasure::mass() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

double FiniteMeasure::integrate(const std::function<double(const GMat&)>& f) const {
  double s = 0.0;
  for (size_t i = 0; i < atoms.size(); ++i) s += weights[i] * f(atoms[i]);
  return s;
}

GVec FiniteMeasure::phi_moments(const GroupDescriptor& desc) const {
  GVec m = GVec::Zero(desc.dim);
  for (size_t i = 0; i < atoms.size(); ++i) m += weights[i] * desc.coords(atoms[i]);
  return m;
}

FiniteMeasure FiniteMeasure::normalized() const {
  FiniteMeasure out = *this;
  double total = mass();
  if (total > 0.0)
    for (double& w : out.weights) w /= total;
  return out;
}

GMat FiniteMeasure::sample(const GroupDescriptor&, Philox& rng) const {
  int i = rng.categorical(weights.data(), static_cast<int>(weights.size()));
  return atoms[i];
}

GMat mean_of_measure(const FiniteMeasure& mu, const GroupDescriptor& desc) {
  return desc.exp(mu.phi_moments(desc));
}

double tv_distance(const FiniteMeasure& a, const FiniteMeasure& b,
                   const GroupDescriptor& desc, double match_radius) {
  std::vector<bool> used(b.atoms.size(), false);
  double tv = 0.0;
  for (size_t i = 0; i < a.atoms.size(); ++i) {
    int best = -1;
    double best_d = match_radius;
    for (size_t j = 0; j < b.atoms.size(); ++j) {
      if (used[j]) continue;
      double d = desc.distance(a.atoms[i], b.atoms[j]);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(j);
      }
    }
    if (best >= 0) {
      used[best] = true;
      tv += std::abs(a.weights[i] - b.weights[best]);
    } else {
      tv += a.weights[i];
    }
  }
  for (size_t j = 0; j < b.atoms.size(); ++j)
    if (!used[j]) tv += b.weights[j];
  return 0.5 * tv;
}

bool is_small(const FiniteMeasure& mu, const GroupDescriptor& desc, double tol) {
  for (const auto& a : mu.atoms)
    if (desc.chart_radius(a) > desc.r_in + tol) return false;
  return true;
}

GMat SpatialLaw::sample(const GroupDescriptor& desc, Philox& rng) const {
  if (const auto* d = std::get_if<DiscreteLaw>(&v_)) return d->atoms.sample(desc, rng);
  if (const auto* g = std::get_if<GaussianRdLaw>(&v_)) {
    GMat chol = g->cov.llt().matrixL();
    GVec z(desc.dim);
    for (int j = 0; j < desc.dim; ++j) z(j) = rng.normal();
    return desc.exp(g->mean + chol * z);
  }
  if (const auto* l = std::get_if<LaplaceRdLaw>(&v_)) {
    GVec v(desc.dim);
    for (int j = 0; j < desc.dim; ++j) {
      double u = rng.uniform() - 0.5;
      v(j) = l->loc(j) - l->scale(j) * (u < 0 ? -1.0 : 1.0) * std::log(1.0 - 2.0 * std::abs(u));
    }
    return desc.exp(v);
  }
  const auto& w = std::get<WrappedGaussianSO3Law>(v_);
  for (;;) {
    GVec z(3);
    for (int j = 0; j < 3; ++j) z(j) = w.sigma * rng.normal();
    if (z.norm() < 3.1) return desc.exp(z);
  }
}

const FiniteMeasure& SpatialLaw::quadrature(const GroupDescriptor& desc) const {
  if (quad_ready_) return quad_;
  if (const auto* d = std::get_if<DiscreteLaw>(&v_)) {
    quad_ = d->atoms;
  } else if (const auto* g = std::get_if<GaussianRdLaw>(&v_)) {
    quad_ = gaussian_quadrature(desc, g->mean, GMat(g->cov.llt().matrixL()));
  } else if (const auto* l = std::get_if<LaplaceRdLaw>(&v_)) {
    // A Laplace axis is a two-sided exponential; represent it by
    // equal-probability strata at their conditional means.  m is even, so
    // each stratum lies on one side of the location and the conditional
    // mean of the unit exponential over it has a closed form.
    int d = desc.dim;
    int m = d == 1 ? 128 : (d == 2 ? 64 : 16);
    std::vector<double> node(m);
    for (int i = 0; i < m; ++i) {
      double p0 = static_cast<double>(i) / m - 0.5;
      double p1 = static_cast<double>(i + 1) / m - 0.5;
      double sgn = (p0 + p1 < 0) ? -1.0 : 1.0;
      double a = -std::log(1.0 - 2.0 * std::min(std::abs(p0), std::abs(p1)));
      double b = -std::log(1.0 - 2.0 * std::max(std::abs(p0), std::abs(p1)));
      double eb = std::exp(-b);
      double mass = std::exp(-a) - eb;
      double tail_b = std::isinf(b) ? 0.0 : (b + 1.0) * eb;
      double first = (a + 1.0) * std::exp(-a) - tail_b;
      node[i] = sgn * first / mass;
    }
    FiniteMeasure out;
    std::vector<int> idx(d, 0);
    for (;;) {
      GVec v(d);
      double w = 1.0;
      for (int j = 0; j < d; ++j) {
        v(j) = l->loc(j) + l->scale(j) * node[idx[j]];
        w /= m;
      }
      out.add(desc.exp(v), w);
      int j = 0;
      while (j < d && ++idx[j] == m) idx[j++] = 0;
      if (j == d) break;
    }
    quad_ = out;
  } else {
    const auto& w = std::get<WrappedGaussianSO3Law>(v_);
    GMat cov = w.sigma * w.sigma * GMat::Identity(3, 3);
    quad_ = gaussian_quadrature(desc, GVec::Zero(3), GMat(cov.llt().matrixL()));
  }
  quad_ready_ = true;
  return quad_;
}

}  // namespace levyg
