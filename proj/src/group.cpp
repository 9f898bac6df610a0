#include "levyg/group.hpp"

#include <cmath>

#include <Eigen/SVD>

namespace levyg {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kChartTol = 1e-6;

GMat hat3(const GVec& v) {
  GMat m = GMat::Zero(3, 3);
  m(0, 1) = -v(2); m(0, 2) = v(1);
  m(1, 0) = v(2);  m(1, 2) = -v(0);
  m(2, 0) = -v(1); m(2, 1) = v(0);
  return m;
}

double clamp1(double x) { return x > 1.0 ? 1.0 : (x < -1.0 ? -1.0 : x); }

// sin(t)/t and (1-cos(t))/t^2 with series fallbacks.
double sinc(double t) {
  if (std::abs(t) < 1e-4) return 1.0 - t * t / 6.0;
  return std::sin(t) / t;
}
double cosc(double t) {
  if (std::abs(t) < 1e-4) return 0.5 - t * t / 24.0;
  return (1.0 - std::cos(t)) / (t * t);
}

}  // namespace

GroupDescriptor GroupDescriptor::so3() {
  GroupDescriptor g;
  g.kind = GroupKind::SO3;
  g.name = "SO3";
  g.dim = 3;
  g.n = 3;
  for (int j = 0; j < 3; ++j) {
    GVec e = GVec::Zero(3);
    e(j) = 1.0;
    g.basis.push_back(hat3(e));
  }
  g.r_in = 0.8;
  g.r_out = 2.8;
  g.r_cut = 3.1;
  g.finish();
  return g;
}

GroupDescriptor GroupDescriptor::se2() {
  GroupDescriptor g;
  g.kind = GroupKind::SE2;
  g.name = "SE2";
  g.dim = 3;
  g.n = 3;
  GMat b1 = GMat::Zero(3, 3), b2 = GMat::Zero(3, 3), b3 = GMat::Zero(3, 3);
  b1(0, 2) = 1.0;
  b2(1, 2) = 1.0;
  b3(0, 1) = -1.0; b3(1, 0) = 1.0;
  g.basis = {b1, b2, b3};
  g.r_in = 0.8;
  g.r_out = 2.8;
  g.r_cut = 3.1;
  g.finish();
  return g;
}

GroupDescriptor GroupDescriptor::rd(int d) {
  if (d < 1 || d + 1 > kMaxDim)
    throw std::invalid_argument("rd: dimension out of range");
  GroupDescriptor g;
  g.kind = GroupKind::RD;
  g.name = "RD";
  g.dim = d;
  g.n = d + 1;
  for (int j = 0; j < d; ++j) {
    GMat b = GMat::Zero(d + 1, d + 1);
    b(j, d) = 1.0;
    g.basis.push_back(b);
  }
  // Matches the classical |x| <= 1 truncation.
  g.r_in = 1.0;
  g.r_out = 2.0;
  g.r_cut = 1e9;
  g.finish();
  return g;
}

GroupDescriptor GroupDescriptor::circle() {
  GroupDescriptor g;
  g.kind = GroupKind::Circle;
  g.name = "circle";
  g.dim = 1;
  g.n = 2;
  GMat b = GMat::Zero(2, 2);
  b(0, 1) = -1.0; b(1, 0) = 1.0;
  g.basis = {b};
  g.r_in = 0.8;
  g.r_out = 2.8;
  g.r_cut = 3.1;
  g.finish();
  return g;
}

GroupDescriptor GroupDescriptor::by_name(const std::string& name, int d) {
  if (name == "SO3") return so3();
  if (name == "SE2") return se2();
  if (name == "RD") return rd(d > 0 ? d : 2);
  if (name == "circle") return circle();
  throw std::invalid_argument("unknown group name: " + name);
}

void GroupDescriptor::finish() {
  Eigen::MatrixXd flat(n * n, dim);
  for (int j = 0; j < dim; ++j)
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r)
        flat(c * n + r, j) = basis[j](r, c);
  basis_pinv_ = (flat.transpose() * flat).ldlt().solve(flat.transpose());
}

GMat GroupDescriptor::algebra(const GVec& v) const {
  GMat m = GMat::Zero(n, n);
  for (int j = 0; j < dim; ++j) m += v(j) * basis[j];
  return m;
}

GMat GroupDescriptor::exp(const GVec& v) const {
  switch (kind) {
    case GroupKind::SO3: {
      double t = v.norm();
      GMat k = hat3(v);
      return GMat::Identity(3, 3) + sinc(t) * k + cosc(t) * (k * k);
    }
    case GroupKind::SE2: {
      double th = v(2);
      double s = sinc(th), c = cosc(th);
      GMat g = GMat::Identity(3, 3);
      g(0, 0) = std::cos(th); g(0, 1) = -std::sin(th);
      g(1, 0) = std::sin(th); g(1, 1) = std::cos(th);
      g(0, 2) = s * v(0) - c * th * v(1);
      g(1, 2) = c * th * v(0) + s * v(1);
      return g;
    }
    case GroupKind::RD: {
      GMat g = GMat::Identity(n, n);
      for (int j = 0; j < dim; ++j) g(j, dim) = v(j);
      return g;
    }
    case GroupKind::Circle: {
      GMat g(2, 2);
      g(0, 0) = std::cos(v(0)); g(0, 1) = -std::sin(v(0));
      g(1, 0) = std::sin(v(0)); g(1, 1) = std::cos(v(0));
      return g;
    }
  }
  throw std::logic_error("unreachable");
}

GVec GroupDescriptor::log(const GMat& g) const {
  switch (kind) {
    case GroupKind::SO3: {
      double th = std::acos(clamp1((g.trace() - 1.0) / 2.0));
      if (th >= kPi - kChartTol)
        throw OutOfChartError("SO(3) log: rotation angle at or beyond pi");
      GVec v(3);
      v(0) = g(2, 1) - g(1, 2);
      v(1) = g(0, 2) - g(2, 0);
      v(2) = g(1, 0) - g(0, 1);
      double f = (th < 1e-7) ? 0.5 + th * th / 12.0 : th / (2.0 * std::sin(th));
      return f * v;
    }
    case GroupKind::SE2: {
      double th = std::atan2(g(1, 0), g(0, 0));
      if (std::abs(th) >= kPi - kChartTol)
        throw OutOfChartError("SE(2) log: rotation angle at or beyond pi");
      double s = sinc(th), c = cosc(th);
      double det = s * s + c * c * th * th;
      GVec v(3);
      v(0) = (s * g(0, 2) + c * th * g(1, 2)) / det;
      v(1) = (-c * th * g(0, 2) + s * g(1, 2)) / det;
      v(2) = th;
      return v;
    }
    case GroupKind::RD: {
      GVec v(dim);
      for (int j = 0; j < dim; ++j) v(j) = g(j, dim);
      return v;
    }
    case GroupKind::Circle: {
      double th = std::atan2(g(1, 0), g(0, 0));
      if (std::abs(th) >= kPi - kChartTol)
        throw OutOfChartError("circle log: angle at or beyond pi");
      GVec v(1);
      v(0) = th;
      return v;
    }
  }
  throw std::logic_error("unreachable");
}

GMat GroupDescriptor::inverse(const GMat& g) const {
  switch (kind) {
    case GroupKind::SO3:
    case GroupKind::Circle:
      return g.transpose();
    case GroupKind::SE2: {
      GMat inv = GMat::Identity(3, 3);
      inv.block(0, 0, 2, 2) = g.block(0, 0, 2, 2).transpose();
      inv.block(0, 2, 2, 1) = -inv.block(0, 0, 2, 2) * g.block(0, 2, 2, 1);
      return inv;
    }
    case GroupKind::RD: {
      GMat inv = GMat::Identity(n, n);
      for (int j = 0; j < dim; ++j) inv(j, dim) = -g(j, dim);
      return inv;
    }
  }
  throw std::logic_error("unreachable");
}

double GroupDescriptor::chart_radius(const GMat& g) const {
  switch (kind) {
    case GroupKind::SO3:
      return std::acos(clamp1((g.trace() - 1.0) / 2.0));
    case GroupKind::SE2: {
      double th = std::atan2(g(1, 0), g(0, 0));
      if (std::abs(th) >= kPi - kChartTol) return kPi + g.block(0, 2, 2, 1).norm();
      double s = sinc(th), c = cosc(th);
      double det = s * s + c * c * th * th;
      double vx = (s * g(0, 2) + c * th * g(1, 2)) / det;
      double vy = (-c * th * g(0, 2) + s * g(1, 2)) / det;
      return std::sqrt(vx * vx + vy * vy + th * th);
    }
    case GroupKind::RD: {
      double s = 0.0;
      for (int j = 0; j < dim; ++j) s += g(j, dim) * g(j, dim);
      return std::sqrt(s);
    }
    case GroupKind::Circle:
      return std::abs(std::atan2(g(1, 0), g(0, 0)));
  }
  throw std::logic_error("unreachable");
}

double GroupDescriptor::bump(double t) const {
  if (t <= r_in) return 1.0;
  if (t >= r_out) return 0.0;
  double s = (t - r_in) / (r_out - r_in);
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

GVec GroupDescriptor::coords(const GMat& g) const {
  double r = chart_radius(g);
  if (r >= r_out) return GVec::Zero(dim);
  return bump(r) * log(g);
}

GMat GroupDescriptor::adjoint(const GMat& g) const {
  if (kind == GroupKind::SO3) return g;
  if (kind == GroupKind::RD || kind == GroupKind::Circle)
    return GMat::Identity(dim, dim);
  GMat inv = inverse(g);
  GMat ad(dim, dim);
  Eigen::VectorXd flat(n * n);
  for (int k = 0; k < dim; ++k) {
    GMat m = g * basis[k] * inv;
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r) flat(c * n + r) = m(r, c);
    ad.col(k) = (basis_pinv_ * flat).head(dim);
  }
  return ad;
}

double GroupDescriptor::distance(const GMat& g, const GMat& h) const {
  return chart_radius(inverse(g) * h);
}

double GroupDescriptor::membership_residual(const GMat& g) const {
  switch (kind) {
    case GroupKind::SO3:
    case GroupKind::Circle:
      return (g.transpose() * g - GMat::Identity(n, n)).norm();
    case GroupKind::SE2: {
      GMat r = g.block(0, 0, 2, 2);
      double res = (r.transpose() * r - GMat::Identity(2, 2)).norm();
      res += std::abs(g(2, 0)) + std::abs(g(2, 1)) + std::abs(g(2, 2) - 1.0);
      return res;
    }
    case GroupKind::RD: {
      double res = 0.0;
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
          if (c < dim || r == n - 1)
            res += std::abs(g(r, c) - (r == c ? 1.0 : 0.0));
      return res;
    }
  }
  throw std::logic_error("unreachable");
}

GMat GroupDescriptor::renormalize(const GMat& g) const {
  auto project_rotation = [](const GMat& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::MatrixXd r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0) {
      Eigen::MatrixXd u = svd.matrixU();
      u.col(u.cols() - 1) *= -1.0;
      r = u * svd.matrixV().transpose();
    }
    return r;
  };
  switch (kind) {
    case GroupKind::SO3:
    case GroupKind::Circle:
      return project_rotation(g);
    case GroupKind::SE2: {
      GMat out = GMat::Identity(3, 3);
      out.block(0, 0, 2, 2) = project_rotation(GMat(g.block(0, 0, 2, 2)));
      out.block(0, 2, 2, 1) = g.block(0, 2, 2, 1);
      return out;
    }
    case GroupKind::RD: {
      GMat out = GMat::Identity(n, n);
      for (int j = 0; j < dim; ++j) out(j, dim) = g(j, dim);
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace levyg
