#include "levyg/simulate.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace levyg {

void SamplePath::recompose(const GroupDescriptor& desc) {
  values.assign(steps + 1, desc.identity());
  pre_fixed.clear();
  GMat acc = desc.identity();
  size_t j = 0;
  for (int k = 0; k < steps; ++k) {
    acc = acc * cell_factor[k];
    while (j < jumps.size() && jumps[j].cell == k) {
      if (jumps[j].fixed) pre_fixed.push_back({static_cast<int>(j), acc});
      acc = acc * jumps[j].factor;
      ++j;
    }
    values[k + 1] = acc;
  }
}

const GMat& SamplePath::at_minus_fixed(int jump_index) const {
  for (const auto& [idx, v] : pre_fixed)
    if (idx == jump_index) return v;
  return values[jumps[jump_index].cell];
}

Simulator::Simulator(const GridQuadruple& q, const GroupDescriptor& desc)
    : q_(&q), desc_(&desc) {
  cells_.resize(q.steps);
  double dt = q.dt();
  for (int k = 0; k < q.steps; ++k) {
    Cell& c = cells_[k];
    c.lambda = q.deta[k].mass();
    c.slice = c.lambda > 0.0 ? &q.deta[k] : nullptr;
    c.drift = q.db[k] - q.deta[k].phi_moments(desc);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(q.dA[k])};
    Eigen::MatrixXd root = es.eigenvectors();
    for (int i = 0; i < desc.dim; ++i)
      root.col(i) *= std::sqrt(std::max(es.eigenvalues()(i), 0.0));
    c.noise = root;
    c.atom = nullptr;
    c.atom_time = 0.0;
    double t_end = q.time(k + 1);
    if (const FixedJumpAtom* a = q.atom_at(t_end, 0.5 * dt)) {
      c.atom = &a->nu;
      c.atom_time = a->time;
    }
  }
}

SamplePath Simulator::path(std::uint64_t seed, std::uint64_t path_index) const {
  const GroupDescriptor& g = *desc_;
  SamplePath out;
  out.T = q_->T;
  out.steps = q_->steps;
  out.cell_factor.resize(q_->steps);
  Philox rng(seed, path_index);
  GVec z(g.dim);
  for (int k = 0; k < q_->steps; ++k) {
    const Cell& c = cells_[k];
    for (int j = 0; j < g.dim; ++j) z(j) = rng.normal();
    out.cell_factor[k] = g.exp(c.drift + c.noise * z);
    if (c.slice) {
      int count = rng.poisson(c.lambda);
      for (int i = 0; i < count; ++i) {
        GMat x = c.slice->sample(g, rng);
        out.jumps.push_back({k, false, q_->time(k + 1), x});
      }
    }
    if (c.atom) {
      GMat x = c.atom->sample(g, rng);
      out.jumps.push_back({k, true, c.atom_time, x});
    }
  }
  out.recompose(g);
  return out;
}

void Simulator::ensemble(
    std::uint64_t seed, int paths,
    const std::function<void(int, const SamplePath&)>& sink) const {
  for (int i = 0; i < paths; ++i) {
    SamplePath p = path(seed, static_cast<std::uint64_t>(i));
    sink(i, p);
  }
}

SamplePath::Jump remove_jump(SamplePath& path, size_t j,
                             const GroupDescriptor& desc) {
  SamplePath::Jump out = path.jumps[j];
  path.jumps.erase(path.jumps.begin() + j);
  path.recompose(desc);
  return out;
}

void insert_jump(SamplePath& path, const SamplePath::Jump& jump,
                 const GroupDescriptor& desc) {
  auto pos = std::find_if(path.jumps.begin(), path.jumps.end(),
                          [&](const SamplePath::Jump& x) {
                            if (x.cell != jump.cell) return x.cell > jump.cell;
                            // Poisson jumps precede the fixed jump in a cell.
                            return x.fixed && !jump.fixed;
                          });
  path.jumps.insert(pos, jump);
  path.recompose(desc);
}

}  // namespace levyg
