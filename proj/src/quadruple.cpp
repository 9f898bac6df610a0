#include "levyg/quadruple.hpp"

#include <cmath>

namespace levyg {

const FixedJumpAtom* GridQuadruple::atom_at(double time, double tol) const {
  for (const auto& a : atoms)
    if (std::abs(a.time - time) < tol) return &a;
  return nullptr;
}

GridQuadruple quadruple_from_triple(const ExtendedLevyTriple& t) {
  GridQuadruple q;
  q.group = t.group;
  q.T = t.T();
  q.steps = t.drift.steps;
  q.atoms = t.atoms;
  auto comps = drift_path_to_components(t.drift, t.group);
  q.db.resize(q.steps);
  q.dA.resize(q.steps);
  q.deta.resize(q.steps);
  double dt = q.dt();
  for (int k = 0; k < q.steps; ++k) {
    q.db[k] = comps.values[k + 1] - comps.values[k];
    q.dA[k] = t.cov.values[k + 1] - t.cov.values[k];
    double tm = q.time(k);
    const SpatialLaw* law = t.levy.law_at(tm + 0.5 * dt);
    double rate = t.levy.rate_at(tm + 0.5 * dt);
    FiniteMeasure slice;
    if (law && rate > 0.0) {
      slice = law->quadrature(t.group);
      for (auto& w : slice.weights) w *= rate * dt;
    }
    q.deta[k] = std::move(slice);
  }
  return q;
}

GridQuadruple bar_transform(const GridQuadruple& q, const DriftPath& b,
                            const GroupDescriptor& desc) {
  GridQuadruple out;
  out.group = q.group;
  out.T = q.T;
  out.steps = q.steps;
  out.db.resize(q.steps, GVec::Zero(desc.dim));
  out.dA.resize(q.steps);
  out.deta.resize(q.steps);
  for (int k = 0; k < q.steps; ++k) {
    const GMat& bt = b.values[k];
    GMat binv = desc.inverse(bt);
    GMat ad = desc.adjoint(bt);
    out.dA[k] = ad * q.dA[k] * ad.transpose();
    FiniteMeasure slice;
    GVec defect = GVec::Zero(desc.dim);
    for (size_t i = 0; i < q.deta[k].atoms.size(); ++i) {
      const GMat& x = q.deta[k].atoms[i];
      double w = q.deta[k].weights[i];
      GMat conj = bt * x * binv;
      slice.add(conj, w);
      defect += w * (desc.coords(conj) - ad * desc.coords(x));
    }
    out.deta[k] = std::move(slice);
    out.db[k] = defect;
  }
  for (const auto& a : q.atoms) {
    GMat bm = b.at_minus(a.time);
    GMat bm_inv = desc.inverse(bm);
    GMat h_inv = desc.inverse(mean_of_measure(a.nu, desc));
    FixedJumpAtom out_atom;
    out_atom.time = a.time;
    for (size_t i = 0; i < a.nu.atoms.size(); ++i)
      out_atom.nu.add(bm * a.nu.atoms[i] * h_inv * bm_inv, a.nu.weights[i]);
    out.atoms.push_back(std::move(out_atom));
  }
  return out;
}

GridQuadruple transform_quadruple_by_drift(const GridQuadruple& q,
                                           const DriftPath& u,
                                           const GroupDescriptor& desc) {
  GridQuadruple out;
  out.group = q.group;
  out.T = q.T;
  out.steps = q.steps;
  out.db.resize(q.steps);
  out.dA.resize(q.steps);
  out.deta.resize(q.steps);
  auto ucomps = drift_path_to_components(u, desc);
  for (int k = 0; k < q.steps; ++k) {
    const GMat& ut = u.values[k];
    GMat uinv = desc.inverse(ut);
    GMat ad = desc.adjoint(uinv);
    out.dA[k] = ad * q.dA[k] * ad.transpose();
    GVec du = ucomps.values[k + 1] - ucomps.values[k];
    GVec db = ad * q.db[k] + du;
    FiniteMeasure slice;
    for (size_t i = 0; i < q.deta[k].atoms.size(); ++i) {
      const GMat& x = q.deta[k].atoms[i];
      double w = q.deta[k].weights[i];
      GMat conj = uinv * x * ut;
      slice.add(conj, w);
      db += w * (desc.coords(conj) - ad * desc.coords(x));
    }
    out.deta[k] = std::move(slice);
    out.db[k] = db;
  }
  for (const auto& a : q.atoms) {
    GMat um = u.at_minus(a.time);
    GMat um_inv = desc.inverse(um);
    FixedJumpAtom out_atom;
    out_atom.time = a.time;
    for (size_t i = 0; i < a.nu.atoms.size(); ++i)
      out_atom.nu.add(um_inv * a.nu.atoms[i] * um, a.nu.weights[i]);
    out.atoms.push_back(std::move(out_atom));
  }
  return out;
}

}  // namespace levyg
