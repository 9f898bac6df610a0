#include "levyg/io.hpp"

#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace levyg {

namespace {

json vec_to_json(const GVec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

GVec vec_from_json(const json& j) {
  GVec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(long(i)) = j[i].get<double>();
  return v;
}

json mat_to_json(const GMat& m) {
  json a = json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
  return a;
}

GMat mat_from_json(const json& j, int rows, int cols) {
  if (int(j.size()) != rows * cols)
    throw std::runtime_error("matrix entry count mismatch");
  GMat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = j[r * cols + c].get<double>();
  return m;
}

// Group elements travel as algebra coordinates of their logarithm.
json measure_to_json(const FiniteMeasure& mu, const GroupDescriptor& desc) {
  json j;
  j["points"] = json::array();
  j["weights"] = json::array();
  for (size_t i = 0; i < mu.atoms.size(); ++i) {
    j["points"].push_back(vec_to_json(desc.log(mu.atoms[i])));
    j["weights"].push_back(mu.weights[i]);
  }
  return j;
}

FiniteMeasure measure_from_json(const json& j, const GroupDescriptor& desc) {
  FiniteMeasure mu;
  const auto& pts = j.at("points");
  const auto& w = j.at("weights");
  if (pts.size() != w.size())
    throw std::runtime_error("points/weights length mismatch");
  for (size_t i = 0; i < pts.size(); ++i)
    mu.add(desc.exp(vec_from_json(pts[i])), w[i].get<double>());
  return mu;
}

json law_to_json(const SpatialLaw& law, const GroupDescriptor& desc) {
  json j;
  if (const auto* d = std::get_if<DiscreteLaw>(&law.variant())) {
    j["type"] = "discrete";
    j.update(measure_to_json(d->atoms, desc));
  } else if (const auto* g = std::get_if<GaussianRdLaw>(&law.variant())) {
    j["type"] = "gaussian_rd";
    j["mean"] = vec_to_json(g->mean);
    j["cov"] = mat_to_json(g->cov);
  } else if (const auto* l = std::get_if<LaplaceRdLaw>(&law.variant())) {
    j["type"] = "laplace_rd";
    j["loc"] = vec_to_json(l->loc);
    j["scale"] = vec_to_json(l->scale);
  } else if (const auto* w = std::get_if<WrappedGaussianSO3Law>(&law.variant())) {
    j["type"] = "wrapped_gaussian_so3";
    j["sigma"] = w->sigma;
  }
  return j;
}

SpatialLaw law_from_json(const json& j, const GroupDescriptor& desc) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "discrete")
    return SpatialLaw::discrete(measure_from_json(j, desc));
  if (type == "gaussian_rd") {
    GaussianRdLaw g;
    g.mean = vec_from_json(j.at("mean"));
    g.cov = mat_from_json(j.at("cov"), desc.dim, desc.dim);
    return SpatialLaw(SpatialLaw::Variant(g));
  }
  if (type == "laplace_rd") {
    LaplaceRdLaw l;
    l.loc = vec_from_json(j.at("loc"));
    l.scale = vec_from_json(j.at("scale"));
    return SpatialLaw(SpatialLaw::Variant(l));
  }
  if (type == "wrapped_gaussian_so3") {
    WrappedGaussianSO3Law w;
    w.sigma = j.at("sigma").get<double>();
    return SpatialLaw(SpatialLaw::Variant(w));
  }
  throw std::runtime_error("unknown spatial law type: " + type);
}

json mixture_to_json(const ColatitudeMixture& m) {
  json j;
  j["colat"] = m.colat;
  j["weight"] = m.weight;
  return j;
}

ColatitudeMixture mixture_from_json(const json& j) {
  ColatitudeMixture m;
  m.colat = j.at("colat").get<std::vector<double>>();
  m.weight = j.at("weight").get<std::vector<double>>();
  return m;
}

// Greedy clustering of stored large increments into a discrete law.
FiniteMeasure cluster_big_jumps(const EstimationResult& r, double radius,
                                double* rate_out) {
  std::vector<GVec> centers;
  std::vector<double> counts;
  long total = 0;
  for (const auto& bj : r.big_jumps) {
    if (bj.in_atom_cell) continue;
    ++total;
    bool placed = false;
    for (size_t c = 0; c < centers.size(); ++c) {
      if ((centers[c] - bj.phi).norm() <= radius) {
        centers[c] = (centers[c] * counts[c] + bj.phi) / (counts[c] + 1.0);
        counts[c] += 1.0;
        placed = true;
        break;
      }
    }
    if (!placed) {
      centers.push_back(bj.phi);
      counts.push_back(1.0);
    }
  }
  *rate_out = r.paths > 0 ? double(total) / (double(r.paths) * r.T) : 0.0;
  FiniteMeasure law;
  for (size_t c = 0; c < centers.size(); ++c)
    law.add(r.group.exp(centers[c]), counts[c] / std::max<long>(total, 1));
  return law;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

json triple_to_json(const ExtendedLevyTriple& t) {
  json j;
  j["group"] = {{"name", t.group.name}, {"dim", t.group.dim}};

  DriftComponents comps = drift_path_to_components(t.drift, t.group);
  json drift;
  drift["T"] = t.drift.T;
  drift["steps"] = t.drift.steps;
  drift["components"] = json::array();
  for (const auto& v : comps.values) drift["components"].push_back(vec_to_json(v));
  j["drift"] = drift;

  json cov;
  cov["matrices"] = json::array();
  for (const auto& m : t.cov.values) cov["matrices"].push_back(mat_to_json(m));
  j["cov"] = cov;

  json levy;
  levy["pieces"] = json::array();
  for (const auto& p : t.levy.pieces) {
    json piece;
    piece["t0"] = p.t0;
    piece["t1"] = p.t1;
    piece["rate"] = p.rate;
    piece["law"] = law_to_json(p.law, t.group);
    levy["pieces"].push_back(piece);
  }
  j["levy"] = levy;

  j["atoms"] = json::array();
  for (const auto& a : t.atoms) {
    json atom = measure_to_json(a.nu, t.group);
    atom["time"] = a.time;
    j["atoms"].push_back(atom);
  }
  return j;
}

ExtendedLevyTriple triple_from_json(const json& j) {
  ExtendedLevyTriple t;
  const auto& g = j.at("group");
  t.group = GroupDescriptor::by_name(g.at("name").get<std::string>(),
                                     g.value("dim", 0));

  for (const auto& a : j.at("atoms")) {
    FixedJumpAtom atom;
    atom.time = a.at("time").get<double>();
    atom.nu = measure_from_json(a, t.group);
    t.atoms.push_back(atom);
  }

  const auto& dj = j.at("drift");
  DriftComponents comps;
  comps.T = dj.at("T").get<double>();
  comps.steps = dj.at("steps").get<int>();
  for (const auto& v : dj.at("components")) comps.values.push_back(vec_from_json(v));
  if (int(comps.values.size()) != comps.steps + 1)
    throw std::runtime_error("drift component grid length mismatch");
  // Drift jump factors are determined by the atoms: the phi-mean of nu.
  for (const auto& a : t.atoms)
    comps.jumps.push_back({a.time, mean_of_measure(a.nu, t.group)});
  t.drift = components_to_drift_path(comps, t.group);

  t.cov.T = comps.T;
  t.cov.steps = comps.steps;
  for (const auto& m : j.at("cov").at("matrices"))
    t.cov.values.push_back(mat_from_json(m, t.group.dim, t.group.dim));

  for (const auto& p : j.at("levy").at("pieces")) {
    LevyPiece piece;
    piece.t0 = p.at("t0").get<double>();
    piece.t1 = p.at("t1").get<double>();
    piece.rate = p.at("rate").get<double>();
    piece.law = law_from_json(p.at("law"), t.group);
    t.levy.pieces.push_back(std::move(piece));
  }
  return t;
}

json sphere_triple_to_json(const SphereTriple& t) {
  json j;
  j["space"] = {{"G", "SO3"}, {"K", "vertical_rotations"}, {"origin", "north_pole"}};
  j["T"] = t.T;
  j["steps"] = t.steps;
  j["a"] = t.a;
  json levy;
  levy["pieces"] = json::array();
  for (const auto& p : t.pieces) {
    json piece;
    piece["t0"] = p.t0;
    piece["t1"] = p.t1;
    piece["rate"] = p.rate;
    piece["law"] = mixture_to_json(p.law);
    levy["pieces"].push_back(piece);
  }
  j["levy"] = levy;
  j["atoms"] = json::array();
  for (const auto& a : t.atoms) {
    json atom = mixture_to_json(a.nu);
    atom["time"] = a.time;
    j["atoms"].push_back(atom);
  }
  return j;
}

SphereTriple sphere_triple_from_json(const json& j) {
  if (!is_sphere_config(j))
    throw std::runtime_error("not a homogeneous-space declaration");
  SphereTriple t;
  t.T = j.at("T").get<double>();
  t.steps = j.at("steps").get<int>();
  t.a = j.at("a").get<std::vector<double>>();
  for (const auto& p : j.at("levy").at("pieces"))
    t.pieces.push_back({p.at("t0").get<double>(), p.at("t1").get<double>(),
                        p.at("rate").get<double>(),
                        mixture_from_json(p.at("law"))});
  for (const auto& a : j.at("atoms"))
    t.atoms.push_back({a.at("time").get<double>(), mixture_from_json(a)});
  return t;
}

bool is_sphere_config(const json& j) { return j.contains("space"); }

PathCsvWriter::PathCsvWriter(std::ostream& os, const GroupDescriptor& desc)
    : os_(&os), desc_(&desc) {
  os << "path_id,t,kind";
  for (int r = 0; r < desc.n; ++r)
    for (int c = 0; c < desc.n; ++c) os << ",m" << r << c;
  os << "\n";
  os << std::setprecision(17);
}

void PathCsvWriter::add(int path_id, const SamplePath& path) {
  auto row = [&](double t, const char* kind, const GMat& m) {
    *os_ << path_id << ',' << t << ',' << kind;
    for (int r = 0; r < desc_->n; ++r)
      for (int c = 0; c < desc_->n; ++c) *os_ << ',' << m(r, c);
    *os_ << "\n";
  };
  size_t jidx = 0;
  for (int k = 0; k <= path.steps; ++k) {
    row(path.time(k), "grid", path.values[k]);
    while (jidx < path.jumps.size() && path.jumps[jidx].cell == k) {
      const auto& jp = path.jumps[jidx];
      row(jp.time, jp.fixed ? "fixed" : "jump", jp.factor);
      ++jidx;
    }
  }
}

void write_paths_csv(std::ostream& os, const GroupDescriptor& desc,
                     const std::vector<SamplePath>& paths) {
  PathCsvWriter w(os, desc);
  for (size_t p = 0; p < paths.size(); ++p) w.add(int(p), paths[p]);
}

std::vector<SamplePath> read_paths_csv(std::istream& is,
                                       const GroupDescriptor& desc) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty path file");
  std::vector<SamplePath> paths;
  std::vector<std::vector<std::pair<double, GMat>>> fixed;  // per path
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (int(cells.size()) != 3 + desc.n * desc.n)
      throw std::runtime_error("bad path row: " + line);
    size_t id = std::stoul(cells[0]);
    if (id >= paths.size()) {
      paths.resize(id + 1);
      fixed.resize(id + 1);
    }
    GMat m(desc.n, desc.n);
    for (int r = 0; r < desc.n; ++r)
      for (int c = 0; c < desc.n; ++c)
        m(r, c) = std::stod(cells[3 + r * desc.n + c]);
    if (cells[2] == "grid") {
      paths[id].values.push_back(m);
      paths[id].T = std::stod(cells[1]);
    } else if (cells[2] == "fixed") {
      fixed[id].push_back({std::stod(cells[1]), m});
    }
    // Poisson event rows carry factors already folded into the grid.
  }
  for (size_t id = 0; id < paths.size(); ++id) {
    auto& p = paths[id];
    if (p.values.empty()) throw std::runtime_error("path with no grid rows");
    p.steps = int(p.values.size()) - 1;
    // Rebuild the fixed-jump records and left limits: a fixed jump acts
    // at the end of its cell, so the pre value is post * factor^{-1}.
    for (const auto& [time, factor] : fixed[id]) {
      int cell = int(std::lround(time * p.steps / p.T)) - 1;
      if (cell < 0 || cell >= p.steps)
        throw std::runtime_error("fixed jump off the path grid");
      p.jumps.push_back({cell, true, time, factor});
      p.pre_fixed.push_back({int(p.jumps.size()) - 1,
                             p.values[cell + 1] * desc.inverse(factor)});
    }
  }
  return paths;
}

SpherePathCsvWriter::SpherePathCsvWriter(std::ostream& os) : os_(&os) {
  os << "path_id,t,kind,x0,x1,x2\n";
  os << std::setprecision(17);
}

void SpherePathCsvWriter::add(int path_id, const SpherePath& path) {
  auto row = [&](double t, const char* kind, const XPoint& x) {
    *os_ << path_id << ',' << t << ',' << kind << ',' << x(0) << ',' << x(1)
         << ',' << x(2) << "\n";
  };
  size_t jidx = 0;
  for (int k = 0; k <= path.steps; ++k) {
    row(path.time(k), "grid", path.values[k]);
    while (jidx < path.jumps.size() && path.jumps[jidx].cell == k) {
      const auto& jp = path.jumps[jidx];
      row(jp.time, jp.fixed ? "fixed" : "jump", jp.post);
      ++jidx;
    }
  }
}

void write_sphere_paths_csv(std::ostream& os,
                            const std::vector<SpherePath>& paths) {
  SpherePathCsvWriter w(os);
  for (size_t p = 0; p < paths.size(); ++p) w.add(int(p), paths[p]);
}

json path_to_json(const SamplePath& p) {
  json j;
  j["T"] = p.T;
  j["steps"] = p.steps;
  j["cell_factor"] = json::array();
  for (const auto& m : p.cell_factor) j["cell_factor"].push_back(mat_to_json(m));
  j["jumps"] = json::array();
  for (const auto& jp : p.jumps)
    j["jumps"].push_back({{"cell", jp.cell},
                          {"fixed", jp.fixed},
                          {"time", jp.time},
                          {"factor", mat_to_json(jp.factor)}});
  return j;
}

SamplePath path_from_json(const json& j, const GroupDescriptor& desc) {
  SamplePath p;
  p.T = j.at("T").get<double>();
  p.steps = j.at("steps").get<int>();
  for (const auto& m : j.at("cell_factor"))
    p.cell_factor.push_back(mat_from_json(m, desc.n, desc.n));
  for (const auto& jp : j.at("jumps"))
    p.jumps.push_back({jp.at("cell").get<int>(), jp.at("fixed").get<bool>(),
                       jp.at("time").get<double>(),
                       mat_from_json(jp.at("factor"), desc.n, desc.n)});
  p.recompose(desc);
  return p;
}

json report_to_json(const MartingaleReport& rep,
                    const std::vector<std::string>& func_names,
                    const std::vector<std::pair<double, double>>& windows,
                    const std::vector<std::string>& cond_names,
                    const json& config, std::uint64_t seed) {
  json j;
  j["library_version"] = library_version();
  j["config_hash"] = config_hash(config);
  j["seed"] = seed;
  j["cells"] = json::array();
  int fails = 0;
  for (const auto& c : rep.cells) {
    bool ok = std::abs(c.z) <= 4.0;
    if (!ok) ++fails;
    j["cells"].push_back({{"f_id", func_names[c.func]},
                          {"s", windows[c.window].first},
                          {"t", windows[c.window].second},
                          {"h_id", cond_names[c.cond]},
                          {"n", c.n},
                          {"mean", c.mean},
                          {"stderr", c.se},
                          {"z", c.z},
                          {"pass", ok}});
  }
  j["max_abs_z"] = rep.max_abs_z;
  j["failed_cells"] = fails;
  j["pass"] = fails == 0;
  return j;
}

json report_to_json(const MartingaleReport& rep,
                    const MartingaleCheckConfig& cfg, const json& config,
                    std::uint64_t seed) {
  std::vector<std::string> fn, cn;
  for (const auto& f : cfg.funcs) fn.push_back(f.name);
  for (const auto& c : cfg.conditioners) cn.push_back(c.name);
  return report_to_json(rep, fn, cfg.windows, cn, config, seed);
}

json estimation_to_json(const EstimationResult& r, int cov_nodes) {
  json j;
  j["group"] = {{"name", r.group.name}, {"dim", r.group.dim}};

  DriftComponents comps = drift_path_to_components(r.drift, r.group);
  json drift;
  drift["T"] = r.drift.T;
  drift["steps"] = r.drift.steps;
  drift["components"] = json::array();
  for (const auto& v : comps.values) drift["components"].push_back(vec_to_json(v));
  j["drift"] = drift;

  json cov;
  cov["matrices"] = json::array();
  cov["grid"] = json::array();
  for (int k = 0; k <= cov_nodes; ++k) {
    double t = r.T * k / cov_nodes;
    cov["grid"].push_back(t);
    cov["matrices"].push_back(mat_to_json(r.cov_estimate(t)));
  }
  j["cov"] = cov;

  double rate = 0.0;
  FiniteMeasure law = cluster_big_jumps(r, 0.1, &rate);
  json levy;
  levy["pieces"] = json::array();
  json piece;
  piece["t0"] = 0.0;
  piece["t1"] = r.T;
  piece["rate"] = rate;
  piece["law"] = law_to_json(SpatialLaw::discrete(law), r.group);
  levy["pieces"].push_back(piece);
  j["levy"] = levy;

  j["atoms"] = json::array();
  for (const auto& a : r.atoms) {
    json atom = measure_to_json(a.nu, r.group);
    atom["time"] = a.time;
    j["atoms"].push_back(atom);
  }

  auto mod = r.continuity_moduli(0.05 * r.T);
  j["diagnostics"] = {{"paths", r.paths},
                      {"steps", r.steps},
                      {"big_jumps", r.big_jumps.size()},
                      {"ball_radii", r.ball_radii},
                      {"modulus_trace", mod.first},
                      {"modulus_drift", mod.second}};
  return j;
}

std::string config_hash(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)h);
  return buf;
}

std::string library_version() { return "levyg 0.1.0"; }

}  // namespace levyg
