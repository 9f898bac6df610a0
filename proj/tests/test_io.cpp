#include <doctest.h>

#include <sstream>

#include "levyg/io.hpp"
#include "reference_triple.hpp"

using namespace levyg;

TEST_CASE("triple declaration round trip") {
  auto t = testref::make_reference_triple(140);
  json j = triple_to_json(t);
  auto back = triple_from_json(j);
  CHECK(validate_extended_triple(back).empty());
  CHECK(back.group.name == "SO3");
  CHECK(back.drift.steps == t.drift.steps);
  // Grids, measures and laws survive serialization.
  for (int k = 0; k <= t.drift.steps; k += 7) {
    CHECK((back.drift.values[k] - t.drift.values[k]).norm() < 1e-12);
    CHECK((back.cov.values[k] - t.cov.values[k]).norm() < 1e-14);
  }
  REQUIRE(back.atoms.size() == 1);
  CHECK(tv_distance(back.atoms[0].nu, t.atoms[0].nu, t.group) < 1e-12);
  REQUIRE(back.levy.pieces.size() == 1);
  CHECK(back.levy.pieces[0].rate == t.levy.pieces[0].rate);
  CHECK(tv_distance(back.levy.pieces[0].law.quadrature(t.group),
                    t.levy.pieces[0].law.quadrature(t.group), t.group) < 1e-12);
  // Serialization is deterministic byte for byte.
  CHECK(j.dump() == triple_to_json(t).dump());
}

TEST_CASE("parametric laws round trip") {
  ExtendedLevyTriple t;
  t.group = GroupDescriptor::rd(2);
  t.drift = piecewise_exponential_drift(
      t.group, 1.0, 50, [](double) { return GVec::Zero(2); }, {});
  t.cov = linear_cov(t.group, 1.0, 50, GMat::Identity(2, 2));
  GaussianRdLaw g;
  g.mean = GVec::Zero(2);
  g.cov = 0.25 * GMat::Identity(2, 2);
  t.levy.pieces.push_back({0.0, 0.5, 1.0, SpatialLaw(SpatialLaw::Variant(g))});
  LaplaceRdLaw l;
  l.loc = GVec::Zero(2);
  l.scale = GVec::Ones(2);
  t.levy.pieces.push_back({0.5, 1.0, 2.0, SpatialLaw(SpatialLaw::Variant(l))});
  auto back = triple_from_json(triple_to_json(t));
  REQUIRE(back.levy.pieces.size() == 2);
  CHECK(std::get<GaussianRdLaw>(back.levy.pieces[0].law.variant()).cov(0, 0) ==
        doctest::Approx(0.25));
  CHECK(std::get<LaplaceRdLaw>(back.levy.pieces[1].law.variant()).scale(1) ==
        doctest::Approx(1.0));
}

TEST_CASE("sphere declaration round trip") {
  SphereTriple t;
  t.T = 1.0;
  t.steps = 100;
  t.a.resize(101);
  for (int k = 0; k <= 100; ++k) t.a[k] = 0.3 * k / 100.0;
  t.pieces.push_back({0.0, 1.0, 1.0, {{0.8, 1.7}, {0.7, 0.3}}});
  t.atoms.push_back({0.6, {{0.0, 0.9}, {0.5, 0.5}}});
  json j = sphere_triple_to_json(t);
  CHECK(is_sphere_config(j));
  CHECK(!is_sphere_config(triple_to_json(testref::make_reference_triple(10))));
  auto back = sphere_triple_from_json(j);
  CHECK(validate_sphere_triple(back).empty());
  CHECK(back.a == t.a);
  CHECK(back.pieces[0].law.colat == t.pieces[0].law.colat);
  CHECK(back.atoms[0].nu.weight == t.atoms[0].nu.weight);
}

TEST_CASE("path CSV and event-list round trips") {
  auto t = testref::make_reference_triple(140);
  auto q0 = quadruple_from_triple(t);
  Simulator sim(q0, t.group);
  std::vector<SamplePath> paths = {sim.path(3, 0), sim.path(3, 1)};

  std::stringstream csv;
  write_paths_csv(csv, t.group, paths);
  auto back = read_paths_csv(csv, t.group);
  REQUIRE(back.size() == 2);
  for (size_t p = 0; p < 2; ++p) {
    CHECK(back[p].steps == paths[p].steps);
    CHECK(back[p].T == doctest::Approx(paths[p].T));
    for (int k = 0; k <= paths[p].steps; k += 11)
      CHECK((back[p].values[k] - paths[p].values[k]).norm() < 1e-12);
  }

  // The event-list form is lossless: recomposition is bit-exact.
  SamplePath q = path_from_json(path_to_json(paths[0]), t.group);
  CHECK(q.jumps.size() == paths[0].jumps.size());
  for (int k = 0; k <= q.steps; ++k)
    CHECK((q.values[k] - paths[0].values[k]).norm() == 0.0);
}

TEST_CASE("sphere path CSV") {
  SphereSpace sp;
  SphereTriple t;
  t.T = 1.0;
  t.steps = 50;
  t.a.resize(51);
  for (int k = 0; k <= 50; ++k) t.a[k] = 0.2 * k / 50.0;
  t.pieces.push_back({0.0, 1.0, 2.0, {{0.9}, {1.0}}});
  SphereSimulator sim(sp, t);
  std::vector<SpherePath> paths = {sim.path(5, 0)};
  std::stringstream csv;
  write_sphere_paths_csv(csv, paths);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "path_id,t,kind,x0,x1,x2");
  int rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == 51 + int(paths[0].jumps.size()));
}

TEST_CASE("report serialization and config hash") {
  auto t = testref::make_reference_triple(100, 1.0, 1.0);
  auto q = quadruple_from_triple(t);
  auto cfg = default_check_config(t.group, t.T());
  cfg.funcs.resize(2);
  cfg.conditioners.resize(2);
  MartingaleChecker checker(q, t.group, cfg);
  Simulator sim(q, t.group);
  sim.ensemble(11, 200, [&](int, const SamplePath& p) { checker.add_path(p); });

  json config = triple_to_json(t);
  json rep = report_to_json(checker.report(), cfg, config, 11);
  CHECK(rep.at("cells").size() ==
        cfg.funcs.size() * cfg.windows.size() * cfg.conditioners.size());
  CHECK(rep.at("config_hash").get<std::string>().size() == 16);
  CHECK(rep.at("library_version") == library_version());
  for (const auto& c : rep.at("cells")) {
    CHECK(c.contains("f_id"));
    CHECK(c.contains("s"));
    CHECK(c.contains("t"));
    CHECK(c.contains("h_id"));
    CHECK(c.at("pass").is_boolean());
  }
  // Hash is stable and sensitive.
  CHECK(config_hash(config) == config_hash(triple_to_json(t)));
  json tweaked = config;
  tweaked["levy"]["pieces"][0]["rate"] = 2.0;
  CHECK(config_hash(config) != config_hash(tweaked));
}

TEST_CASE("estimated triple serialization") {
  auto t = testref::make_reference_triple(400, 1.0, 1.0);
  auto q = quadruple_from_triple(t);
  Simulator sim(q, t.group);
  EstimationConfig ec;
  ec.level_steps = {100, 200, 400};
  TripleEstimator est(t.group, 1.0, ec);
  sim.ensemble(21, 300, [&](int, const SamplePath& p) { est.add_path(p); });
  json j = estimation_to_json(est.finalize(), 20);
  CHECK(j.at("cov").at("matrices").size() == 21);
  CHECK(j.at("levy").at("pieces")[0].at("rate").get<double>() > 0.3);
  CHECK(j.at("diagnostics").at("paths").get<long>() == 300);
  CHECK(j.at("atoms").size() == 1);
}
