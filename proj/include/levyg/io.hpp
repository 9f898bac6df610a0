#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "levyg/homogeneous.hpp"

namespace levyg {

using nlohmann::json;

// Triple declaration schema: sections group, drift{T, steps, components},
// cov{matrices}, levy{pieces}, atoms{time, points, weights}.  Group
// elements are written as algebra coordinates of their logarithm, so the
// file stays group-independent; all laws used here have in-chart support.
json triple_to_json(const ExtendedLevyTriple& t);
ExtendedLevyTriple triple_from_json(const json& j);

// Sphere-triple schema: a "space" section naming the quotient plus the
// isotropic a-grid, invariant jump pieces, and invariant atoms.
json sphere_triple_to_json(const SphereTriple& t);
SphereTriple sphere_triple_from_json(const json& j);

bool is_sphere_config(const json& j);

// Path CSV: path_id, t, kind, flattened row-major matrix entries.
// kind is "grid" for composed grid values and "jump"/"fixed" for event
// rows, whose entries are the event's group factor.
void write_paths_csv(std::ostream& os, const GroupDescriptor& desc,
                     const std::vector<SamplePath>& paths);
// Reads grid and fixed-event rows back into paths with values,
// fixed-jump records and left limits (enough for estimation and
// verification; Poisson factors stay folded into the grid values).
std::vector<SamplePath> read_paths_csv(std::istream& is,
                                       const GroupDescriptor& desc);

void write_sphere_paths_csv(std::ostream& os,
                            const std::vector<SpherePath>& paths);

// Streaming writers for large ensembles (header on construction).
class PathCsvWriter {
 public:
  PathCsvWriter(std::ostream& os, const GroupDescriptor& desc);
  void add(int path_id, const SamplePath& p);

 private:
  std::ostream* os_;
  const GroupDescriptor* desc_;
};

class SpherePathCsvWriter {
 public:
  explicit SpherePathCsvWriter(std::ostream& os);
  void add(int path_id, const SpherePath& p);

 private:
  std::ostream* os_;
};

// Event-list JSON: the factor decomposition, lossless for surgery.
json path_to_json(const SamplePath& p);
SamplePath path_from_json(const json& j, const GroupDescriptor& desc);

// Martingale report with provenance fields; every cell carries its
// function, window and conditioner labels plus mean, stderr, z, pass.
json report_to_json(const MartingaleReport& rep,
                    const std::vector<std::string>& func_names,
                    const std::vector<std::pair<double, double>>& windows,
                    const std::vector<std::string>& cond_names,
                    const json& config, std::uint64_t seed);
json report_to_json(const MartingaleReport& rep,
                    const MartingaleCheckConfig& cfg, const json& config,
                    std::uint64_t seed);

// Estimated triple in the declaration schema (empirical jump law from
// greedy clustering of the stored large increments), plus diagnostics.
json estimation_to_json(const EstimationResult& r, int cov_nodes = 56);

// Stable content hash of a canonically serialized config (FNV-1a).
std::string config_hash(const json& j);

std::string library_version();

}  // namespace levyg
