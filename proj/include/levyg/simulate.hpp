#pragma once

#include <functional>

#include "levyg/quadruple.hpp"
#include "levyg/rng.hpp"

namespace levyg {

// One realized path, stored as the ordered list of group factors that
// compose it.  Editing the factor list and recomposing reproduces the
// remaining path bit for bit, which is what the jump-surgery tests rely
// on.
struct SamplePath {
  double T = 1.0;
  int steps = 0;

  std::vector<GMat> cell_factor;   // steps entries: drift + diffusion piece

  struct Jump {
    int cell;          // applied at the end of this cell, after cell_factor
    bool fixed;        // fixed-time jump (from nu) rather than Poisson
    double time;
    GMat factor;
  };
  std::vector<Jump> jumps;         // ordered by cell, Poisson before fixed

  // Composed values at grid times; values[k] includes every factor of
  // cells 0..k-1.  pre_fixed[i] is the value just before fixed jump i
  // (indices into the jumps list).
  std::vector<GMat> values;
  std::vector<std::pair<int, GMat>> pre_fixed;

  double dt() const { return T / steps; }
  double time(int k) const { return T * k / steps; }

  // Rebuild values (and pre_fixed) from the factors.
  void recompose(const GroupDescriptor& desc);

  // Left limit at a fixed-jump time; falls back to the grid value.
  const GMat& at_minus_fixed(int jump_index) const;
};

// Euler scheme on the quadruple grid: per cell the continuous factor
// exp(db - deta(phi) + w) with w ~ N(0, dA), then a Poisson number of
// jumps drawn from the cell's jump slice, then the fixed-time jump at
// atom times.  Identical (seed, path index) keys give identical paths
// regardless of how many paths are drawn.
class Simulator {
 public:
  Simulator(const GridQuadruple& q, const GroupDescriptor& desc);

  SamplePath path(std::uint64_t seed, std::uint64_t path_index) const;

  // Streaming ensemble driver; paths are delivered in index order.
  void ensemble(std::uint64_t seed, int paths,
                const std::function<void(int, const SamplePath&)>& sink) const;

 private:
  struct Cell {
    GVec drift;                    // db - deta(phi)
    GMat noise;                    // matrix square root of dA
    double lambda;                 // deta mass
    const FiniteMeasure* slice;    // jump law atoms (weights sum to lambda)
    const FiniteMeasure* atom;     // fixed jump at the cell's end, if any
    double atom_time;
  };
  const GridQuadruple* q_;
  const GroupDescriptor* desc_;
  std::vector<Cell> cells_;
};

// Removes jump j from the path (returns the removed record).
SamplePath::Jump remove_jump(SamplePath& path, size_t j,
                             const GroupDescriptor& desc);
// Reinserts a removed record at its original position.
void insert_jump(SamplePath& path, const SamplePath::Jump& jump,
                 const GroupDescriptor& desc);

}  // namespace levyg
