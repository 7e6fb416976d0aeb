#pragma once

#include <cstdint>
#include <vector>

namespace pfr {

// One configuration's cost pair. Both coordinates are minimized.
struct ParetoPoint {
  double memory = 0.0;
  double error = 0.0;
  int config_id = 0;
};

// Reference corner for hypervolume: every front point must be at least as
// good as the bound in both coordinates.
struct HyperBound {
  double memory = 1.0;
  double error = 1.0;
};

// Non-dominated subset, sorted by memory ascending with strictly decreasing
// error. Points with identical coordinates collapse to the lowest config id.
struct ParetoFront {
  std::vector<ParetoPoint> points;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
  void validate() const;
};

ParetoFront pareto_front(const std::vector<ParetoPoint> &points);

// Affine rescale of the memory coordinate so [m_min, m_max] maps to [0, 1].
std::vector<ParetoPoint> normalize_memory(const std::vector<ParetoPoint> &points, double m_min,
                                          double m_max);
ParetoFront normalize_memory(const ParetoFront &front, double m_min, double m_max);

// Mean distance from each estimated front point to its nearest true point.
double convergence(const ParetoFront &estimated, const ParetoFront &truth);

// Area dominated by the front inside the bound corner (2-D sweep).
double hypervolume(const ParetoFront &front, const HyperBound &bound);

// Absolute hypervolume difference between two fronts under one bound.
double hyperdiff(const ParetoFront &estimated, const ParetoFront &truth, const HyperBound &bound);

// The frontier point with the largest memory not exceeding m_max; by the
// front's shape it carries the lowest achievable error within the cap.
ParetoPoint choose_config(const ParetoFront &front, double m_max);

// Baseline chooser: among all configurations within the cap, take the ones
// with the maximal memory and pick uniformly at random.
ParetoPoint choose_random_high_memory(const std::vector<ParetoPoint> &points, double m_max,
                                      std::uint64_t seed);

} // namespace pfr
