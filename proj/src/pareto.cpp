#include "pfr/pareto.hpp"

#include "pfr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pfr {

namespace {

void check_point(const ParetoPoint &p) {
  if (!std::isfinite(p.memory) || !std::isfinite(p.error))
    throw std::invalid_argument("pareto: points must be finite");
}

} // namespace

void ParetoFront::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    check_point(points[i]);
    if (i > 0) {
      if (!(points[i].memory > points[i - 1].memory))
        throw std::invalid_argument("pareto: front memory must increase strictly");
      if (!(points[i].error < points[i - 1].error))
        throw std::invalid_argument("pareto: front error must decrease strictly");
    }
  }
}

ParetoFront pareto_front(const std::vector<ParetoPoint> &points) {
  if (points.empty()) throw std::invalid_argument("pareto_front: no points");
  std::vector<ParetoPoint> sorted = points;
  for (const ParetoPoint &p : sorted) check_point(p);
  std::sort(sorted.begin(), sorted.end(), [](const ParetoPoint &a, const ParetoPoint &b) {
    if (a.memory != b.memory) return a.memory < b.memory;
    if (a.error != b.error) return a.error < b.error;
    return a.config_id < b.config_id;
  });
  ParetoFront front;
  double min_error = std::numeric_limits<double>::infinity();
  for (const ParetoPoint &p : sorted)
    if (p.error < min_error) {
      front.points.push_back(p);
      min_error = p.error;
    }
  return front;
}

std::vector<ParetoPoint> normalize_memory(const std::vector<ParetoPoint> &points, double m_min,
                                          double m_max) {
  if (!(m_max > m_min)) throw std::invalid_argument("normalize_memory: degenerate memory range");
  std::vector<ParetoPoint> out = points;
  for (ParetoPoint &p : out) p.memory = (p.memory - m_min) / (m_max - m_min);
  return out;
}

ParetoFront normalize_memory(const ParetoFront &front, double m_min, double m_max) {
  ParetoFront out;
  out.points = normalize_memory(front.points, m_min, m_max);
  return out;
}

double convergence(const ParetoFront &estimated, const ParetoFront &truth) {
  if (estimated.empty() || truth.empty()) throw std::invalid_argument("convergence: empty front");
  double total = 0.0;
  for (const ParetoPoint &p : estimated.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const ParetoPoint &q : truth.points) {
      const double dm = p.memory - q.memory;
      const double de = p.error - q.error;
      best = std::min(best, std::sqrt(dm * dm + de * de));
    }
    total += best;
  }
  return total / static_cast<double>(estimated.size());
}

double hypervolume(const ParetoFront &front, const HyperBound &bound) {
  front.validate();
  if (front.empty()) throw std::invalid_argument("hypervolume: empty front");
  for (const ParetoPoint &p : front.points)
    if (p.memory > bound.memory || p.error > bound.error)
      throw std::invalid_argument("hypervolume: bound does not dominate the front");
  double area = 0.0;
  for (std::size_t i = 0; i < front.points.size(); ++i) {
    const double next_mem = (i + 1 < front.points.size()) ? front.points[i + 1].memory : bound.memory;
    area += (next_mem - front.points[i].memory) * (bound.error - front.points[i].error);
  }
  return area;
}

double hyperdiff(const ParetoFront &estimated, const ParetoFront &truth, const HyperBound &bound) {
  return std::fabs(hypervolume(estimated, bound) - hypervolume(truth, bound));
}

ParetoPoint choose_config(const ParetoFront &front, double m_max) {
  front.validate();
  const ParetoPoint *pick = nullptr;
  for (const ParetoPoint &p : front.points)
    if (p.memory <= m_max) pick = &p;
  if (!pick) throw std::runtime_error("choose_config: no frontier point fits the memory cap");
  return *pick;
}

ParetoPoint choose_random_high_memory(const std::vector<ParetoPoint> &points, double m_max,
                                      std::uint64_t seed) {
  std::vector<const ParetoPoint *> feasible;
  for (const ParetoPoint &p : points) {
    check_point(p);
    if (p.memory <= m_max) feasible.push_back(&p);
  }
  if (feasible.empty()) throw std::runtime_error("choose_random_high_memory: no configuration fits the cap");
  double top = -std::numeric_limits<double>::infinity();
  for (const ParetoPoint *p : feasible) top = std::max(top, p->memory);
  std::vector<const ParetoPoint *> candidates;
  for (const ParetoPoint *p : feasible)
    if (p->memory == top) candidates.push_back(p);
  std::mt19937_64 rng(seed);
  return *candidates[uniform_below(rng, candidates.size())];
}

} // namespace pfr
