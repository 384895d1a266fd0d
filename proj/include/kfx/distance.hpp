#pragma once

// Distance metrics over feature vectors and the pairwise matrix built from
// them. Euclidean is the default everywhere; cosine is not a metric (no
// triangle inequality) but is accepted for selection/dedup.

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kfx {

enum class Metric { Euclidean, Manhattan, Cosine };

inline Metric parse_metric(const std::string& name) {
  if (name == "euclidean") return Metric::Euclidean;
  if (name == "manhattan") return Metric::Manhattan;
  if (name == "cosine") return Metric::Cosine;
  throw std::invalid_argument("unknown metric: " + name);
}

inline std::string metric_name(Metric m) {
  switch (m) {
    case Metric::Euclidean: return "euclidean";
    case Metric::Manhattan: return "manhattan";
    default: return "cosine";
  }
}

inline void check_lengths(std::span<const double> a,
                          std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("distance: length mismatch");
}

inline double euclidean(std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b);
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double manhattan(std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b);
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

// 1 - cos(angle). A zero vector has no direction; its distance to anything
// is defined as 1 so the function is total.
inline double cosine_distance(std::span<const double> a,
                              std::span<const double> b) {
  check_lengths(a, b);
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 1.0;
  double c = dot / (std::sqrt(na) * std::sqrt(nb));
  c = std::min(1.0, std::max(-1.0, c));
  return 1.0 - c;
}

inline double distance(Metric m, std::span<const double> a,
                       std::span<const double> b) {
  switch (m) {
    case Metric::Euclidean: return euclidean(a, b);
    case Metric::Manhattan: return manhattan(a, b);
    default: return cosine_distance(a, b);
  }
}

// Symmetric n x n matrix with zero diagonal. Upper triangle is computed,
// lower is mirrored, so symmetry is exact.
struct DistanceMatrix {
  int n = 0;
  std::vector<double> values;  // n * n

  double at(int i, int j) const {
    return values[static_cast<std::size_t>(i) * n + j];
  }
};

inline DistanceMatrix pairwise(const std::vector<std::vector<double>>& points,
                               Metric m) {
  const int n = static_cast<int>(points.size());
  if (n < 1) throw std::invalid_argument("pairwise: empty point set");
  DistanceMatrix dm;
  dm.n = n;
  dm.values.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = distance(m, points[i], points[j]);
      dm.values[static_cast<std::size_t>(i) * n + j] = d;
      dm.values[static_cast<std::size_t>(j) * n + i] = d;
    }
  return dm;
}

}  // namespace kfx
