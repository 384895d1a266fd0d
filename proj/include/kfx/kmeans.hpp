#pragma once

// k-means++ seeding and Lloyd iteration. Clustering always uses squared
// Euclidean distance (the k-means objective); the configurable metrics in
// distance.hpp apply to representative selection and dedup, not here.
//
// Determinism: ties in assignment go to the lowest cluster id, centroid
// sums run in ascending point order, and each restart draws from a stream
// derived from (base seed, restart index) only, so the result is a pure
// function of (points, k, seed).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "kfx/rng.hpp"

namespace kfx {

struct ClusterModel {
  int k = 0;
  std::vector<std::vector<double>> centroids;   // k x dim
  std::vector<int> assignments;                 // point index -> cluster id
  double inertia = 0.0;                         // sum of squared distances
  std::vector<double> inertia_trace;            // per Lloyd iteration
};

struct KMeansOptions {
  double tol = 1e-4;   // max centroid displacement to declare convergence
  int max_iter = 300;
  int restarts = 1;    // best inertia wins, ties -> lowest restart index
};

namespace detail {

inline double sq_dist(const std::vector<double>& a,
                      const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline std::size_t count_distinct(
    const std::vector<std::vector<double>>& points) {
  std::vector<const std::vector<double>*> ptrs;
  ptrs.reserve(points.size());
  for (const auto& p : points) ptrs.push_back(&p);
  std::sort(ptrs.begin(), ptrs.end(),
            [](const auto* a, const auto* b) { return *a < *b; });
  std::size_t n = 0;
  for (std::size_t i = 0; i < ptrs.size(); ++i)
    if (i == 0 || *ptrs[i] != *ptrs[i - 1]) ++n;
  return n;
}

// Nearest-centroid assignment; ties go to the lowest cluster id.
inline void assign_points(const std::vector<std::vector<double>>& points,
                          const std::vector<std::vector<double>>& centroids,
                          std::vector<int>& assign,
                          std::vector<double>& dist) {
  const int n = static_cast<int>(points.size());
  const int k = static_cast<int>(centroids.size());
  for (int i = 0; i < n; ++i) {
    int best = 0;
    double bd = sq_dist(points[i], centroids[0]);
    for (int c = 1; c < k; ++c) {
      const double d = sq_dist(points[i], centroids[c]);
      if (d < bd) {
        bd = d;
        best = c;
      }
    }
    assign[i] = best;
    dist[i] = bd;
  }
}

// Move an empty centroid onto the point farthest from its assigned
// centroid (drawn only from clusters that keep >= 2 members; ties ->
// lowest point index). Setting the centroid to the point itself makes the
// repair strictly decrease inertia.
inline bool repair_empty(const std::vector<std::vector<double>>& points,
                         std::vector<std::vector<double>>& centroids,
                         std::vector<int>& assign, std::vector<double>& dist) {
  const int n = static_cast<int>(points.size());
  const int k = static_cast<int>(centroids.size());
  std::vector<int> counts(k, 0);
  for (int a : assign) ++counts[a];
  bool repaired = false;
  for (int c = 0; c < k; ++c) {
    if (counts[c] > 0) continue;
    int victim = -1;
    double worst = -1;
    for (int i = 0; i < n; ++i) {
      if (counts[assign[i]] < 2) continue;
      if (dist[i] > worst) {
        worst = dist[i];
        victim = i;
      }
    }
    if (victim < 0) break;  // all clusters singletons; nothing to steal
    --counts[assign[victim]];
    centroids[c] = points[victim];
    assign[victim] = c;
    dist[victim] = 0.0;
    counts[c] = 1;
    repaired = true;
  }
  return repaired;
}

struct LloydResult {
  std::vector<std::vector<double>> centroids;
  std::vector<int> assign;
  double inertia = 0.0;
  std::vector<double> trace;
};

inline LloydResult lloyd(const std::vector<std::vector<double>>& points,
                         std::vector<std::vector<double>> centroids,
                         const KMeansOptions& opt) {
  const int n = static_cast<int>(points.size());
  const int k = static_cast<int>(centroids.size());
  const std::size_t dim = points[0].size();
  std::vector<int> assign(n, 0);
  std::vector<double> dist(n, 0.0);
  LloydResult res;
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    assign_points(points, centroids, assign, dist);
    repair_empty(points, centroids, assign, dist);
    double inertia = 0.0;
    for (int i = 0; i < n; ++i) inertia += dist[i];
    res.trace.push_back(inertia);
    // mean update, fixed ascending point order
    std::vector<std::vector<double>> next(k, std::vector<double>(dim, 0.0));
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      auto& acc = next[assign[i]];
      for (std::size_t d = 0; d < dim; ++d) acc[d] += points[i][d];
      ++counts[assign[i]];
    }
    double disp = 0.0;
    for (int c = 0; c < k; ++c) {
      for (std::size_t d = 0; d < dim; ++d) next[c][d] /= counts[c];
      disp = std::max(disp, std::sqrt(sq_dist(next[c], centroids[c])));
    }
    centroids = std::move(next);
    if (disp < opt.tol) break;
  }
  // Final assignment against the final centroids so the reported model is
  // self-consistent (every point on its nearest centroid).
  assign_points(points, centroids, assign, dist);
  if (repair_empty(points, centroids, assign, dist))
    assign_points(points, centroids, assign, dist);
  double inertia = 0.0;
  for (int i = 0; i < n; ++i) inertia += dist[i];
  res.trace.push_back(inertia);
  res.inertia = inertia;
  res.centroids = std::move(centroids);
  res.assign = std::move(assign);
  return res;
}

}  // namespace detail

// k-means++: first centroid uniform over the points, each next one sampled
// with probability proportional to the squared distance to the nearest
// centroid chosen so far.
inline std::vector<std::vector<double>> kmeans_pp_init(
    const std::vector<std::vector<double>>& points, int k, Rng& rng) {
  const int n = static_cast<int>(points.size());
  if (n < 1) throw std::invalid_argument("kmeans: empty point set");
  if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (static_cast<std::size_t>(k) > detail::count_distinct(points))
    throw std::invalid_argument(
        "kmeans: k exceeds the number of distinct points");
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  centroids.push_back(points[rng.bounded(static_cast<std::uint64_t>(n))]);
  std::vector<double> mind(n);
  for (int i = 0; i < n; ++i)
    mind[i] = detail::sq_dist(points[i], centroids[0]);
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (double d : mind) total += d;
    const double u = rng.next_double() * total;
    int pick = -1;
    double cum = 0.0;
    for (int i = 0; i < n; ++i) {
      cum += mind[i];
      if (u < cum) {
        pick = i;
        break;
      }
    }
    if (pick < 0) {  // floating-point edge: take the last positive weight
      for (int i = n - 1; i >= 0; --i)
        if (mind[i] > 0.0) {
          pick = i;
          break;
        }
    }
    centroids.push_back(points[pick]);
    for (int i = 0; i < n; ++i)
      mind[i] = std::min(mind[i], detail::sq_dist(points[i], centroids.back()));
  }
  return centroids;
}

// Lloyd iteration from k-means++ seeds. `rng` contributes one draw that
// anchors the restart streams; restart r then runs on Rng(splitmix(base, r)).
inline ClusterModel kmeans_fit(const std::vector<std::vector<double>>& points,
                               int k, Rng& rng, KMeansOptions opt = {}) {
  if (points.empty()) throw std::invalid_argument("kmeans: empty point set");
  const std::uint64_t base = rng.next_u64();
  ClusterModel best;
  bool have = false;
  for (int r = 0; r < std::max(1, opt.restarts); ++r) {
    Rng rr(splitmix64_at(base, static_cast<std::uint64_t>(r)));
    auto seeds = kmeans_pp_init(points, k, rr);
    auto res = detail::lloyd(points, std::move(seeds), opt);
    if (!have || res.inertia < best.inertia) {
      have = true;
      best.k = k;
      best.centroids = std::move(res.centroids);
      best.assignments = std::move(res.assign);
      best.inertia = res.inertia;
      best.inertia_trace = std::move(res.trace);
    }
  }
  return best;
}

}  // namespace kfx
