#include "seeding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "error.hpp"
#include "rng.hpp"

namespace credanno {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

Matrix plus_plus_init(const Matrix& points, std::size_t n, Rng& rng) {
  const std::size_t count = points.rows();
  Matrix centroids(0, points.cols());
  std::vector<double> nearest(count, std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(count, false);

  std::size_t first = std::uniform_int_distribution<std::size_t>(0, count - 1)(rng);
  chosen[first] = true;
  centroids.append_row(points.row(first));
  while (centroids.rows() < n) {
    auto last = centroids.row(centroids.rows() - 1);
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      nearest[i] = std::min(nearest[i], sq_dist(points.row(i), last));
      total += nearest[i];
    }
    std::size_t pick = count;
    if (total > 0.0) {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      for (std::size_t i = 0; i < count; ++i) {
        acc += nearest[i];
        if (nearest[i] > 0.0 && r < acc) {
          pick = i;
          break;
        }
      }
      if (pick == count)  // rounding at the top end
        for (std::size_t i = count; i-- > 0;)
          if (nearest[i] > 0.0) {
            pick = i;
            break;
          }
    } else {
      // Every remaining point duplicates a centroid: take any unchosen one.
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < count; ++i)
        if (!chosen[i]) rest.push_back(i);
      pick = rest[std::uniform_int_distribution<std::size_t>(0, rest.size() - 1)(rng)];
    }
    chosen[pick] = true;
    centroids.append_row(points.row(pick));
  }
  return centroids;
}

// Assign each point to its nearest centroid (lowest index on ties).
bool assign(const Matrix& points, const Matrix& centroids, std::vector<std::size_t>& assignment) {
  bool changed = false;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    std::size_t best = 0;
    double best_d = sq_dist(points.row(i), centroids.row(0));
    for (std::size_t c = 1; c < centroids.rows(); ++c) {
      double d = sq_dist(points.row(i), centroids.row(c));
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    if (assignment[i] != best) {
      assignment[i] = best;
      changed = true;
    }
  }
  return changed;
}

// Moves the point farthest from its centroid into each empty cluster.
void repair_empty(const Matrix& points, Matrix& centroids, std::vector<std::size_t>& assignment) {
  const std::size_t n = centroids.rows();
  while (true) {
    std::vector<std::size_t> sizes(n, 0);
    for (auto a : assignment) ++sizes[a];
    auto empty = std::find(sizes.begin(), sizes.end(), 0u);
    if (empty == sizes.end()) return;
    std::size_t target = static_cast<std::size_t>(empty - sizes.begin());
    std::size_t far = points.rows();
    double far_d = -1.0;
    for (std::size_t i = 0; i < points.rows(); ++i) {
      if (sizes[assignment[i]] < 2) continue;
      double d = sq_dist(points.row(i), centroids.row(assignment[i]));
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    assignment[far] = target;
    std::copy(points.row(far).begin(), points.row(far).end(), centroids.row(target).begin());
  }
}

void update(const Matrix& points, Matrix& centroids, const std::vector<std::size_t>& assignment) {
  std::vector<std::size_t> sizes(centroids.rows(), 0);
  Matrix sums(centroids.rows(), centroids.cols());
  for (std::size_t i = 0; i < points.rows(); ++i) {
    auto s = sums.row(assignment[i]);
    auto p = points.row(i);
    for (std::size_t j = 0; j < p.size(); ++j) s[j] += p[j];
    ++sizes[assignment[i]];
  }
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    if (sizes[c] == 0) continue;
    auto dst = centroids.row(c);
    auto s = sums.row(c);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = s[j] / static_cast<double>(sizes[c]);
  }
}

ClusteringResult lloyd(const Matrix& points, Matrix centroids, int max_iterations) {
  ClusteringResult r;
  r.assignment.assign(points.rows(), centroids.rows());  // sentinel: forces a first change
  for (int it = 0; it < max_iterations; ++it) {
    bool changed = assign(points, centroids, r.assignment);
    if (!changed && it > 0) break;
    repair_empty(points, centroids, r.assignment);
    update(points, centroids, r.assignment);
    r.inertia_trace.push_back(sum_squared_distance(points, centroids, r.assignment));
    r.iterations = it + 1;
  }
  r.centroids = std::move(centroids);
  r.inertia = sum_squared_distance(points, r.centroids, r.assignment);
  return r;
}

}  // namespace

double sum_squared_distance(const Matrix& points, const Matrix& centroids, const std::vector<std::size_t>& assignment) {
  double s = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) s += sq_dist(points.row(i), centroids.row(assignment[i]));
  return s;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return dot / (norm(a) * norm(b));
}

ClusteringResult kmeans(const Matrix& points, std::size_t n, std::uint64_t rng_seed, const KMeansOptions& options) {
  if (n < 1) fail(ErrorKind::InvalidArgument, "k-means needs at least one cluster");
  if (n > points.rows())
    fail(ErrorKind::InvalidArgument, "k-means: " + std::to_string(n) + " clusters requested for " +
                                         std::to_string(points.rows()) + " points");
  if (options.max_iterations < 1 || options.restarts < 1)
    fail(ErrorKind::InvalidArgument, "k-means iterations and restarts must be >= 1");

  ClusteringResult best;
  bool have = false;
  for (int start = 0; start < options.restarts; ++start) {
    Rng rng = make_rng(rng_seed, Stream::KMeans, {static_cast<std::uint64_t>(start)});
    auto r = lloyd(points, plus_plus_init(points, n, rng), options.max_iterations);
    if (!have || r.inertia < best.inertia) {
      best = std::move(r);
      have = true;
    }
  }
  return best;
}

std::vector<SeedChoice> select_seeds(const Matrix& points, const ClusteringResult& clustering, bool within_cluster) {
  if (clustering.assignment.size() != points.rows())
    fail(ErrorKind::InvalidArgument, "clustering does not match the point set");
  const std::size_t n = clustering.centroids.rows();
  std::vector<double> norms(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) norms[i] = norm(points.row(i));

  std::vector<bool> taken(points.rows(), false);
  std::vector<SeedChoice> out;
  out.reserve(n);
  for (std::size_t c = 0; c < n; ++c) {
    auto centroid = clustering.centroids.row(c);
    double cnorm = norm(centroid);
    if (cnorm == 0.0) fail(ErrorKind::Runtime, "centroid " + std::to_string(c) + " has zero norm");
    std::size_t best = points.rows();
    double best_sim = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.rows(); ++i) {
      if (taken[i] || norms[i] == 0.0) continue;
      if (within_cluster && clustering.assignment[i] != c) continue;
      auto p = points.row(i);
      double dot = 0.0;
      for (std::size_t j = 0; j < p.size(); ++j) dot += p[j] * centroid[j];
      double sim = dot / (norms[i] * cnorm);
      if (sim > best_sim) {
        best_sim = sim;
        best = i;
      }
    }
    if (best == points.rows())
      fail(ErrorKind::Runtime, "cluster " + std::to_string(c) + " has no non-degenerate candidate");
    taken[best] = true;
    out.push_back({best, c, best_sim});
  }
  return out;
}

}  // namespace credanno
