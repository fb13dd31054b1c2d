#pragma once

#include <cstdint>
#include <vector>

#include "matrix.hpp"

namespace credanno {

struct KMeansOptions {
  int max_iterations = 300;
  // Independent k-means++ starts; the lowest-inertia result is kept.
  int restarts = 10;
};

struct ClusteringResult {
  Matrix centroids;                    // n x D
  std::vector<std::size_t> assignment;  // per point, in [0, n)
  double inertia = 0.0;                 // sum of squared Euclidean distances
  int iterations = 0;
  // Inertia after each Lloyd iteration of the kept start.
  std::vector<double> inertia_trace;
};

// Lloyd's algorithm from k-means++ starts, iterated to an assignment fixed
// point or `max_iterations`. Empty clusters are refilled with the point
// farthest from its centroid. Deterministic in `rng_seed`.
ClusteringResult kmeans(const Matrix& points, std::size_t n, std::uint64_t rng_seed, const KMeansOptions& options = {});

double sum_squared_distance(const Matrix& points, const Matrix& centroids, const std::vector<std::size_t>& assignment);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct SeedChoice {
  std::size_t point;  // row of `points`
  std::size_t cluster;
  double similarity;
};

// For each centroid the point with the highest cosine similarity to it.
// With `within_cluster` the candidates are the centroid's own members;
// otherwise every point is a candidate and a point already taken by an
// earlier centroid falls through to the next most similar one. Zero-norm
// points are skipped; a cluster without any usable candidate, or with a
// zero-norm centroid, is an error. Ties go to the lowest point index.
std::vector<SeedChoice> select_seeds(const Matrix& points, const ClusteringResult& clustering,
                                     bool within_cluster = true);

}  // namespace credanno
