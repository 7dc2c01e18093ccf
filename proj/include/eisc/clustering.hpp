#pragma once

// Per-batch baseline clusterer: normalized spectral embedding with unit
// length rows and k+1 eigenvectors, followed by k-means++ / Lloyd.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "eisc/corpus.hpp"
#include "eisc/error.hpp"
#include "eisc/laplacian.hpp"
#include "eisc/parallel.hpp"

namespace eisc {

struct SpectralEmbedding {
  Eigen::MatrixXd rows;  // n x (k+1)
  std::size_t k = 0;
};

struct Clustering {
  std::vector<std::size_t> assignment;
  std::size_t k = 0;
  double inertia = 0.0;
  /// Centroids the final assignment was computed against (k x d).
  Eigen::MatrixXd centroids;
  /// Inertia after every assignment step of the winning restart.
  std::vector<double> inertia_history;

  std::vector<std::vector<std::size_t>> members() const {
    std::vector<std::vector<std::size_t>> out(k);
    for (std::size_t i = 0; i < assignment.size(); ++i) out[assignment[i]].push_back(i);
    return out;
  }
};

struct KMeansOptions {
  std::size_t restarts = 10;
  std::size_t max_iterations = 100;
  double relative_tolerance = 1e-6;
  unsigned threads = 1;
};

/// Eigenvectors of the normalized Laplacian for the k+1 smallest eigenvalues.
/// Each column is sign-fixed so its largest-magnitude entry is positive,
/// then rows are scaled to unit length (zero rows stay zero).
inline SpectralEmbedding spectral_embed(const SimilarityMatrix& s, std::size_t k) {
  if (k < 2) throw InvalidArgument("spectral_embed: k must be >= 2");
  const std::size_t n = s.size();
  if (n < k + 1) {
    throw TooFewDocuments("spectral_embed: need at least k+1 = " + std::to_string(k + 1) +
                          " documents, got " + std::to_string(n));
  }
  const Laplacian lap = normalized_laplacian(s);
  const Eigen::MatrixXd sym = 0.5 * (lap.values + lap.values.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw EigensolverFailure("spectral_embed: eigendecomposition did not converge");
  }
  const auto d = static_cast<Eigen::Index>(k + 1);
  SpectralEmbedding emb;
  emb.k = k;
  emb.rows = solver.eigenvectors().leftCols(d);
  for (Eigen::Index c = 0; c < d; ++c) {
    Eigen::Index arg = 0;
    emb.rows.col(c).cwiseAbs().maxCoeff(&arg);
    if (emb.rows(arg, c) < 0.0) emb.rows.col(c) *= -1.0;
  }
  for (Eigen::Index r = 0; r < emb.rows.rows(); ++r) {
    const double norm = emb.rows.row(r).norm();
    if (norm > 0.0) emb.rows.row(r) /= norm;
  }
  return emb;
}

namespace detail {

inline double squared_distance(const Eigen::MatrixXd& points, Eigen::Index row,
                               const Eigen::MatrixXd& centroids, Eigen::Index c) {
  return (points.row(row) - centroids.row(c)).squaredNorm();
}

/// Nearest centroid per point, lowest index on ties. Returns the inertia.
inline double assign_nearest(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids,
                             std::vector<std::size_t>& assignment) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index arg = 0;
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
      const double dist = squared_distance(points, i, centroids, c);
      if (dist < best) {
        best = dist;
        arg = c;
      }
    }
    assignment[static_cast<std::size_t>(i)] = static_cast<std::size_t>(arg);
    inertia += best;
  }
  return inertia;
}

inline Eigen::MatrixXd kmeans_plus_plus(const Eigen::MatrixXd& points, std::size_t k,
                                        std::mt19937_64& rng) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd centroids(static_cast<Eigen::Index>(k), points.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centroids.row(0) = points.row(pick(rng));
  std::vector<double> nearest(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) nearest[i] = squared_distance(points, i, centroids, 0);
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : nearest) total += d;
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= nearest[i];
        if (target < 0.0 && nearest[i] > 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    const auto ci = static_cast<Eigen::Index>(c);
    centroids.row(ci) = points.row(chosen);
    for (Eigen::Index i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points, i, centroids, ci));
    }
  }
  return centroids;
}

/// Centroid update; an empty cluster is reseeded at the point farthest from
/// its own centroid.
inline void update_centroids(const Eigen::MatrixXd& points,
                             const std::vector<std::size_t>& assignment,
                             Eigen::MatrixXd& centroids) {
  const Eigen::Index k = centroids.rows();
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    sums.row(static_cast<Eigen::Index>(assignment[i])) += points.row(i);
    ++counts[assignment[i]];
  }
  std::vector<bool> used(static_cast<std::size_t>(points.rows()), false);
  for (Eigen::Index c = 0; c < k; ++c) {
    if (counts[c] > 0) centroids.row(c) = sums.row(c) / static_cast<double>(counts[c]);
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    if (counts[c] > 0) continue;
    double far = -1.0;
    Eigen::Index arg = 0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      if (used[i]) continue;
      const double d = squared_distance(points, i, centroids,
                                        static_cast<Eigen::Index>(assignment[i]));
      if (d > far) {
        far = d;
        arg = i;
      }
    }
    used[arg] = true;
    centroids.row(c) = points.row(arg);
  }
}

/// Guarantees every cluster has a member by moving the point farthest from
/// its centroid (taken from clusters of size > 1). Only reachable when the
/// point set has fewer distinct rows than k.
inline void fill_empty_clusters(const Eigen::MatrixXd& points, Eigen::MatrixXd& centroids,
                                Clustering& result) {
  std::vector<std::size_t> counts(result.k, 0);
  for (auto a : result.assignment) ++counts[a];
  for (std::size_t c = 0; c < result.k; ++c) {
    if (counts[c] > 0) continue;
    double far = -1.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < result.assignment.size(); ++i) {
      if (counts[result.assignment[i]] < 2) continue;
      const double d = squared_distance(points, static_cast<Eigen::Index>(i), centroids,
                                        static_cast<Eigen::Index>(result.assignment[i]));
      if (d > far) {
        far = d;
        arg = i;
      }
    }
    --counts[result.assignment[arg]];
    result.assignment[arg] = c;
    counts[c] = 1;
    centroids.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(arg));
  }
}

inline Clustering lloyd(const Eigen::MatrixXd& points, std::size_t k, std::mt19937_64& rng,
                        const KMeansOptions& options) {
  Eigen::MatrixXd centroids = kmeans_plus_plus(points, k, rng);
  Clustering result;
  result.k = k;
  result.assignment.assign(static_cast<std::size_t>(points.rows()), 0);
  double inertia = assign_nearest(points, centroids, result.assignment);
  result.inertia_history.push_back(inertia);
  std::vector<std::size_t> next(result.assignment.size());
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    update_centroids(points, result.assignment, centroids);
    const double next_inertia = assign_nearest(points, centroids, next);
    result.inertia_history.push_back(next_inertia);
    const bool changed = next != result.assignment;
    result.assignment.swap(next);
    const double drop = inertia - next_inertia;
    inertia = next_inertia;
    if (!changed || drop <= options.relative_tolerance * inertia) break;
  }
  result.inertia = inertia;
  fill_empty_clusters(points, centroids, result);
  result.centroids = std::move(centroids);
  return result;
}

}  // namespace detail

/// Best of `restarts` k-means++ / Lloyd runs by inertia. Restart r draws
/// from its own generator seeded with (seed, r), and ties between restarts
/// go to the lowest index, so the thread count never changes the result.
inline Clustering kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed,
                         const KMeansOptions& options = {}) {
  if (k == 0) throw InvalidArgument("kmeans: k must be positive");
  if (static_cast<std::size_t>(points.rows()) < k) {
    throw TooFewDocuments("kmeans: fewer points than clusters");
  }
  const std::size_t restarts = std::max<std::size_t>(1, options.restarts);
  std::vector<Clustering> runs(restarts);
  parallel_for(restarts, options.threads, [&](std::size_t r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    runs[r] = detail::lloyd(points, k, rng, options);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < restarts; ++r) {
    if (runs[r].inertia < runs[best].inertia) best = r;
  }
  return std::move(runs[best]);
}

/// Normalized spectral clustering into k clusters. With exactly k documents
/// every document is its own cluster.
inline Clustering spectral_cluster(const SimilarityMatrix& s, std::size_t k, std::uint64_t seed,
                                   const KMeansOptions& options = {}) {
  if (k >= 2 && s.size() == k) {
    Clustering trivial;
    trivial.k = k;
    trivial.assignment.resize(k);
    for (std::size_t i = 0; i < k; ++i) trivial.assignment[i] = i;
    trivial.inertia_history = {0.0};
    return trivial;
  }
  const SpectralEmbedding emb = spectral_embed(s, k);
  return kmeans(emb.rows, k, seed, options);
}

}  // namespace eisc
