#pragma once

// Shared inputs for the metric and stability tests.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "eisc/evalx.hpp"

namespace fixture {

struct ReferenceResult {
  std::string name;
  std::vector<std::vector<std::uint64_t>> rows;
  double error_pct;
  double f1;
};

/// Reference confusion matrices with their expected (error %, F1).
inline const std::vector<ReferenceResult>& reference_results() {
  static const std::vector<ReferenceResult> results{
      {"classes/clrl", {{56, 44, 0}, {26, 74, 0}, {0, 91, 9}}, 53.67, 41.98},
      {"classes/clssal", {{100, 0, 0}, {0, 100, 0}, {0, 0, 100}}, 0.0, 100.0},
      {"classes/clmxl", {{73, 27, 0}, {14, 86, 0}, {0, 0, 100}}, 13.67, 86.27},
      {"classes/nll", {{0, 0, 100}, {0, 0, 100}, {0, 0, 100}}, 66.67, 16.67},
      {"clusters/clrl", {{40, 57, 3}, {51, 41, 8}, {0, 0, 100}}, 39.67, 59.36},
      {"clusters/clssal", {{36, 64, 0}, {84, 16, 0}, {0, 0, 100}}, 49.33, 50.17},
      {"clusters/clmxl", {{37, 63, 0}, {15, 85, 0}, {0, 0, 100}}, 26.0, 72.41},
      {"clusters/nll", {{0, 0, 100}, {0, 0, 100}, {0, 0, 100}}, 66.67, 16.67},
  };
  return results;
}

inline eisc::ConfusionMatrix to_matrix(const ReferenceResult& r) {
  return eisc::ConfusionMatrix::from_rows({"c1", "c2", "c3"}, r.rows);
}

/// Synthetic corpus split in three portions: the first trains, the other two
/// form the test pool.
inline std::pair<std::vector<eisc::Document>, std::vector<eisc::Document>> train_and_pool(
    std::size_t docs_per_group, double overlap, std::uint64_t seed) {
  const auto corpus = eisc::generate_synthetic_corpus(
      eisc::default_synthetic_spec(docs_per_group, overlap, seed));
  auto parts = eisc::split_batches(std::span<const eisc::Document>(corpus), 3, seed);
  std::vector<eisc::Document> pool = parts[1];
  pool.insert(pool.end(), parts[2].begin(), parts[2].end());
  return {std::move(parts[0]), std::move(pool)};
}

}  // namespace fixture
