#pragma once

// Batch-wise clustering merged through eigenvalue spectra: random batch
// split, per-batch spectral clustering, and matching of every later batch's
// clusters against reference spectral functions from the first batch.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "eisc/clustering.hpp"
#include "eisc/corpus.hpp"
#include "eisc/error.hpp"
#include "eisc/io.hpp"
#include "eisc/parallel.hpp"
#include "eisc/spectra.hpp"

namespace eisc {

/// Uniform random partition of [0, count) into `parts` index sets whose
/// sizes differ by at most one. Indices inside each part are ascending.
inline std::vector<std::vector<std::size_t>> split_batches(std::size_t count, std::size_t parts,
                                                           std::uint64_t seed,
                                                           std::size_t min_per_part = 1) {
  if (parts < 1) throw InvalidArgument("split_batches: need at least one part");
  if (count < parts * std::max<std::size_t>(1, min_per_part)) {
    throw TooFewDocuments("split_batches: " + std::to_string(count) +
                          " documents cannot fill " + std::to_string(parts) + " batches of " +
                          std::to_string(min_per_part));
  }
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out(parts);
  const std::size_t base = count / parts;
  const std::size_t extra = count % parts;
  std::size_t pos = 0;
  for (std::size_t p = 0; p < parts; ++p) {
    const std::size_t size = base + (p < extra ? 1 : 0);
    out[p].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                  order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(out[p].begin(), out[p].end());
    pos += size;
  }
  return out;
}

inline std::vector<std::vector<Document>> split_batches(std::span<const Document> docs,
                                                        std::size_t parts, std::uint64_t seed,
                                                        std::size_t min_per_part = 1) {
  std::vector<std::vector<Document>> out;
  for (const auto& idx : split_batches(docs.size(), parts, seed, min_per_part)) {
    auto& batch = out.emplace_back();
    for (auto i : idx) batch.push_back(docs[i]);
  }
  return out;
}

/// Frozen reference spectral functions, one per cluster id 0..k-1.
struct ClusterModel {
  MatchMethod method = MatchMethod::clssal;
  std::vector<SpectralFunction> references;
  /// Optional display names (e.g. class labels), parallel to `references`.
  std::vector<std::string> names;

  std::size_t k() const { return references.size(); }
};

/// One reference per member list; each list indexes rows of `s`.
inline ClusterModel build_cluster_model(const SimilarityMatrix& s,
                                        std::span<const std::vector<std::size_t>> clusters,
                                        MatchMethod method, unsigned threads = 1) {
  ClusterModel model;
  model.method = method;
  model.references.resize(clusters.size());
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (clusters[c].size() < 2) {
      throw DegenerateCluster("reference cluster " + std::to_string(c) + " has " +
                              std::to_string(clusters[c].size()) + " member(s)");
    }
  }
  parallel_for(clusters.size(), threads, [&](std::size_t c) {
    model.references[c] = spectral_function_of(s.submatrix(clusters[c]), method);
  });
  return model;
}

/// Distance from `f` to every reference of the model.
inline std::vector<double> reference_distances(const SpectralFunction& f,
                                               const ClusterModel& model) {
  std::vector<double> out;
  out.reserve(model.k());
  for (const auto& ref : model.references) {
    out.push_back(spectral_distance(f, ref, model.method));
  }
  return out;
}

/// Argmin of the distances; ties go to the lowest cluster id.
inline std::size_t nearest_reference(std::span<const double> distances) {
  if (distances.empty()) throw InvalidArgument("cluster model has no references");
  std::size_t best = 0;
  for (std::size_t j = 1; j < distances.size(); ++j) {
    if (distances[j] < distances[best]) best = j;
  }
  return best;
}

inline std::size_t assign_cluster(const SpectralFunction& f, const ClusterModel& model) {
  const auto d = reference_distances(f, model);
  return nearest_reference(d);
}

/// Class assignment of a new document group by its spectrum.
inline std::size_t assign_cluster(const SimilarityMatrix& s_new, const ClusterModel& model) {
  if (model.references.empty()) throw InvalidArgument("cluster model has no references");
  return assign_cluster(spectral_function_of(s_new, model.method), model);
}

/// Injective map rows -> columns of `cost` (rows <= cols) with minimum total
/// cost, by exhaustive search. Among equal totals the lexicographically
/// smallest assignment wins.
inline std::vector<std::size_t> min_cost_injection(
    const std::vector<std::vector<double>>& cost, std::size_t cols) {
  const std::size_t rows = cost.size();
  if (rows > cols) throw InvalidArgument("min_cost_injection: more rows than columns");
  if (cols > 8) throw InvalidArgument("bijective matching supports k <= 8");
  std::vector<std::size_t> perm(cols);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best;
  double best_total = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r) total += cost[r][perm[r]];
    std::vector<std::size_t> candidate(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(rows));
    if (total < best_total || (total == best_total && candidate < best)) {
      best_total = total;
      best = std::move(candidate);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

struct MergedEntry {
  std::string doc_id;
  std::size_t global_cluster = 0;
  std::size_t batch = 0;
  std::size_t local_cluster = 0;
};

struct MergedClustering {
  std::vector<MergedEntry> entries;  // input document order
  ClusterModel model;
  std::vector<std::string> warnings;

  std::vector<std::size_t> assignment() const {
    std::vector<std::size_t> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.global_cluster);
    return out;
  }
};

struct IncrementalOptions {
  Weighting weighting = Weighting::tf;
  bool bijective = false;
  unsigned threads = 1;
  KMeansOptions kmeans;
};

namespace detail {

/// Sum of unit-normalized term vectors over `members`.
inline std::map<std::uint32_t, double> centroid_of(std::span<const TermVector> vectors,
                                                   std::span<const std::size_t> members) {
  std::map<std::uint32_t, double> c;
  for (auto m : members) {
    for (const auto& [id, w] : vectors[m].entries) c[id] += w / vectors[m].norm;
  }
  return c;
}

inline double cosine_to(const std::map<std::uint32_t, double>& centroid, const TermVector& v) {
  double dot = 0.0;
  double sq = 0.0;
  for (const auto& [id, w] : centroid) sq += w * w;
  for (const auto& [id, w] : v.entries) {
    if (auto it = centroid.find(id); it != centroid.end()) dot += it->second * w;
  }
  if (sq <= 0.0 || v.norm <= 0.0) return 0.0;
  return dot / (std::sqrt(sq) * v.norm);
}

}  // namespace detail

/// Splits `docs` into `m_plus_1` random batches, clusters each batch into k
/// clusters, builds the reference model from batch 0 and maps every cluster
/// of the later batches onto the nearest reference.
///
/// Batch b is clustered with seed `seed + b`. With a single batch the input
/// order is kept, so the result equals spectral_cluster on the whole set.
/// Later-batch clusters with fewer than two members have no spectrum; they
/// join the reference cluster with the most similar term centroid.
inline MergedClustering incremental_cluster(std::span<const Document> docs, std::size_t k,
                                            std::size_t m_plus_1, MatchMethod method,
                                            std::uint64_t seed,
                                            const IncrementalOptions& options = {}) {
  if (m_plus_1 < 1) throw InvalidArgument("incremental_cluster: need at least one batch");
  if (k < 2) throw InvalidArgument("incremental_cluster: k must be >= 2");
  if (options.bijective && k > 8) throw InvalidArgument("bijective matching supports k <= 8");

  std::vector<std::vector<std::size_t>> batches;
  if (m_plus_1 == 1) {
    if (docs.size() < k) throw TooFewDocuments("incremental_cluster: fewer documents than k");
    batches.emplace_back(docs.size());
    std::iota(batches[0].begin(), batches[0].end(), 0);
  } else {
    batches = split_batches(docs.size(), m_plus_1, seed, k);
  }

  struct BatchState {
    SimilarityMatrix s;
    std::vector<TermVector> vectors;  // shared vocabulary, for singleton fallback
    Clustering clustering;
    std::vector<std::vector<std::size_t>> members;
  };
  std::vector<BatchState> state(batches.size());
  Vocabulary shared_vocab;
  std::vector<std::vector<Document>> batch_docs(batches.size());
  for (std::size_t b = 0; b < batches.size(); ++b) {
    for (auto i : batches[b]) batch_docs[b].push_back(docs[i]);
    // Term ids come from one vocabulary so centroids compare across batches;
    // weights still use batch-local statistics.
    state[b].vectors = build_term_vectors(batch_docs[b], options.weighting, shared_vocab);
  }
  KMeansOptions km = options.kmeans;
  km.threads = 1;
  parallel_for(batches.size(), options.threads, [&](std::size_t b) {
    state[b].s = cosine_similarity_matrix(state[b].vectors);
    state[b].clustering = spectral_cluster(state[b].s, k, seed + b, km);
    state[b].members = state[b].clustering.members();
  });

  MergedClustering result;
  result.model = build_cluster_model(state[0].s, state[0].members, method, options.threads);
  std::vector<std::map<std::uint32_t, double>> ref_centroids;
  for (const auto& m : state[0].members) {
    ref_centroids.push_back(detail::centroid_of(state[0].vectors, m));
  }

  // local -> global map per batch
  std::vector<std::vector<std::size_t>> mapping(batches.size(), std::vector<std::size_t>(k));
  std::iota(mapping[0].begin(), mapping[0].end(), 0);
  std::vector<std::vector<std::string>> batch_warnings(batches.size());
  parallel_for(batches.size(), options.threads, [&](std::size_t b) {
    if (b == 0) return;
    const auto& st = state[b];
    std::vector<std::size_t> spectral_locals;
    std::vector<std::vector<double>> costs;
    for (std::size_t j = 0; j < k; ++j) {
      const auto& members = st.members[j];
      if (members.size() < 2) {
        std::size_t best = 0;
        double best_sim = -1.0;
        for (std::size_t c = 0; c < k; ++c) {
          double sim = 0.0;
          for (auto m : members) sim += detail::cosine_to(ref_centroids[c], st.vectors[m]);
          if (sim > best_sim) {
            best_sim = sim;
            best = c;
          }
        }
        mapping[b][j] = best;
        batch_warnings[b].push_back("batch " + std::to_string(b) + " cluster " +
                                    std::to_string(j) + " has " +
                                    std::to_string(members.size()) +
                                    " member(s); merged by centroid similarity into " +
                                    std::to_string(best));
        continue;
      }
      const auto f = spectral_function_of(st.s.submatrix(members), method);
      costs.push_back(reference_distances(f, result.model));
      spectral_locals.push_back(j);
    }
    if (options.bijective) {
      const auto inj = min_cost_injection(costs, k);
      for (std::size_t r = 0; r < spectral_locals.size(); ++r) {
        mapping[b][spectral_locals[r]] = inj[r];
      }
    } else {
      for (std::size_t r = 0; r < spectral_locals.size(); ++r) {
        mapping[b][spectral_locals[r]] = nearest_reference(costs[r]);
      }
    }
  });
  for (auto& w : batch_warnings) {
    result.warnings.insert(result.warnings.end(), w.begin(), w.end());
  }

  result.entries.resize(docs.size());
  for (std::size_t b = 0; b < batches.size(); ++b) {
    for (std::size_t pos = 0; pos < batches[b].size(); ++pos) {
      const std::size_t doc = batches[b][pos];
      const std::size_t local = state[b].clustering.assignment[pos];
      result.entries[doc] = {docs[doc].id, mapping[b][local], b, local};
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Persistence.

inline nlohmann::ordered_json model_to_json(const ClusterModel& model) {
  nlohmann::ordered_json j;
  j["method"] = std::string(to_string(model.method));
  j["k"] = model.k();
  auto& clusters = j["clusters"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < model.k(); ++c) {
    const auto& f = model.references[c];
    nlohmann::ordered_json entry;
    entry["id"] = c;
    if (c < model.names.size()) entry["name"] = model.names[c];
    entry["source_n"] = f.source_n();
    entry["knots"] = f.knots();
    entry["values"] = f.values();
    clusters.push_back(std::move(entry));
  }
  return j;
}

inline ClusterModel model_from_json(const nlohmann::json& j) {
  try {
    ClusterModel model;
    model.method = parse_method(j.at("method").get<std::string>());
    const auto k = j.at("k").get<std::size_t>();
    const auto& clusters = j.at("clusters");
    if (clusters.size() != k) throw ParseError("model: 'k' does not match cluster count");
    model.references.resize(k);
    bool any_name = false;
    std::vector<std::string> names(k);
    for (const auto& entry : clusters) {
      const auto id = entry.at("id").get<std::size_t>();
      if (id >= k) throw ParseError("model: cluster id out of range");
      model.references[id] = SpectralFunction(entry.at("knots").get<std::vector<double>>(),
                                              entry.at("values").get<std::vector<double>>(),
                                              model.method,
                                              entry.at("source_n").get<std::size_t>());
      if (entry.contains("name")) {
        names[id] = entry["name"].get<std::string>();
        any_name = true;
      }
    }
    for (const auto& ref : model.references) {
      if (ref.knots().empty()) throw ParseError("model: missing cluster id");
    }
    if (any_name) model.names = std::move(names);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
}

inline std::string model_to_string(const ClusterModel& model) {
  return model_to_json(model).dump(2) + "\n";
}

inline ClusterModel model_from_string(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
  return model_from_json(j);
}

inline std::string merged_to_csv(const MergedClustering& merged) {
  std::string out = "doc_id,global_cluster,batch,local_cluster\n";
  for (const auto& e : merged.entries) {
    out += io::csv_field(e.doc_id) + ',' + std::to_string(e.global_cluster) + ',' +
           std::to_string(e.batch) + ',' + std::to_string(e.local_cluster) + '\n';
  }
  return out;
}

inline std::string clustering_to_csv(std::span<const Document> docs, const Clustering& c) {
  std::string out = "doc_id,cluster\n";
  for (std::size_t i = 0; i < docs.size(); ++i) {
    out += io::csv_field(docs[i].id) + ',' + std::to_string(c.assignment[i]) + '\n';
  }
  return out;
}

}  // namespace eisc
