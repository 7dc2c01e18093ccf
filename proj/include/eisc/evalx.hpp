#pragma once

// Evaluation harness: confusion matrices and their error / macro-F1
// summaries, adjusted Rand index, a seeded synthetic labeled corpus, and
// the subsample stability experiment for the spectrum matchers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "eisc/corpus.hpp"
#include "eisc/error.hpp"
#include "eisc/incremental.hpp"
#include "eisc/io.hpp"
#include "eisc/parallel.hpp"
#include "eisc/spectra.hpp"

namespace eisc {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<std::string> labels)
      : labels_(std::move(labels)), counts_(labels_.size() * labels_.size(), 0) {}

  static ConfusionMatrix from_rows(std::vector<std::string> labels,
                                   const std::vector<std::vector<std::uint64_t>>& rows) {
    ConfusionMatrix cm(std::move(labels));
    if (rows.size() != cm.size()) throw InvalidArgument("confusion rows/labels mismatch");
    for (std::size_t t = 0; t < rows.size(); ++t) {
      if (rows[t].size() != cm.size()) throw InvalidArgument("confusion matrix must be square");
      for (std::size_t p = 0; p < rows[t].size(); ++p) cm.at(t, p) = rows[t][p];
    }
    return cm;
  }

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::uint64_t& at(std::size_t truth, std::size_t pred) { return counts_[truth * size() + pred]; }
  std::uint64_t at(std::size_t truth, std::size_t pred) const {
    return counts_[truth * size() + pred];
  }
  void add(std::size_t truth, std::size_t pred) { ++at(truth, pred); }

  std::uint64_t total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }
  std::uint64_t trace() const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < size(); ++i) t += at(i, i);
    return t;
  }
  std::uint64_t row_sum(std::size_t truth) const {
    std::uint64_t s = 0;
    for (std::size_t p = 0; p < size(); ++p) s += at(truth, p);
    return s;
  }
  std::uint64_t col_sum(std::size_t pred) const {
    std::uint64_t s = 0;
    for (std::size_t t = 0; t < size(); ++t) s += at(t, pred);
    return s;
  }

 private:
  std::vector<std::string> labels_;
  std::vector<std::uint64_t> counts_;
};

/// Percentage of off-diagonal mass.
inline double error_rate(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw InvalidArgument("error_rate: empty confusion matrix");
  return 100.0 * (1.0 - static_cast<double>(cm.trace()) / static_cast<double>(total));
}

/// Unweighted mean of per-class F1, as a percentage; 0/0 counts as 0.
inline double macro_f1(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw InvalidArgument("macro_f1: empty confusion matrix");
  double sum = 0.0;
  for (std::size_t c = 0; c < cm.size(); ++c) {
    const auto tp = static_cast<double>(cm.at(c, c));
    const auto predicted = static_cast<double>(cm.col_sum(c));
    const auto actual = static_cast<double>(cm.row_sum(c));
    const double precision = predicted > 0 ? tp / predicted : 0.0;
    const double recall = actual > 0 ? tp / actual : 0.0;
    sum += precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  }
  return 100.0 * sum / static_cast<double>(cm.size());
}

/// Adjusted Rand index between two labelings of the same items.
inline double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() != b.size()) throw InvalidArgument("adjusted_rand_index: size mismatch");
  const double n = static_cast<double>(a.size());
  std::map<std::pair<std::size_t, std::size_t>, double> joint;
  std::map<std::size_t, double> rows;
  std::map<std::size_t, double> cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0;
  for (const auto& [key, c] : joint) index += pairs(c);
  double sum_a = 0.0;
  for (const auto& [key, c] : rows) sum_a += pairs(c);
  double sum_b = 0.0;
  for (const auto& [key, c] : cols) sum_b += pairs(c);
  const double expected = n > 1 ? sum_a * sum_b / pairs(n) : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;  // both labelings trivial
  return (index - expected) / (max_index - expected);
}

inline std::string confusion_to_csv(const ConfusionMatrix& cm) {
  std::string out = "TRUE/PRED";
  for (const auto& l : cm.labels()) out += ',' + io::csv_field(l);
  out += '\n';
  for (std::size_t t = 0; t < cm.size(); ++t) {
    out += io::csv_field(cm.labels()[t]);
    for (std::size_t p = 0; p < cm.size(); ++p) out += ',' + std::to_string(cm.at(t, p));
    out += '\n';
  }
  char summary[96];
  std::snprintf(summary, sizeof(summary), "error_pct=%.2f,macro_f1=%.2f\n", error_rate(cm),
                macro_f1(cm));
  out += summary;
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic labeled corpus.

struct SyntheticGroup {
  std::string name;
  std::size_t vocabulary_size = 300;
  std::size_t documents = 500;
  std::size_t min_tokens = 10;
  std::size_t max_tokens = 20;
  /// Exponent of the Zipf law over the group's word ranks.
  double zipf_exponent = 1.0;
};

/// Every pair of group vocabularies shares exactly
/// round(overlap * smallest vocabulary size) words: one common pool. Each
/// token comes from that pool with probability `overlap` (Zipf over the pool,
/// identical for all groups), otherwise from the group's private words.
struct SyntheticSpec {
  std::vector<SyntheticGroup> groups;
  double overlap = 0.0;
  std::uint64_t seed = 0;
  double shared_zipf_exponent = 1.0;

  std::size_t shared_words() const {
    std::size_t smallest = groups.empty() ? 0 : groups.front().vocabulary_size;
    for (const auto& g : groups) smallest = std::min(smallest, g.vocabulary_size);
    return static_cast<std::size_t>(std::llround(overlap * static_cast<double>(smallest)));
  }
};

/// Three stylistically distinct groups (vocabulary richness, length, skew).
inline SyntheticSpec default_synthetic_spec(std::size_t docs_per_group = 500,
                                            double overlap = 0.0, std::uint64_t seed = 0) {
  SyntheticSpec spec;
  spec.overlap = overlap;
  spec.seed = seed;
  spec.groups = {
      {"gr1", 150, docs_per_group, 10, 18, 1.1},
      {"gr2", 600, docs_per_group, 12, 30, 1.0},
      {"gr3", 1500, docs_per_group, 10, 14, 0.9},
  };
  return spec;
}

/// Word lists per group: the shared pool in rank order, then the group's
/// private words in rank order.
inline std::vector<std::vector<std::string>> synthetic_vocabularies(const SyntheticSpec& spec) {
  const std::size_t shared = spec.shared_words();
  std::vector<std::vector<std::string>> vocab(spec.groups.size());
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    const auto& group = spec.groups[g];
    for (std::size_t w = 0; w < shared; ++w) vocab[g].push_back("sw" + std::to_string(w));
    for (std::size_t w = shared; w < group.vocabulary_size; ++w) {
      vocab[g].push_back("g" + std::to_string(g + 1) + "w" + std::to_string(w - shared));
    }
  }
  return vocab;
}

namespace detail {

inline std::discrete_distribution<std::size_t> zipf_ranks(std::size_t size, double exponent) {
  std::vector<double> weights(size);
  for (std::size_t r = 0; r < size; ++r) {
    weights[r] = 1.0 / std::pow(static_cast<double>(r + 1), exponent);
  }
  return {weights.begin(), weights.end()};
}

}  // namespace detail

inline std::vector<Document> generate_synthetic_corpus(const SyntheticSpec& spec) {
  if (spec.groups.empty()) throw InvalidArgument("synthetic spec has no groups");
  if (!(spec.overlap >= 0.0 && spec.overlap <= 1.0)) {
    throw InvalidArgument("synthetic overlap must lie in [0,1]");
  }
  const std::size_t shared = spec.shared_words();
  const auto vocab = synthetic_vocabularies(spec);
  std::mt19937_64 rng(spec.seed);
  auto shared_word = detail::zipf_ranks(std::max<std::size_t>(shared, 1), spec.shared_zipf_exponent);
  std::vector<Document> docs;
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    const auto& group = spec.groups[g];
    if (group.min_tokens == 0 || group.min_tokens > group.max_tokens) {
      throw InvalidArgument("synthetic group has an invalid token range");
    }
    const std::size_t own = group.vocabulary_size - shared;
    const double p_shared = own == 0 ? 1.0 : shared == 0 ? 0.0 : spec.overlap;
    auto own_word = detail::zipf_ranks(std::max<std::size_t>(own, 1), group.zipf_exponent);
    std::bernoulli_distribution from_pool(p_shared);
    std::uniform_int_distribution<std::size_t> length(group.min_tokens, group.max_tokens);
    for (std::size_t d = 0; d < group.documents; ++d) {
      Document doc;
      doc.id = group.name + "-" + std::to_string(d);
      doc.label = group.name;
      const std::size_t len = length(rng);
      for (std::size_t t = 0; t < len; ++t) {
        if (t) doc.text += ' ';
        doc.text += from_pool(rng) ? vocab[g][shared_word(rng)] : vocab[g][shared + own_word(rng)];
      }
      doc.tokens = tokenize(doc.text);
      docs.push_back(std::move(doc));
    }
  }
  std::shuffle(docs.begin(), docs.end(), rng);
  return docs;
}

// ---------------------------------------------------------------------------
// Stability experiment.

struct StabilityConfig {
  MatchMethod method = MatchMethod::clssal;
  std::size_t trials = 100;
  double fraction = 0.5;
  std::uint64_t seed = 0;
  Weighting weighting = Weighting::tf;
  unsigned threads = 1;
};

/// Sorted distinct labels; throws if a document is unlabeled.
inline std::vector<std::string> class_labels(std::span<const Document> docs) {
  std::set<std::string> labels;
  for (const auto& d : docs) {
    if (!d.label) throw InvalidArgument("document '" + d.id + "' has no label");
    labels.insert(*d.label);
  }
  return {labels.begin(), labels.end()};
}

inline std::vector<std::vector<std::size_t>> members_by_label(std::span<const Document> docs,
                                                              std::span<const std::string> labels) {
  std::vector<std::vector<std::size_t>> out(labels.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!docs[i].label) throw InvalidArgument("document '" + docs[i].id + "' has no label");
    auto it = std::lower_bound(labels.begin(), labels.end(), *docs[i].label);
    if (it == labels.end() || *it != *docs[i].label) {
      throw EmptyClass("label '" + *docs[i].label + "' is not a training class");
    }
    out[static_cast<std::size_t>(it - labels.begin())].push_back(i);
  }
  return out;
}

/// Reference model with one cluster per class label of `train`.
inline ClusterModel train_model_by_label(std::span<const Document> train, MatchMethod method,
                                         Weighting weighting = Weighting::tf,
                                         unsigned threads = 1) {
  const auto labels = class_labels(train);
  const auto members = members_by_label(train, labels);
  const auto s = similarity_of(train, weighting, threads);
  auto model = build_cluster_model(s, members, method, threads);
  model.names = labels;
  return model;
}

/// Group assigner: receives the similarity matrix of one subsample and
/// returns a predicted class index.
using GroupAssigner = std::function<std::size_t(const SimilarityMatrix&)>;

/// Core loop shared by the spectral and any custom assigner. Trial t draws
/// from a generator seeded with seed + t, so trials are order-independent.
inline ConfusionMatrix run_stability_trials(std::span<const Document> test_pool,
                                            const std::vector<std::string>& labels,
                                            const GroupAssigner& assigner,
                                            const StabilityConfig& config) {
  if (!(config.fraction > 0.0 && config.fraction <= 1.0)) {
    throw InvalidArgument("stability fraction must lie in (0,1]");
  }
  const auto pool_members = members_by_label(test_pool, labels);
  for (std::size_t c = 0; c < labels.size(); ++c) {
    if (pool_members[c].empty()) throw EmptyClass("class '" + labels[c] + "' missing from test pool");
  }
  const auto pool_s = similarity_of(test_pool, config.weighting, config.threads);
  std::vector<std::vector<std::size_t>> predictions(config.trials,
                                                    std::vector<std::size_t>(labels.size()));
  parallel_for(config.trials, config.threads, [&](std::size_t t) {
    std::mt19937_64 rng(config.seed + t);
    for (std::size_t c = 0; c < labels.size(); ++c) {
      const auto& pool = pool_members[c];
      const auto take = static_cast<std::size_t>(
          std::ceil(config.fraction * static_cast<double>(pool.size())));
      std::vector<std::size_t> sample;
      std::sample(pool.begin(), pool.end(), std::back_inserter(sample), take, rng);
      predictions[t][c] = assigner(pool_s.submatrix(sample));
    }
  });
  ConfusionMatrix cm(labels);
  for (const auto& trial : predictions) {
    for (std::size_t c = 0; c < labels.size(); ++c) {
      if (trial[c] >= labels.size()) throw InvalidArgument("assigner returned an unknown class");
      cm.add(c, trial[c]);
    }
  }
  return cm;
}

/// Trains on the classes of `train` and classifies per-class subsamples of
/// `test_pool` by spectrum, `trials` times.
inline ConfusionMatrix run_stability_experiment(std::span<const Document> train,
                                                std::span<const Document> test_pool,
                                                const StabilityConfig& config) {
  const auto model = train_model_by_label(train, config.method, config.weighting, config.threads);
  const auto labels = model.names;
  GroupAssigner assigner = [&model](const SimilarityMatrix& s) { return assign_cluster(s, model); };
  return run_stability_trials(test_pool, labels, assigner, config);
}

inline std::string stability_report_json(const StabilityConfig& config,
                                         const ConfusionMatrix& cm) {
  nlohmann::ordered_json j;
  j["config"] = {{"method", std::string(to_string(config.method))},
                 {"fraction", config.fraction},
                 {"trials", config.trials},
                 {"seed", config.seed},
                 {"weighting", std::string(to_string(config.weighting))}};
  j["labels"] = cm.labels();
  auto& counts = j["counts"] = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < cm.size(); ++t) {
    std::vector<std::uint64_t> row;
    for (std::size_t p = 0; p < cm.size(); ++p) row.push_back(cm.at(t, p));
    counts.push_back(row);
  }
  j["error_pct"] = error_rate(cm);
  j["macro_f1"] = macro_f1(cm);
  return j.dump(2) + "\n";
}

}  // namespace eisc
