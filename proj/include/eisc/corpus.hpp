#pragma once

// Document ingestion, tokenization, term vectors and the cosine similarity
// graph that every later stage operates on.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "eisc/error.hpp"
#include "eisc/io.hpp"
#include "eisc/parallel.hpp"

namespace eisc {

struct Document {
  std::string id;
  std::string text;
  /// External ground truth (e.g. a hashtag). Never read by the matchers.
  std::optional<std::string> label;
  std::vector<std::string> tokens;
};

struct TokenizerConfig {
  std::size_t min_token_len = 2;
  std::unordered_set<std::string> stopwords;
};

/// Lowercases ASCII letters and splits on every ASCII character that is not
/// a letter or digit. Non-ASCII bytes are kept as word characters, so UTF-8
/// words survive intact. Token length is measured in code points.
inline std::vector<std::string> tokenize(std::string_view text,
                                         const TokenizerConfig& config = {}) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t code_points = 0;
  auto flush = [&] {
    if (!current.empty() && code_points >= config.min_token_len &&
        !config.stopwords.contains(current)) {
      tokens.push_back(current);
    }
    current.clear();
    code_points = 0;
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80) {
      current += ch;
      if ((c & 0xC0) != 0x80) ++code_points;
    } else if (std::isalnum(c)) {
      current += static_cast<char>(std::tolower(c));
      ++code_points;
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

enum class Weighting { tf, tfidf };

inline Weighting parse_weighting(std::string_view name) {
  if (name == "tf") return Weighting::tf;
  if (name == "tfidf" || name == "tf-idf") return Weighting::tfidf;
  throw InvalidArgument("unknown weighting '" + std::string(name) + "'");
}

inline std::string_view to_string(Weighting w) {
  return w == Weighting::tf ? "tf" : "tfidf";
}

/// Term -> dense id mapping, ids handed out in first-seen order.
class Vocabulary {
 public:
  std::uint32_t intern(const std::string& term) {
    auto [it, inserted] =
        ids_.try_emplace(term, static_cast<std::uint32_t>(ids_.size()));
    return it->second;
  }
  std::optional<std::uint32_t> find(const std::string& term) const {
    auto it = ids_.find(term);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t size() const { return ids_.size(); }

 private:
  std::unordered_map<std::string, std::uint32_t> ids_;
};

/// Sparse non-negative term weights, sorted by term id.
struct TermVector {
  std::vector<std::pair<std::uint32_t, double>> entries;
  double norm = 0.0;

  static TermVector from_entries(
      std::vector<std::pair<std::uint32_t, double>> entries) {
    std::sort(entries.begin(), entries.end());
    TermVector v;
    double sq = 0.0;
    for (auto& [id, w] : entries) {
      if (w < 0.0) throw InvalidArgument("negative term weight");
      sq += w * w;
    }
    v.entries = std::move(entries);
    v.norm = std::sqrt(sq);
    return v;
  }
};

inline double dot(const TermVector& a, const TermVector& b) {
  double sum = 0.0;
  auto ia = a.entries.begin();
  auto ib = b.entries.begin();
  while (ia != a.entries.end() && ib != b.entries.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      sum += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  return sum;
}

/// Builds term vectors against a caller-owned vocabulary. Term statistics
/// (document frequency) are always taken from `docs` alone.
inline std::vector<TermVector> build_term_vectors(std::span<const Document> docs,
                                                  Weighting weighting,
                                                  Vocabulary& vocab) {
  if (docs.empty()) throw InvalidArgument("build_term_vectors: no documents");
  std::vector<std::map<std::uint32_t, double>> counts(docs.size());
  std::unordered_map<std::uint32_t, std::size_t> doc_freq;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (docs[d].tokens.empty()) {
      throw InvalidArgument("document '" + docs[d].id + "' has no tokens");
    }
    for (const auto& tok : docs[d].tokens) counts[d][vocab.intern(tok)] += 1.0;
    for (const auto& [id, c] : counts[d]) ++doc_freq[id];
  }
  const auto n_docs = static_cast<double>(docs.size());
  std::vector<TermVector> out;
  out.reserve(docs.size());
  for (const auto& doc_counts : counts) {
    std::vector<std::pair<std::uint32_t, double>> entries;
    entries.reserve(doc_counts.size());
    for (const auto& [id, tf] : doc_counts) {
      double w = tf;
      if (weighting == Weighting::tfidf) {
        w = tf * std::log(n_docs / static_cast<double>(doc_freq[id]));
      }
      entries.emplace_back(id, w);
    }
    out.push_back(TermVector::from_entries(std::move(entries)));
  }
  return out;
}

inline std::vector<TermVector> build_term_vectors(std::span<const Document> docs,
                                                  Weighting weighting) {
  Vocabulary vocab;
  return build_term_vectors(docs, weighting, vocab);
}

/// Dense symmetric similarity matrix with entries in [0,1] and a zero
/// diagonal. The invariants are checked on construction.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;

  static SimilarityMatrix from_values(Eigen::MatrixXd values) {
    if (values.rows() != values.cols()) {
      throw InvalidArgument("similarity matrix must be square");
    }
    const Eigen::Index n = values.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (values(i, i) != 0.0) {
        throw InvalidArgument("similarity matrix diagonal must be zero");
      }
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double v = values(i, j);
        if (v != values(j, i)) {
          throw InvalidArgument("similarity matrix must be exactly symmetric");
        }
        if (!(v >= 0.0 && v <= 1.0)) {
          throw InvalidArgument("similarity values must lie in [0,1]");
        }
      }
    }
    SimilarityMatrix s;
    s.values_ = std::move(values);
    return s;
  }

  std::size_t size() const { return static_cast<std::size_t>(values_.rows()); }
  const Eigen::MatrixXd& values() const { return values_; }
  double operator()(std::size_t i, std::size_t j) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  /// Row/column restriction to `members`, in the given order.
  SimilarityMatrix submatrix(std::span<const std::size_t> members) const {
    const auto m = static_cast<Eigen::Index>(members.size());
    SimilarityMatrix s;
    s.values_.resize(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) {
        s.values_(a, b) = values_(static_cast<Eigen::Index>(members[a]),
                                  static_cast<Eigen::Index>(members[b]));
      }
    }
    return s;
  }

 private:
  Eigen::MatrixXd values_;
};

/// Pairwise cosine similarity. Only the upper triangle is computed, then
/// mirrored, so the result is bit-identical for any thread count.
inline SimilarityMatrix cosine_similarity_matrix(
    std::span<const TermVector> vectors, unsigned threads = 1) {
  const std::size_t n = vectors.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(vectors[i].norm > 0.0)) {
      throw ZeroNormVector("term vector " + std::to_string(i) +
                           " has zero norm");
    }
  }
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                 static_cast<Eigen::Index>(n));
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double c = dot(vectors[i], vectors[j]) / (vectors[i].norm * vectors[j].norm);
      c = std::clamp(c, 0.0, 1.0);
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
    }
  });
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < values.cols(); ++j) values(j, i) = values(i, j);
  }
  return SimilarityMatrix::from_values(std::move(values));
}

inline SimilarityMatrix similarity_of(std::span<const Document> docs,
                                      Weighting weighting,
                                      unsigned threads = 1) {
  auto vectors = build_term_vectors(docs, weighting);
  return cosine_similarity_matrix(vectors, threads);
}

inline std::string similarity_to_csv(const SimilarityMatrix& s) {
  std::string out;
  const auto& v = s.values();
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      if (j) out += ',';
      out += io::format_real(v(i, j));
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON Lines corpus files and ingestion filters.

inline std::vector<Document> parse_jsonl(std::string_view content) {
  std::vector<Document> docs;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string() ||
        !obj.contains("text") || !obj["text"].is_string()) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected string fields 'id' and 'text'");
    }
    Document doc;
    doc.id = obj["id"].get<std::string>();
    doc.text = obj["text"].get<std::string>();
    if (auto it = obj.find("label"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": 'label' must be a string");
      }
      doc.label = it->get<std::string>();
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

inline std::vector<Document> read_jsonl(const std::filesystem::path& path) {
  return parse_jsonl(io::read_file(path));
}

inline std::string to_jsonl(std::span<const Document> docs) {
  std::string out;
  for (const auto& doc : docs) {
    nlohmann::ordered_json obj;
    obj["id"] = doc.id;
    obj["text"] = doc.text;
    if (doc.label) obj["label"] = *doc.label;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

struct IngestOptions {
  TokenizerConfig tokenizer;
  std::size_t min_tokens = 10;
  Weighting weighting = Weighting::tf;
};

struct IngestResult {
  std::vector<Document> documents;
  std::vector<std::string> warnings;
};

/// Tokenizes, enforces unique ids, and drops documents that are too short
/// or whose term vector would have zero norm under the chosen weighting.
inline IngestResult ingest(std::vector<Document> raw,
                           const IngestOptions& options = {}) {
  IngestResult result;
  std::unordered_set<std::string> seen;
  for (auto& doc : raw) {
    if (!seen.insert(doc.id).second) {
      throw InvalidArgument("duplicate document id '" + doc.id + "'");
    }
    doc.tokens = tokenize(doc.text, options.tokenizer);
    if (doc.tokens.empty() || doc.tokens.size() < options.min_tokens) {
      result.warnings.push_back("dropped '" + doc.id + "': " +
                                std::to_string(doc.tokens.size()) + " tokens");
      continue;
    }
    result.documents.push_back(std::move(doc));
  }
  // Under tf-idf a document made only of corpus-wide terms has zero norm;
  // dropping it changes idf, so repeat until stable.
  while (options.weighting == Weighting::tfidf && !result.documents.empty()) {
    auto vectors = build_term_vectors(result.documents, Weighting::tfidf);
    std::vector<Document> kept;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      if (vectors[i].norm > 0.0) {
        kept.push_back(std::move(result.documents[i]));
      } else {
        result.warnings.push_back("dropped '" + result.documents[i].id +
                                  "': zero-norm tf-idf vector");
      }
    }
    const bool stable = kept.size() == result.documents.size();
    result.documents = std::move(kept);
    if (stable) break;
  }
  return result;
}

}  // namespace eisc
