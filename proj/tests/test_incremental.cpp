#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "eisc/evalx.hpp"
#include "eisc/incremental.hpp"
#include "oracles.hpp"

using namespace eisc;

namespace {

std::vector<std::size_t> truth_of(const std::vector<Document>& docs) {
  const auto labels = class_labels(docs);
  std::vector<std::size_t> out;
  for (const auto& d : docs) {
    out.push_back(static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), *d.label) -
                                           labels.begin()));
  }
  return out;
}

}  // namespace

TEST(SplitBatches, BalancedSizes) {
  const auto parts = split_batches(5203, 3, 1);
  std::vector<std::size_t> sizes;
  for (const auto& p : parts) sizes.push_back(p.size());
  EXPECT_EQ(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}), 5203u);
  EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1u);
  EXPECT_EQ(sizes, (std::vector<std::size_t>{1735, 1734, 1734}));
  std::set<std::size_t> all;
  for (const auto& p : parts) all.insert(p.begin(), p.end());
  EXPECT_EQ(all.size(), 5203u);
}

TEST(SplitBatches, SmallAndDeterministic) {
  const auto parts = split_batches(4, 2, 9);
  EXPECT_EQ(parts[0].size(), 2u);
  EXPECT_EQ(parts[1].size(), 2u);
  EXPECT_EQ(split_batches(100, 3, 9), split_batches(100, 3, 9));
  EXPECT_NE(split_batches(100, 3, 9), split_batches(100, 3, 10));
  EXPECT_THROW(split_batches(5, 3, 0, 2), TooFewDocuments);
}

TEST(AssignCluster, SingleReferenceAndSelfMatch) {
  std::mt19937_64 rng(3);
  std::vector<SimilarityMatrix> groups;
  for (std::size_t n : {12, 20, 35}) {
    groups.push_back(SimilarityMatrix::from_values(oracle::random_similarity(n, 0.1 * n / 10.0, rng)));
  }
  for (auto method : kAllMethods) {
    ClusterModel model;
    model.method = method;
    model.references.push_back(spectral_function_of(groups[0], method));
    EXPECT_EQ(assign_cluster(groups[2], model), 0u);
    model.references.push_back(spectral_function_of(groups[1], method));
    model.references.push_back(spectral_function_of(groups[2], method));
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_EQ(assign_cluster(groups[c], model), c) << to_string(method);
    }
  }
}

TEST(AssignCluster, DegenerateInput) {
  ClusterModel model;
  model.method = MatchMethod::clssal;
  model.references.push_back(build_spectral_function(Spectrum({0, 1}, LaplacianKind::combinatorial),
                                                     MatchMethod::clssal));
  EXPECT_THROW(assign_cluster(SimilarityMatrix::from_values(Eigen::MatrixXd::Zero(1, 1)), model),
               DegenerateSpectrum);
  EXPECT_THROW(assign_cluster(SimilarityMatrix::from_values(Eigen::MatrixXd::Zero(3, 3)), ClusterModel{}),
               InvalidArgument);
}

TEST(AssignCluster, RelabelingCommutes) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 20; ++t) {
    ClusterModel model;
    model.method = MatchMethod::clssal;
    for (int c = 0; c < 4; ++c) {
      model.references.push_back(spectral_function_of(
          SimilarityMatrix::from_values(oracle::random_similarity(10 + 5 * c, 0.2 * c, rng)),
          MatchMethod::clssal));
    }
    const auto probe = SimilarityMatrix::from_values(oracle::random_similarity(18, 0.3, rng));
    const std::size_t original = assign_cluster(probe, model);
    std::vector<std::size_t> perm{2, 0, 3, 1};  // new id of old cluster c is perm[c]
    ClusterModel relabeled = model;
    for (std::size_t c = 0; c < 4; ++c) relabeled.references[perm[c]] = model.references[c];
    EXPECT_EQ(assign_cluster(probe, relabeled), perm[original]);
  }
}

TEST(AssignCluster, HalfSubsamplesOfReferenceGroups) {
  const auto corpus = generate_synthetic_corpus(default_synthetic_spec(300, 0.0, 5));
  const auto labels = class_labels(corpus);
  const auto members = members_by_label(corpus, labels);
  const auto s = similarity_of(corpus, Weighting::tf);
  const auto model = build_cluster_model(s, members, MatchMethod::clssal);
  int correct = 0;
  for (int t = 0; t < 100; ++t) {
    std::mt19937_64 rng(500 + t);
    const std::size_t c = static_cast<std::size_t>(t) % 3;
    std::vector<std::size_t> sample;
    std::sample(members[c].begin(), members[c].end(), std::back_inserter(sample), members[c].size() / 2, rng);
    if (assign_cluster(s.submatrix(sample), model) == c) ++correct;
  }
  EXPECT_GE(correct, 95);
}

TEST(MinCostInjection, ExhaustiveOptimum) {
  const std::vector<std::vector<double>> cost{{1, 0, 5}, {0, 1, 5}, {9, 9, 0}};
  EXPECT_EQ(min_cost_injection(cost, 3), (std::vector<std::size_t>{1, 0, 2}));
  const std::vector<std::vector<double>> partial{{3, 1, 2}};
  EXPECT_EQ(min_cost_injection(partial, 3), (std::vector<std::size_t>{1}));
  EXPECT_THROW(min_cost_injection(std::vector<std::vector<double>>(9, std::vector<double>(9)), 9),
               InvalidArgument);
}

TEST(IncrementalCluster, SingleBatchEqualsSpectralCluster) {
  const auto corpus = generate_synthetic_corpus(default_synthetic_spec(120, 0.1, 8));
  const auto merged = incremental_cluster(corpus, 3, 1, MatchMethod::clssal, 4);
  const auto full = spectral_cluster(similarity_of(corpus, Weighting::tf), 3, 4);
  EXPECT_EQ(merged.assignment(), full.assignment);
  for (const auto& e : merged.entries) EXPECT_EQ(e.batch, 0u);
}

TEST(IncrementalCluster, ProvenanceCoversEveryDocumentOnce) {
  const auto corpus = generate_synthetic_corpus(default_synthetic_spec(150, 0.0, 2));
  const auto merged = incremental_cluster(corpus, 3, 4, MatchMethod::clssal, 6);
  ASSERT_EQ(merged.entries.size(), corpus.size());
  std::set<std::string> ids;
  std::vector<std::size_t> per_batch(4, 0);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    EXPECT_EQ(merged.entries[i].doc_id, corpus[i].id);
    EXPECT_LT(merged.entries[i].global_cluster, 3u);
    EXPECT_LT(merged.entries[i].local_cluster, 3u);
    ids.insert(merged.entries[i].doc_id);
    ++per_batch.at(merged.entries[i].batch);
  }
  EXPECT_EQ(ids.size(), corpus.size());
  EXPECT_LE(*std::max_element(per_batch.begin(), per_batch.end()) -
                *std::min_element(per_batch.begin(), per_batch.end()),
            1u);
  EXPECT_EQ(merged.model.k(), 3u);
}

TEST(IncrementalCluster, BijectiveModeUsesEveryGlobalClusterPerBatch) {
  const auto corpus = generate_synthetic_corpus(default_synthetic_spec(150, 0.1, 12));
  IncrementalOptions opt;
  opt.bijective = true;
  const auto merged = incremental_cluster(corpus, 3, 3, MatchMethod::clrl, 1, opt);
  std::vector<std::set<std::pair<std::size_t, std::size_t>>> pairs(3);
  for (const auto& e : merged.entries) pairs[e.batch].insert({e.local_cluster, e.global_cluster});
  for (const auto& p : pairs) {
    std::set<std::size_t> globals;
    for (const auto& [local, global] : p) globals.insert(global);
    EXPECT_EQ(p.size(), 3u);
    EXPECT_EQ(globals.size(), 3u);
  }
}

TEST(IncrementalCluster, AgreesWithFullClustering) {
  const auto corpus = generate_synthetic_corpus(default_synthetic_spec(200, 0.1, 14));
  IncrementalOptions opt;
  opt.bijective = true;
  const auto merged = incremental_cluster(corpus, 3, 3, MatchMethod::clssal, 7, opt);
  const auto full = spectral_cluster(similarity_of(corpus, Weighting::tf), 3, 7);
  EXPECT_GE(adjusted_rand_index(merged.assignment(), full.assignment), 0.8);
  EXPECT_GE(adjusted_rand_index(merged.assignment(), truth_of(corpus)), 0.8);
}

// With the matching step replaced by the ground-truth labels, per-batch
// partition by label and merge by label reproduce the label partition.
TEST(IncrementalCluster, LabelOracleHarness) {
  const auto corpus = generate_synthetic_corpus(default_synthetic_spec(60, 0.0, 4));
  const auto truth = truth_of(corpus);
  const auto batches = split_batches(corpus.size(), 3, 2);
  std::vector<std::size_t> merged(corpus.size());
  for (const auto& batch : batches) {
    for (auto i : batch) merged[i] = truth[i];  // local cluster == label, matched by label
  }
  EXPECT_EQ(oracle::ari_by_pairs(merged, truth), 1.0);
  // And the label-trained model maps every full class group back to itself.
  const auto model = train_model_by_label(corpus, MatchMethod::clssal);
  const auto s = similarity_of(corpus, Weighting::tf);
  const auto members = members_by_label(corpus, model.names);
  for (std::size_t c = 0; c < members.size(); ++c) {
    EXPECT_EQ(assign_cluster(s.submatrix(members[c]), model), c);
  }
}

TEST(IncrementalCluster, Errors) {
  const auto corpus = generate_synthetic_corpus(default_synthetic_spec(3, 0.0, 4));
  EXPECT_THROW(incremental_cluster(corpus, 3, 4, MatchMethod::clssal, 0), TooFewDocuments);
  IncrementalOptions opt;
  opt.bijective = true;
  EXPECT_THROW(incremental_cluster(corpus, 9, 1, MatchMethod::clssal, 0, opt), InvalidArgument);
}

TEST(ModelJson, RoundTripsBitExactly) {
  const auto corpus = generate_synthetic_corpus(default_synthetic_spec(40, 0.0, 4));
  auto model = train_model_by_label(corpus, MatchMethod::clrl);
  const auto text = model_to_string(model);
  const auto back = model_from_string(text);
  EXPECT_EQ(back.method, model.method);
  EXPECT_EQ(back.names, model.names);
  ASSERT_EQ(back.k(), model.k());
  for (std::size_t c = 0; c < model.k(); ++c) EXPECT_EQ(back.references[c], model.references[c]);
  EXPECT_EQ(model_to_string(back), text);
  EXPECT_THROW(model_from_string("{\"method\":\"clrl\"}"), ParseError);
  EXPECT_THROW(model_from_string("{\"method\":\"zz\",\"k\":0,\"clusters\":[]}"), ParseError);
}

TEST(MergedCsv, Layout) {
  MergedClustering m;
  m.entries = {{"a", 2, 0, 1}, {"b,c", 0, 1, 0}};
  EXPECT_EQ(merged_to_csv(m), "doc_id,global_cluster,batch,local_cluster\na,2,0,1\n\"b,c\",0,1,0\n");
}
