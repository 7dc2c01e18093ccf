#pragma once

// Command-line front end. Every subcommand reads flags only, writes its
// outputs atomically, and exits 0 on success, 1 on a library error and 2 on
// malformed flags.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eisc/clustering.hpp"
#include "eisc/corpus.hpp"
#include "eisc/evalx.hpp"
#include "eisc/incremental.hpp"
#include "eisc/io.hpp"
#include "eisc/laplacian.hpp"
#include "eisc/plot.hpp"
#include "eisc/spectra.hpp"

namespace eisc::cli {

namespace fs = std::filesystem;

struct IngestFlags {
  std::size_t min_tokens = 10;
  std::size_t min_token_len = 2;
  std::string stopwords_path;
  std::string weighting = "tf";
};

inline void add_ingest_flags(CLI::App* cmd, IngestFlags& f) {
  cmd->add_option("--min-tokens", f.min_tokens, "Drop documents with fewer tokens")
      ->capture_default_str();
  cmd->add_option("--min-token-len", f.min_token_len, "Drop shorter tokens (code points)")
      ->capture_default_str();
  cmd->add_option("--stopwords", f.stopwords_path, "File with one stopword per line")
      ->check(CLI::ExistingFile);
  cmd->add_option("--weighting", f.weighting, "Term weighting")
      ->check(CLI::IsMember({"tf", "tfidf"}))
      ->capture_default_str();
}

inline IngestOptions to_ingest_options(const IngestFlags& f) {
  IngestOptions opt;
  opt.min_tokens = f.min_tokens;
  opt.tokenizer.min_token_len = f.min_token_len;
  opt.weighting = parse_weighting(f.weighting);
  if (!f.stopwords_path.empty()) {
    for (const auto& word : tokenize(io::read_file(f.stopwords_path), {1, {}})) {
      opt.tokenizer.stopwords.insert(word);
    }
  }
  return opt;
}

inline std::vector<Document> load_corpus(const std::string& path, const IngestFlags& flags,
                                         std::ostream& err) {
  auto result = ingest(read_jsonl(path), to_ingest_options(flags));
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  if (result.documents.empty()) throw Error("no documents left after ingestion of '" + path + "'");
  return std::move(result.documents);
}

/// `out.csv` -> `out.model.json`
inline fs::path sibling_model_path(const fs::path& out) {
  fs::path p = out;
  p.replace_extension(".model.json");
  return p;
}

inline void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    io::write_file_atomic(path, content);
  }
}

inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Eigenvalue-based incremental spectral clustering of short documents"};
  app.name("eisc");
  app.require_subcommand(1);

  unsigned threads = 1;
  std::uint64_t seed = 0;
  IngestFlags ingest_flags;
  auto method_check = CLI::IsMember({"clrl", "clssal", "clmxl", "nll"});
  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--threads", threads, "Worker threads (outputs do not depend on it)")
        ->check(CLI::Range(1u, 1024u))
        ->capture_default_str();
  };
  auto seeded = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
  };

  // ingest
  std::string input, output, clean_out;
  auto* ingest_cmd = app.add_subcommand("ingest", "Tokenize a corpus and export its similarity matrix");
  ingest_cmd->add_option("--input", input, "Corpus (JSON Lines)")->required();
  ingest_cmd->add_option("--out", output, "Similarity matrix CSV")->required();
  ingest_cmd->add_option("--clean-out", clean_out, "Write the kept documents as JSON Lines");
  add_ingest_flags(ingest_cmd, ingest_flags);
  common(ingest_cmd);

  // split
  std::size_t batches = 3;
  std::size_t k = 3;
  std::string out_dir;
  bool train_test = false;
  auto* split_cmd = app.add_subcommand("split", "Randomly split a corpus into equal-size batches");
  split_cmd->add_option("--input", input, "Corpus (JSON Lines)")->required();
  split_cmd->add_option("--batches", batches, "Number of batches")->capture_default_str()
      ->check(CLI::PositiveNumber);
  split_cmd->add_option("--out-dir", out_dir, "Directory for batch_<i>.jsonl")->required();
  split_cmd->add_flag("--train-test", train_test,
                      "Also write train.jsonl (batch 0) and test.jsonl (all other batches)");
  add_ingest_flags(split_cmd, ingest_flags);
  seeded(split_cmd);
  common(split_cmd);

  // cluster-batch
  auto* cluster_cmd = app.add_subcommand("cluster-batch", "Spectral clustering of one batch");
  cluster_cmd->add_option("--input", input, "Batch (JSON Lines)")->required();
  cluster_cmd->add_option("--k", k, "Number of clusters")->capture_default_str()
      ->check(CLI::Range(2, 1 << 20));
  cluster_cmd->add_option("--out", output, "CSV doc_id,cluster")->required();
  add_ingest_flags(cluster_cmd, ingest_flags);
  seeded(cluster_cmd);
  common(cluster_cmd);

  // spectrum
  std::string laplacian = "combinatorial";
  std::string method_name;
  std::string function_out;
  auto* spectrum_cmd = app.add_subcommand("spectrum", "Laplacian eigenvalues of a document set");
  spectrum_cmd->add_option("--input", input, "Corpus (JSON Lines)")->required();
  spectrum_cmd->add_option("--laplacian", laplacian, "Laplacian kind")
      ->check(CLI::IsMember({"combinatorial", "normalized"}))
      ->capture_default_str();
  spectrum_cmd->add_option("--out", output, "CSV index,eigenvalue")->required();
  spectrum_cmd->add_option("--method", method_name, "Also build the spectral function")
      ->check(method_check);
  spectrum_cmd->add_option("--function-out", function_out, "CSV x,value of the spectral function");
  add_ingest_flags(spectrum_cmd, ingest_flags);
  common(spectrum_cmd);

  // train
  std::string by = "cluster";
  auto* train_cmd = app.add_subcommand("train", "Build a reference cluster model");
  train_cmd->add_option("--input", input, "Training portion (JSON Lines)")->required();
  train_cmd->add_option("--method", method_name, "Match method")->required()->check(method_check);
  train_cmd->add_option("--by", by, "Reference groups: spectral clusters or document labels")
      ->check(CLI::IsMember({"cluster", "label"}))
      ->capture_default_str();
  train_cmd->add_option("--k", k, "Clusters (with --by cluster)")->capture_default_str()
      ->check(CLI::Range(2, 1 << 20));
  train_cmd->add_option("--out", output, "Model JSON")->required();
  add_ingest_flags(train_cmd, ingest_flags);
  seeded(train_cmd);
  common(train_cmd);

  // match
  std::string model_path;
  std::optional<std::size_t> match_k;
  auto* match_cmd = app.add_subcommand("match", "Assign a new batch (or its clusters) to a model");
  match_cmd->add_option("--model", model_path, "Model JSON")->required()->check(CLI::ExistingFile);
  match_cmd->add_option("--input", input, "New documents (JSON Lines)")->required();
  match_cmd->add_option("--k", match_k, "Cluster the batch first and match every cluster")
      ->check(CLI::Range(2, 1 << 20));
  match_cmd->add_option("--out", output, "CSV doc_id,local_cluster,global_cluster")->required();
  add_ingest_flags(match_cmd, ingest_flags);
  seeded(match_cmd);
  common(match_cmd);

  // pipeline
  bool bijective = false;
  std::string model_out;
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Split, cluster every batch, merge by spectra");
  pipeline_cmd->add_option("--input", input, "Corpus (JSON Lines)")->required();
  pipeline_cmd->add_option("--k", k, "Number of clusters")->capture_default_str()
      ->check(CLI::Range(2, 1 << 20));
  pipeline_cmd->add_option("--batches", batches, "Number of batches")->capture_default_str()
      ->check(CLI::PositiveNumber);
  pipeline_cmd->add_option("--method", method_name, "Match method")->required()->check(method_check);
  pipeline_cmd->add_flag("--bijective", bijective,
                         "One-to-one matching of each batch's clusters to the references");
  pipeline_cmd->add_option("--out", output, "CSV doc_id,global_cluster,batch,local_cluster")
      ->required();
  pipeline_cmd->add_option("--model-out", model_out, "Model JSON (default: --out with extension .model.json)");
  add_ingest_flags(pipeline_cmd, ingest_flags);
  seeded(pipeline_cmd);
  common(pipeline_cmd);

  // evaluate
  std::string train_path, test_path, report_path;
  std::size_t trials = 100;
  double fraction = 0.5;
  auto* eval_cmd = app.add_subcommand("evaluate", "Subsample stability experiment");
  eval_cmd->add_option("--train", train_path, "Labeled training portion")->required();
  eval_cmd->add_option("--test", test_path, "Labeled test pool")->required();
  eval_cmd->add_option("--method", method_name, "Match method")->required()->check(method_check);
  eval_cmd->add_option("--trials", trials, "Number of trials")->capture_default_str()
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--fraction", fraction, "Per-class subsample fraction")
      ->capture_default_str()
      ->check(CLI::Range(1e-9, 1.0));
  eval_cmd->add_option("--out", output, "Confusion matrix CSV (default: stdout)");
  eval_cmd->add_option("--report", report_path, "Experiment report JSON");
  add_ingest_flags(eval_cmd, ingest_flags);
  seeded(eval_cmd);
  common(eval_cmd);

  // generate
  std::size_t docs_per_group = 500;
  double overlap = 0.0;
  std::string spec_path;
  auto* gen_cmd = app.add_subcommand("generate", "Write a seeded synthetic labeled corpus");
  gen_cmd->add_option("--docs-per-group", docs_per_group, "Documents per group")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--overlap", overlap, "Shared vocabulary fraction, also the share of tokens drawn from the shared pool")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--spec", spec_path, "JSON group spec (overrides the built-in groups)")
      ->check(CLI::ExistingFile);
  gen_cmd->add_option("--out", output, "Corpus (JSON Lines)")->required();
  seeded(gen_cmd);
  common(gen_cmd);

  // plot
  std::vector<std::string> function_paths;
  std::string title;
  auto* plot_cmd = app.add_subcommand("plot", "SVG plot of spectral functions");
  auto* plot_model = plot_cmd->add_option("--model", model_path, "Model JSON")
                         ->check(CLI::ExistingFile);
  auto* plot_funcs = plot_cmd->add_option("--function", function_paths,
                                          "Spectral function CSV (repeatable)")
                         ->check(CLI::ExistingFile);
  plot_model->excludes(plot_funcs);
  plot_cmd->add_option("--title", title, "Plot title");
  plot_cmd->add_option("--out", output, "SVG file")->required();
  common(plot_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*ingest_cmd) {
      const auto docs = load_corpus(input, ingest_flags, err);
      const auto s = similarity_of(docs, parse_weighting(ingest_flags.weighting), threads);
      io::write_file_atomic(output, similarity_to_csv(s));
      if (!clean_out.empty()) io::write_file_atomic(clean_out, to_jsonl(docs));
    } else if (*split_cmd) {
      const auto docs = load_corpus(input, ingest_flags, err);
      const auto parts = split_batches(std::span<const Document>(docs), batches, seed);
      fs::create_directories(out_dir);
      for (std::size_t b = 0; b < parts.size(); ++b) {
        io::write_file_atomic(fs::path(out_dir) / ("batch_" + std::to_string(b) + ".jsonl"),
                              to_jsonl(parts[b]));
      }
      if (train_test) {
        std::vector<Document> rest;
        for (std::size_t b = 1; b < parts.size(); ++b) {
          rest.insert(rest.end(), parts[b].begin(), parts[b].end());
        }
        io::write_file_atomic(fs::path(out_dir) / "train.jsonl", to_jsonl(parts[0]));
        io::write_file_atomic(fs::path(out_dir) / "test.jsonl", to_jsonl(rest));
      }
    } else if (*cluster_cmd) {
      const auto docs = load_corpus(input, ingest_flags, err);
      const auto s = similarity_of(docs, parse_weighting(ingest_flags.weighting), threads);
      KMeansOptions km;
      km.threads = threads;
      const auto c = spectral_cluster(s, k, seed, km);
      io::write_file_atomic(output, clustering_to_csv(docs, c));
    } else if (*spectrum_cmd) {
      const auto docs = load_corpus(input, ingest_flags, err);
      const auto s = similarity_of(docs, parse_weighting(ingest_flags.weighting), threads);
      LaplacianKind kind = parse_laplacian_kind(laplacian);
      std::optional<MatchMethod> method;
      if (!method_name.empty()) {
        method = parse_method(method_name);
        if (spectrum_cmd->count("--laplacian") == 0) {
          kind = laplacian_kind_for(*method);
        } else if (kind != laplacian_kind_for(*method)) {
          throw InvalidArgument("--method " + method_name + " needs a " +
                                std::string(to_string(laplacian_kind_for(*method))) +
                                " Laplacian");
        }
      }
      if (!function_out.empty() && !method) {
        throw InvalidArgument("--function-out requires --method");
      }
      const auto e = spectrum(laplacian_of(s, kind));
      io::write_file_atomic(output, spectrum_to_csv(e));
      if (method && !function_out.empty()) {
        io::write_file_atomic(function_out,
                              spectral_function_to_csv(build_spectral_function(e, *method)));
      }
    } else if (*train_cmd) {
      const auto docs = load_corpus(input, ingest_flags, err);
      const auto method = parse_method(method_name);
      const auto weighting = parse_weighting(ingest_flags.weighting);
      ClusterModel model;
      if (by == "label") {
        model = train_model_by_label(docs, method, weighting, threads);
      } else {
        const auto s = similarity_of(docs, weighting, threads);
        KMeansOptions km;
        km.threads = threads;
        const auto c = spectral_cluster(s, k, seed, km);
        model = build_cluster_model(s, c.members(), method, threads);
      }
      io::write_file_atomic(output, model_to_string(model));
    } else if (*match_cmd) {
      const auto model = model_from_string(io::read_file(model_path));
      const auto docs = load_corpus(input, ingest_flags, err);
      const auto s = similarity_of(docs, parse_weighting(ingest_flags.weighting), threads);
      std::vector<std::size_t> local(docs.size(), 0);
      std::vector<std::vector<std::size_t>> groups;
      if (match_k) {
        KMeansOptions km;
        km.threads = threads;
        const auto c = spectral_cluster(s, *match_k, seed, km);
        local = c.assignment;
        groups = c.members();
      } else {
        groups.emplace_back(docs.size());
        for (std::size_t i = 0; i < docs.size(); ++i) groups[0][i] = i;
      }
      std::vector<std::size_t> global(groups.size());
      for (std::size_t g = 0; g < groups.size(); ++g) {
        global[g] = assign_cluster(s.submatrix(groups[g]), model);
      }
      std::string csv = "doc_id,local_cluster,global_cluster\n";
      for (std::size_t i = 0; i < docs.size(); ++i) {
        csv += io::csv_field(docs[i].id) + ',' + std::to_string(local[i]) + ',' +
               std::to_string(global[local[i]]) + '\n';
      }
      io::write_file_atomic(output, csv);
    } else if (*pipeline_cmd) {
      const auto docs = load_corpus(input, ingest_flags, err);
      IncrementalOptions opt;
      opt.weighting = parse_weighting(ingest_flags.weighting);
      opt.bijective = bijective;
      opt.threads = threads;
      const auto merged =
          incremental_cluster(docs, k, batches, parse_method(method_name), seed, opt);
      for (const auto& w : merged.warnings) err << "warning: " << w << '\n';
      io::write_file_atomic(output, merged_to_csv(merged));
      io::write_file_atomic(model_out.empty() ? sibling_model_path(output) : fs::path(model_out),
                            model_to_string(merged.model));
    } else if (*eval_cmd) {
      const auto train = load_corpus(train_path, ingest_flags, err);
      const auto test = load_corpus(test_path, ingest_flags, err);
      StabilityConfig config;
      config.method = parse_method(method_name);
      config.trials = trials;
      config.fraction = fraction;
      config.seed = seed;
      config.weighting = parse_weighting(ingest_flags.weighting);
      config.threads = threads;
      const auto cm = run_stability_experiment(train, test, config);
      emit(output, confusion_to_csv(cm), out);
      if (!report_path.empty()) {
        io::write_file_atomic(report_path, stability_report_json(config, cm));
      }
    } else if (*gen_cmd) {
      SyntheticSpec spec = default_synthetic_spec(docs_per_group, overlap, seed);
      if (!spec_path.empty()) {
        const auto j = nlohmann::json::parse(io::read_file(spec_path));
        spec.groups.clear();
        for (const auto& g : j.at("groups")) {
          SyntheticGroup group;
          group.name = g.at("name").get<std::string>();
          group.vocabulary_size = g.value("vocabulary_size", group.vocabulary_size);
          group.documents = g.value("documents", docs_per_group);
          group.min_tokens = g.value("min_tokens", group.min_tokens);
          group.max_tokens = g.value("max_tokens", group.max_tokens);
          group.zipf_exponent = g.value("zipf_exponent", group.zipf_exponent);
          spec.groups.push_back(std::move(group));
        }
        spec.overlap = j.value("overlap", overlap);
        spec.shared_zipf_exponent = j.value("shared_zipf_exponent", spec.shared_zipf_exponent);
      }
      io::write_file_atomic(output, to_jsonl(generate_synthetic_corpus(spec)));
    } else if (*plot_cmd) {
      std::vector<PlotSeries> series;
      if (!model_path.empty()) {
        const auto model = model_from_string(io::read_file(model_path));
        for (std::size_t c = 0; c < model.k(); ++c) {
          const std::string name =
              c < model.names.size() ? model.names[c] : "cluster " + std::to_string(c);
          series.push_back({c, name, model.references[c]});
        }
        if (title.empty()) title = std::string(to_string(model.method)) + " reference spectra";
      } else if (!function_paths.empty()) {
        for (std::size_t i = 0; i < function_paths.size(); ++i) {
          series.push_back({i, fs::path(function_paths[i]).filename().string(),
                            spectral_function_from_csv(io::read_file(function_paths[i]))});
        }
      } else {
        err << "usage error: plot needs --model or --function\n";
        return 2;
      }
      io::write_file_atomic(output, render_spectrogram_svg(series, title));
    }
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace eisc::cli
