// Command-line front end. Talks to the library only through the C API.
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jobtitle/jobtitle.h"

namespace {

enum Exit : int { kOk = 0, kInternal = 1, kUsage = 2, kData = 3, kIntegrity = 4 };

int exit_code(jt_status status) {
  switch (status) {
    case JT_OK: return kOk;
    case JT_ERR_IO:
    case JT_ERR_PARAMETER: return kUsage;
    case JT_ERR_PARSE:
    case JT_ERR_VALIDATION:
    case JT_ERR_DEGENERATE:
    case JT_ERR_CONVERGENCE: return kData;
    case JT_ERR_INTEGRITY: return kIntegrity;
    case JT_ERR_INTERNAL: return kInternal;
  }
  return kInternal;
}

// Thrown by check(); carries the process exit code.
struct Failure {
  int code;
};

void check(jt_status status, const std::string& context) {
  if (status == JT_OK) return;
  std::fprintf(stderr, "jobtitle: %s: %s (%s)\n", context.c_str(), jt_last_error(), jt_status_name(status));
  throw Failure{exit_code(status)};
}

// unique_ptr-style owner for C handles.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Config = Handle<jt_config, jt_config_free>;
using Corpus = Handle<jt_corpus, jt_corpus_free>;
using Clusters = Handle<jt_clusters, jt_clusters_free>;
using Cascade = Handle<jt_cascade, jt_cascade_free>;
using Prediction = Handle<jt_prediction, jt_prediction_free>;
using Report = Handle<jt_report, jt_report_free>;

std::string owned(char* s) {
  std::string out = s ? s : "";
  jt_string_free(s);
  return out;
}

std::string format_score(double score) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", score);
  return buf;
}

struct GlobalOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
};

// Config file (or CASCADE_TITLES_CONFIG), then --set pairs, then dedicated
// flags; later sources win.
void resolve_config(const GlobalOptions& g, Config& config, const std::map<std::string, std::string>& flags) {
  std::string path = g.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("CASCADE_TITLES_CONFIG")) path = env;
  }
  if (path.empty())
    check(jt_config_create(config.out()), "config");
  else
    check(jt_config_load(path.c_str(), config.out()), "config '" + path + "'");
  for (const auto& kv : g.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "jobtitle: --set expects key=value, got '%s'\n", kv.c_str());
      throw Failure{kUsage};
    }
    check(jt_config_set(config.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()), "--set " + kv);
  }
  if (g.seed) check(jt_config_set(config.get(), "seed", std::to_string(*g.seed).c_str()), "--seed");
  for (const auto& [key, value] : flags) check(jt_config_set(config.get(), key.c_str(), value.c_str()), "--" + key);
}

int run_cluster(const GlobalOptions& g, const std::string& input, const std::string& output) {
  Config config;
  resolve_config(g, config, {});
  Corpus corpus;
  check(jt_corpus_load(input.c_str(), corpus.out()), "input");
  Clusters clusters;
  check(jt_cluster_run(corpus.get(), config.get(), clusters.out()), "cluster");
  check(jt_clusters_save(clusters.get(), output.c_str()), "output");

  const std::size_t n = jt_clusters_count(clusters.get());
  std::printf("clusters\t%zu\nunassigned\t%zu\n", n, jt_clusters_unassigned(clusters.get()));
  std::map<std::size_t, std::size_t> histogram;
  for (std::size_t i = 0; i < n; ++i) ++histogram[jt_clusters_size(clusters.get(), i)];
  std::printf("# size\tclusters\n");
  for (const auto& [size, count] : histogram) std::printf("%zu\t%zu\n", size, count);
  return kOk;
}

int run_train(const GlobalOptions& g, const std::string& input, const std::string& output) {
  Config config;
  resolve_config(g, config, {});
  Corpus corpus;
  check(jt_corpus_load(input.c_str(), corpus.out()), "input");
  Cascade cascade;
  check(jt_cascade_train(corpus.get(), config.get(), cascade.out()), "train");
  check(jt_cascade_save(cascade.get(), output.c_str()), "output");

  std::printf("# group\tdocuments\tclusters\n");
  for (std::size_t i = 0; i < jt_cascade_group_count(cascade.get()); ++i) {
    const char* key = jt_cascade_group_key(cascade.get(), i);
    const std::size_t docs = jt_cascade_group_documents(cascade.get(), i);
    if (jt_cascade_group_has_vertical(cascade.get(), i))
      std::printf("%s\t%zu\t%zu\n", key, docs, jt_cascade_group_clusters(cascade.get(), i));
    else
      std::printf("%s\t%zu\t-\n", key, docs);
  }
  for (std::size_t i = 0; i < jt_cascade_warning_count(cascade.get()); ++i)
    std::fprintf(stderr, "warning: %s\n", jt_cascade_warning(cascade.get(), i));
  return kOk;
}

// id, coarse group, "fine" or "abstain", then label=score pairs.
int run_classify(const std::string& model, const std::string& input, const std::string& title, std::size_t k) {
  Cascade cascade;
  check(jt_cascade_load(model.c_str(), cascade.out()), "model");
  Corpus corpus;
  if (!title.empty())
    check(jt_corpus_from_title("title", title.c_str(), corpus.out()), "--title");
  else
    check(jt_corpus_load(input.c_str(), corpus.out()), "input");

  for (std::size_t i = 0; i < jt_corpus_size(corpus.get()); ++i) {
    Prediction p;
    check(jt_cascade_classify(cascade.get(), corpus.get(), i, k, p.out()), "classify");
    std::string line = std::string(jt_corpus_document_id(corpus.get(), i)) + '\t' +
                       jt_prediction_coarse_group(p.get()) + '\t' +
                       (jt_prediction_abstained(p.get()) ? "abstain" : "fine");
    for (std::size_t r = 0; r < jt_prediction_count(p.get()); ++r)
      line += std::string("\t") + jt_prediction_label(p.get(), r) + '=' + format_score(jt_prediction_score(p.get(), r));
    std::printf("%s\n", line.c_str());
  }
  return kOk;
}

int emit_report(const Report& report, const std::string& output) {
  std::fputs(owned([&] {
               char* text = nullptr;
               check(jt_report_text(report.get(), &text), "report");
               return text;
             }())
                 .c_str(),
             stdout);
  if (!output.empty()) check(jt_report_save(report.get(), output.c_str()), "output");
  return kOk;
}

int run_evaluate(const std::string& model, const std::string& input, std::size_t k, const std::string& output) {
  Cascade cascade;
  check(jt_cascade_load(model.c_str(), cascade.out()), "model");
  Corpus corpus;
  check(jt_corpus_load(input.c_str(), corpus.out()), "input");
  Report report;
  check(jt_evaluate(cascade.get(), corpus.get(), k, report.out()), "evaluate");
  return emit_report(report, output);
}

int run_cv(const GlobalOptions& g, const std::string& input, std::optional<std::size_t> folds,
           const std::string& output) {
  Config config;
  std::map<std::string, std::string> flags;
  if (folds) flags["folds"] = std::to_string(*folds);
  resolve_config(g, config, flags);
  Corpus corpus;
  check(jt_corpus_load(input.c_str(), corpus.out()), "input");

  Report report;
  check(jt_cross_validate(corpus.get(), config.get(), 0, report.out()), "cv");
  emit_report(report, output);
  if (!jt_report_is_valid(report.get())) {
    std::fprintf(stderr, "jobtitle: cv: a fold failed; the report is partial\n");
    return kData;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string keys = owned([] {
    char* text = nullptr;
    jt_config_help(&text);
    return text;
  }());
  const std::string footer = keys +
                             "\nCASCADE_TITLES_CONFIG names a config file when --config is absent.\n"
                             "Exit status: 0 ok, 2 I/O or argument error, 3 data error, 4 model integrity error.";

  CLI::App app{"Hierarchical job-title classification: clustering, cascade training, classification, evaluation."};
  app.footer(footer);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", jt_version());

  GlobalOptions g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--set", g.sets, "Override one config key (key=value); repeatable");
  auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides config)");

  std::string input, output, model, title;
  std::size_t k = 0, folds = 0;

  auto* cluster = app.add_subcommand("cluster", "Cluster the titles of a corpus and write the cluster set");
  cluster->add_option("input", input, "JSONL corpus")->required();
  cluster->add_option("--output", output, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train a cascade model and write the model directory");
  train->add_option("input", input, "Labeled JSONL corpus")->required();
  train->add_option("--output", output, "Model directory")->required();

  auto* classify = app.add_subcommand("classify", "Classify documents with a trained model");
  classify->add_option("model", model, "Model directory")->required();
  auto* input_opt = classify->add_option("input", input, "JSONL corpus");
  auto* title_opt = classify->add_option("--title", title, "Classify a single title");
  input_opt->excludes(title_opt);
  classify->add_option("--k", k, "Number of fine labels (default: model config)");

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a trained model on a labeled corpus");
  evaluate->add_option("model", model, "Model directory")->required();
  evaluate->add_option("input", input, "Labeled JSONL corpus")->required();
  evaluate->add_option("--k", k, "Number of fine labels (default: model config)");
  evaluate->add_option("--output", output, "Write the JSON report here");

  auto* cv = app.add_subcommand("cv", "k-fold cross-validation from a config");
  cv->add_option("input", input, "Labeled JSONL corpus")->required();
  auto* folds_opt = cv->add_option("--folds", folds, "Number of folds (default: config)");
  cv->add_option("--output", output, "Write the JSON report here");

  for (auto* sub : {cluster, train, classify, evaluate, cv}) sub->footer(footer);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*cluster) return run_cluster(g, input, output);
    if (*train) return run_train(g, input, output);
    if (*classify) {
      if (input.empty() && title.empty()) {
        std::fprintf(stderr, "jobtitle: classify needs an input file or --title\n");
        return kUsage;
      }
      return run_classify(model, input, title, k);
    }
    if (*evaluate) return run_evaluate(model, input, k, output);
    if (*cv) return run_cv(g, input, *folds_opt ? std::optional<std::size_t>(folds) : std::nullopt, output);
  } catch (const Failure& f) {
    return f.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "jobtitle: %s\n", e.what());
    return kInternal;
  }
  return kUsage;
}
