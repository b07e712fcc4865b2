#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/cascade.hpp"
#include "core/config.hpp"
#include "core/corpus.hpp"

namespace jobtitle {

struct ClassCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  bool in_gold = false;
};

struct ConfusionCounts {
  std::map<std::string, ClassCounts> classes;
  std::size_t n_total = 0;
  std::size_t n_predicted = 0;
};

// An absent prediction is an abstention: a false negative for the gold
// class and never a false positive.
ConfusionCounts confusion_counts(const std::vector<std::optional<std::string>>& preds,
                                 const std::vector<std::string>& golds);

struct ClassMetrics {
  std::string name;
  std::size_t support = 0;  // tp + fn
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;  // mean of per-class F1
  double accuracy = 0.0;  // over non-abstained items
  double coverage = 0.0;  // n_predicted / n_total
  std::size_t n_total = 0;
  std::size_t n_predicted = 0;
  std::vector<ClassMetrics> per_class;  // gold classes only, by name
  std::optional<double> hamming_loss;
  std::optional<double> zero_one_loss;
};

// Averages run over the classes that occur in gold.
EvalReport macro_metrics(const ConfusionCounts& counts);

struct MultilabelLosses {
  double hamming = 0.0;
  double zero_one = 0.0;
};

MultilabelLosses multilabel_losses(const std::vector<std::set<std::string>>& pred_sets,
                                   const std::vector<std::set<std::string>>& gold_sets,
                                   const std::set<std::string>& universe);

using Fold = std::vector<std::size_t>;

// Seeded shuffle of 0..n-1 cut into k contiguous folds; the first n % k
// folds hold one extra index.
std::vector<Fold> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

// Per-class shuffles dealt round-robin, so every class and every fold stay
// balanced within one.
std::vector<Fold> stratified_kfold_split(const std::vector<std::string>& classes, std::size_t k, std::uint64_t seed);

// Coarse-level report against the aliased gold group; a fine-level
// abstention counts as a missing prediction. Documents carrying gold titles
// add multi-label losses of the returned labels against the normalized
// gold titles.
EvalReport evaluate_cascade(const CascadeModel& model, const DocumentSet& docs, std::size_t k);

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single fold
};

struct CvReport {
  std::size_t folds = 0;
  std::uint64_t seed = 0;
  bool stratified = false;
  std::vector<EvalReport> fold_reports;  // by fold id
  std::map<std::string, MetricSummary> summary;
  std::vector<std::string> notes;
  bool valid = true;
  std::string error;  // set when a fold failed and the report is partial
};

// Trains a cascade on all folds but one and evaluates on the held-out fold,
// for each fold in turn. A failing fold stops the run and leaves a partial
// report with valid == false.
CvReport cross_validate(const DocumentSet& docs, const Config& config, std::size_t folds, std::uint64_t seed);

nlohmann::json report_to_json(const EvalReport& report);
nlohmann::json cv_report_to_json(const CvReport& report);
std::string format_report(const EvalReport& report);
std::string format_cv_report(const CvReport& report);

}  // namespace jobtitle
