#include "core/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace jobtitle {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

const char* const kSummaryMetrics[] = {"macro_precision", "macro_recall", "macro_f1", "accuracy", "coverage"};

std::optional<double> metric(const EvalReport& r, const std::string& name) {
  if (name == "macro_precision") return r.macro_precision;
  if (name == "macro_recall") return r.macro_recall;
  if (name == "macro_f1") return r.macro_f1;
  if (name == "accuracy") return r.accuracy;
  if (name == "coverage") return r.coverage;
  if (name == "hamming_loss") return r.hamming_loss;
  if (name == "zero_one_loss") return r.zero_one_loss;
  return std::nullopt;
}

}  // namespace

ConfusionCounts confusion_counts(const std::vector<std::optional<std::string>>& preds,
                                 const std::vector<std::string>& golds) {
  if (preds.size() != golds.size())
    fail(ErrorKind::Parameter, "prediction and gold lists differ in length (" + std::to_string(preds.size()) + " vs " +
                                   std::to_string(golds.size()) + ")");
  ConfusionCounts counts;
  counts.n_total = golds.size();
  for (std::size_t i = 0; i < golds.size(); ++i) {
    ClassCounts& gold = counts.classes[golds[i]];
    gold.in_gold = true;
    if (!preds[i]) {
      ++gold.fn;
      continue;
    }
    ++counts.n_predicted;
    if (*preds[i] == golds[i]) {
      ++gold.tp;
    } else {
      ++gold.fn;
      ++counts.classes[*preds[i]].fp;
    }
  }
  return counts;
}

EvalReport macro_metrics(const ConfusionCounts& counts) {
  EvalReport r;
  r.n_total = counts.n_total;
  r.n_predicted = counts.n_predicted;
  std::size_t tp_total = 0;
  for (const auto& [name, c] : counts.classes) {
    tp_total += c.tp;
    if (!c.in_gold) continue;
    ClassMetrics m{name, c.tp + c.fn, c.tp, c.fp, c.fn};
    m.precision = ratio(c.tp, c.tp + c.fp);
    m.recall = ratio(c.tp, c.tp + c.fn);
    m.f1 = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    r.per_class.push_back(std::move(m));
  }
  if (r.per_class.empty()) fail(ErrorKind::Degenerate, "no gold classes to evaluate");

  const double n = static_cast<double>(r.per_class.size());
  for (const auto& m : r.per_class) {
    r.macro_precision += m.precision;
    r.macro_recall += m.recall;
    r.macro_f1 += m.f1;
  }
  r.macro_precision /= n;
  r.macro_recall /= n;
  r.macro_f1 /= n;
  r.accuracy = ratio(tp_total, counts.n_predicted);
  r.coverage = ratio(counts.n_predicted, counts.n_total);
  return r;
}

MultilabelLosses multilabel_losses(const std::vector<std::set<std::string>>& pred_sets,
                                   const std::vector<std::set<std::string>>& gold_sets,
                                   const std::set<std::string>& universe) {
  if (universe.empty()) fail(ErrorKind::Parameter, "label universe is empty");
  if (pred_sets.size() != gold_sets.size()) fail(ErrorKind::Parameter, "prediction and gold set lists differ in length");
  if (pred_sets.empty()) fail(ErrorKind::Parameter, "no items to score");
  auto check = [&](const std::set<std::string>& s) {
    for (const auto& label : s)
      if (!universe.count(label)) fail(ErrorKind::Parameter, "label '" + label + "' is outside the universe");
  };

  double hamming = 0.0;
  std::size_t mismatched = 0;
  for (std::size_t i = 0; i < pred_sets.size(); ++i) {
    check(pred_sets[i]);
    check(gold_sets[i]);
    std::vector<std::string> diff;
    std::set_symmetric_difference(pred_sets[i].begin(), pred_sets[i].end(), gold_sets[i].begin(), gold_sets[i].end(),
                                  std::back_inserter(diff));
    hamming += static_cast<double>(diff.size()) / static_cast<double>(universe.size());
    if (!diff.empty()) ++mismatched;
  }
  const double n = static_cast<double>(pred_sets.size());
  return {hamming / n, static_cast<double>(mismatched) / n};
}

std::vector<Fold> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > n)
    fail(ErrorKind::Parameter, "fold count " + std::to_string(k) + " needs 2 <= k <= " + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(order, rng);

  std::vector<Fold> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos), order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return folds;
}

std::vector<Fold> stratified_kfold_split(const std::vector<std::string>& classes, std::size_t k, std::uint64_t seed) {
  const std::size_t n = classes.size();
  if (k < 2 || k > n)
    fail(ErrorKind::Parameter, "fold count " + std::to_string(k) + " needs 2 <= k <= " + std::to_string(n));
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < n; ++i) by_class[classes[i]].push_back(i);

  Rng rng(seed);
  std::vector<Fold> folds(k);
  std::size_t next = 0;
  for (auto& [cls, members] : by_class) {
    shuffle(members, rng);
    for (std::size_t i : members) folds[next++ % k].push_back(i);
  }
  return folds;
}

EvalReport evaluate_cascade(const CascadeModel& model, const DocumentSet& docs, std::size_t k) {
  const GroupAliases aliases = model.config.group_aliases();
  std::vector<std::optional<std::string>> preds;
  std::vector<std::string> golds;
  std::vector<std::set<std::string>> pred_sets, gold_sets;
  std::set<std::string> universe;
  for (const auto& doc : docs.docs()) {
    if (!doc.gold_soc) fail(ErrorKind::Validation, "document '" + doc.id + "' has no soc label to evaluate against");
    const CascadePrediction p = classify(model, doc, k);
    golds.push_back(aliases.resolve(doc.gold_soc->major));
    preds.push_back(p.abstained ? std::nullopt : std::optional<std::string>(p.coarse_group));
    if (doc.gold_titles.empty()) continue;
    std::set<std::string> predicted, gold;
    for (const auto& s : p.fine_titles) predicted.insert(s.label);
    for (const auto& t : doc.gold_titles) {
      std::string norm = normalize(t, model.text.exceptions);
      if (!norm.empty()) gold.insert(std::move(norm));
    }
    universe.insert(predicted.begin(), predicted.end());
    universe.insert(gold.begin(), gold.end());
    pred_sets.push_back(std::move(predicted));
    gold_sets.push_back(std::move(gold));
  }
  EvalReport report = macro_metrics(confusion_counts(preds, golds));
  if (!universe.empty()) {
    const MultilabelLosses losses = multilabel_losses(pred_sets, gold_sets, universe);
    report.hamming_loss = losses.hamming;
    report.zero_one_loss = losses.zero_one;
  }
  return report;
}

CvReport cross_validate(const DocumentSet& docs, const Config& config, std::size_t folds, std::uint64_t seed) {
  CvReport out;
  out.folds = folds;
  out.seed = seed;
  out.stratified = config.stratified;

  if (folds > docs.size())
    fail(ErrorKind::Degenerate, "corpus has " + std::to_string(docs.size()) + " documents, fewer than " +
                                    std::to_string(folds) + " folds");
  const GroupAliases aliases = config.group_aliases();
  std::vector<std::string> classes;
  for (const auto& d : docs.docs()) {
    if (!d.gold_soc) fail(ErrorKind::Validation, "document '" + d.id + "' has no soc label");
    classes.push_back(aliases.resolve(d.gold_soc->major));
  }
  const std::vector<Fold> split =
      config.stratified ? stratified_kfold_split(classes, folds, seed) : kfold_split(docs.size(), folds, seed);

  std::map<std::string, std::size_t> per_class;
  for (const auto& c : classes) ++per_class[c];
  for (const auto& [cls, count] : per_class)
    if (count < folds)
      out.notes.push_back("class " + cls + " has " + std::to_string(count) + " documents, fewer than " +
                          std::to_string(folds) + " folds; some folds will not test it");

  for (std::size_t f = 0; f < split.size(); ++f) {
    std::vector<char> held(docs.size(), 0);
    for (std::size_t i : split[f]) held[i] = 1;
    std::vector<std::size_t> train_pos, test_pos;
    for (std::size_t i = 0; i < docs.size(); ++i) (held[i] ? test_pos : train_pos).push_back(i);
    try {
      const CascadeModel model = train_cascade(docs.subset(train_pos), config);
      out.fold_reports.push_back(evaluate_cascade(model, docs.subset(test_pos), config.k));
    } catch (const Error& e) {
      out.valid = false;
      out.error = "fold " + std::to_string(f) + ": " + e.what();
      break;
    }
  }

  std::vector<std::string> names(std::begin(kSummaryMetrics), std::end(kSummaryMetrics));
  for (const char* optional_name : {"hamming_loss", "zero_one_loss"}) {
    const bool everywhere = !out.fold_reports.empty() &&
                            std::all_of(out.fold_reports.begin(), out.fold_reports.end(),
                                        [&](const EvalReport& r) { return metric(r, optional_name).has_value(); });
    if (everywhere) names.emplace_back(optional_name);
  }
  if (out.fold_reports.empty()) return out;
  const double n = static_cast<double>(out.fold_reports.size());
  for (const auto& name : names) {
    double sum = 0.0;
    for (const auto& r : out.fold_reports) sum += *metric(r, name);
    MetricSummary s{sum / n, 0.0};
    if (out.fold_reports.size() > 1) {
      double sq = 0.0;
      for (const auto& r : out.fold_reports) sq += (*metric(r, name) - s.mean) * (*metric(r, name) - s.mean);
      s.stddev = std::sqrt(sq / (n - 1.0));
    }
    out.summary.emplace(name, s);
  }
  return out;
}

nlohmann::json report_to_json(const EvalReport& r) {
  nlohmann::json j{{"macro_precision", r.macro_precision},
                   {"macro_recall", r.macro_recall},
                   {"macro_f1", r.macro_f1},
                   {"accuracy", r.accuracy},
                   {"coverage", r.coverage},
                   {"n_total", r.n_total},
                   {"n_predicted", r.n_predicted}};
  if (r.hamming_loss) j["hamming_loss"] = *r.hamming_loss;
  if (r.zero_one_loss) j["zero_one_loss"] = *r.zero_one_loss;
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& m : r.per_class)
    classes.push_back({{"class", m.name},
                       {"support", m.support},
                       {"tp", m.tp},
                       {"fp", m.fp},
                       {"fn", m.fn},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1}});
  j["per_class"] = std::move(classes);
  return j;
}

nlohmann::json cv_report_to_json(const CvReport& r) {
  nlohmann::json summary = nlohmann::json::object();
  for (const auto& [name, s] : r.summary) summary[name] = {{"mean", s.mean}, {"stddev", s.stddev}};
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : r.fold_reports) folds.push_back(report_to_json(f));
  nlohmann::json j{{"folds", r.folds},     {"seed", r.seed},        {"stratified", r.stratified},
                   {"valid", r.valid},     {"summary", summary},    {"fold_reports", folds},
                   {"notes", r.notes}};
  if (!r.valid) j["error"] = r.error;
  return j;
}

std::string format_report(const EvalReport& r) {
  std::string out;
  char line[160];
  auto row = [&](const char* name, double value) {
    std::snprintf(line, sizeof line, "%-16s%.6g\n", name, value);
    out += line;
  };
  row("macro_precision", r.macro_precision);
  row("macro_recall", r.macro_recall);
  row("macro_f1", r.macro_f1);
  row("accuracy", r.accuracy);
  row("coverage", r.coverage);
  if (r.hamming_loss) row("hamming_loss", *r.hamming_loss);
  if (r.zero_one_loss) row("zero_one_loss", *r.zero_one_loss);
  out += "items           " + std::to_string(r.n_predicted) + "/" + std::to_string(r.n_total) + " predicted\n\n";

  std::snprintf(line, sizeof line, "%-12s %8s %10s %10s %10s\n", "class", "support", "precision", "recall", "f1");
  out += line;
  for (const auto& m : r.per_class) {
    std::snprintf(line, sizeof line, "%-12s %8zu %10.6g %10.6g %10.6g\n", m.name.c_str(), m.support, m.precision,
                  m.recall, m.f1);
    out += line;
  }
  return out;
}

std::string format_cv_report(const CvReport& r) {
  std::string out = std::to_string(r.fold_reports.size()) + "/" + std::to_string(r.folds) + " folds" +
                    (r.stratified ? " (stratified)" : "") + ", seed " + std::to_string(r.seed) + "\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %10s %10s\n", "metric", "mean", "stddev");
  out += line;
  for (const auto& [name, s] : r.summary) {
    std::snprintf(line, sizeof line, "%-16s %10.6g %10.6g\n", name.c_str(), s.mean, s.stddev);
    out += line;
  }
  for (const auto& note : r.notes) out += "note: " + note + '\n';
  if (!r.valid) out += "INVALID: " + r.error + '\n';
  return out;
}

}  // namespace jobtitle
