#include "jobtitle/jobtitle.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>
#include <variant>

#include "core/cascade.hpp"
#include "core/config.hpp"
#include "core/corpus.hpp"
#include "core/error.hpp"
#include "core/evaluation.hpp"
#include "core/persist.hpp"
#include "core/title_cluster.hpp"

using namespace jobtitle;

struct jt_config {
  Config value;
};
struct jt_corpus {
  DocumentSet value;
};
struct jt_clusters {
  ClusterSet value;
};
struct jt_cascade {
  CascadeModel value;
};
struct jt_prediction {
  CascadePrediction value;
};
struct jt_report {
  std::variant<EvalReport, CvReport> value;
};

namespace {

thread_local std::string last_error;

jt_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return JT_ERR_IO;
    case ErrorKind::Parse: return JT_ERR_PARSE;
    case ErrorKind::Validation: return JT_ERR_VALIDATION;
    case ErrorKind::Parameter: return JT_ERR_PARAMETER;
    case ErrorKind::Degenerate: return JT_ERR_DEGENERATE;
    case ErrorKind::Convergence: return JT_ERR_CONVERGENCE;
    case ErrorKind::Integrity: return JT_ERR_INTEGRITY;
  }
  return JT_ERR_INTERNAL;
}

jt_status failure(jt_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs body, translating exceptions into a status and the thread-local
// message. No exception crosses the C boundary.
template <typename F>
jt_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return JT_OK;
  } catch (const Error& e) {
    return failure(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return failure(JT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return failure(JT_ERR_INTERNAL, e.what());
  } catch (...) {
    return failure(JT_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (!p) fail(ErrorKind::Parameter, std::string(what) + " must not be NULL");
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

nlohmann::json report_json(const jt_report& report) {
  return std::holds_alternative<EvalReport>(report.value) ? report_to_json(std::get<EvalReport>(report.value))
                                                          : cv_report_to_json(std::get<CvReport>(report.value));
}

template <typename T>
bool in_range(const T* handle, std::size_t index, std::size_t size) {
  return handle && index < size;
}

}  // namespace

extern "C" {

const char* jt_version(void) { return "1.0.0"; }

const char* jt_status_name(jt_status status) {
  switch (status) {
    case JT_OK: return "ok";
    case JT_ERR_IO: return "io";
    case JT_ERR_PARSE: return "parse";
    case JT_ERR_VALIDATION: return "validation";
    case JT_ERR_PARAMETER: return "parameter";
    case JT_ERR_DEGENERATE: return "degenerate";
    case JT_ERR_CONVERGENCE: return "convergence";
    case JT_ERR_INTEGRITY: return "integrity";
    case JT_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* jt_last_error(void) { return last_error.c_str(); }

void jt_string_free(char* s) { std::free(s); }

jt_status jt_config_create(jt_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new jt_config{};
  });
}

jt_status jt_config_load(const char* path, jt_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new jt_config{load_config(path)};
  });
}

jt_status jt_config_set(jt_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    Config next = config->value;
    set_config_value(next, key, value);
    config->value = std::move(next);
  });
}

jt_status jt_config_to_json(const jt_config* config, char** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    *out = copy_string(config_to_json(config->value).dump(2) + "\n");
  });
}

jt_status jt_config_help(char** out) {
  return guarded([&] {
    require(out, "out");
    *out = copy_string(describe_config_keys());
  });
}

void jt_config_free(jt_config* config) { delete config; }

jt_status jt_corpus_load(const char* path, jt_corpus** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new jt_corpus{load_jsonl(path)};
  });
}

jt_status jt_corpus_parse(const char* text, size_t length, jt_corpus** out) {
  return guarded([&] {
    require(out, "out");
    if (length > 0) require(text, "text");
    *out = new jt_corpus{parse_jsonl(std::string_view(text ? text : "", length))};
  });
}

jt_status jt_corpus_from_title(const char* id, const char* title, jt_corpus** out) {
  return guarded([&] {
    require(id, "id");
    require(title, "title");
    require(out, "out");
    Document doc;
    doc.id = id;
    doc.title = title;
    std::vector<Document> docs;
    docs.push_back(std::move(doc));
    *out = new jt_corpus{DocumentSet(std::move(docs))};
  });
}

size_t jt_corpus_size(const jt_corpus* corpus) { return corpus ? corpus->value.size() : 0; }

const char* jt_corpus_document_id(const jt_corpus* corpus, size_t index) {
  return in_range(corpus, index, jt_corpus_size(corpus)) ? corpus->value[index].id.c_str() : nullptr;
}

void jt_corpus_free(jt_corpus* corpus) { delete corpus; }

jt_status jt_cluster_run(const jt_corpus* corpus, const jt_config* config, jt_clusters** out) {
  return guarded([&] {
    require(corpus, "corpus");
    require(config, "config");
    require(out, "out");
    config->value.validate();
    *out = new jt_clusters{cluster_corpus(corpus->value, config->value.cluster_params())};
  });
}

size_t jt_clusters_count(const jt_clusters* clusters) { return clusters ? clusters->value.clusters.size() : 0; }

const char* jt_clusters_label(const jt_clusters* clusters, size_t index) {
  return in_range(clusters, index, jt_clusters_count(clusters)) ? clusters->value.clusters[index].label.phrase.c_str()
                                                                 : nullptr;
}

size_t jt_clusters_size(const jt_clusters* clusters, size_t index) {
  return in_range(clusters, index, jt_clusters_count(clusters)) ? clusters->value.clusters[index].member_ids.size() : 0;
}

size_t jt_clusters_unassigned(const jt_clusters* clusters) {
  return clusters ? clusters->value.other_bucket.size() : 0;
}

jt_status jt_clusters_save(const jt_clusters* clusters, const char* dir) {
  return guarded([&] {
    require(clusters, "clusters");
    require(dir, "dir");
    save_cluster_set(clusters->value, dir);
  });
}

void jt_clusters_free(jt_clusters* clusters) { delete clusters; }

jt_status jt_cascade_train(const jt_corpus* corpus, const jt_config* config, jt_cascade** out) {
  return guarded([&] {
    require(corpus, "corpus");
    require(config, "config");
    require(out, "out");
    *out = new jt_cascade{train_cascade(corpus->value, config->value)};
  });
}

jt_status jt_cascade_save(const jt_cascade* cascade, const char* dir) {
  return guarded([&] {
    require(cascade, "cascade");
    require(dir, "dir");
    save_cascade(cascade->value, dir);
  });
}

jt_status jt_cascade_load(const char* dir, jt_cascade** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    *out = new jt_cascade{load_cascade(dir)};
  });
}

size_t jt_cascade_group_count(const jt_cascade* cascade) { return cascade ? cascade->value.groups.size() : 0; }

const char* jt_cascade_group_key(const jt_cascade* cascade, size_t index) {
  return in_range(cascade, index, jt_cascade_group_count(cascade)) ? cascade->value.groups[index].key.c_str() : nullptr;
}

size_t jt_cascade_group_documents(const jt_cascade* cascade, size_t index) {
  return in_range(cascade, index, jt_cascade_group_count(cascade)) ? cascade->value.groups[index].documents : 0;
}

size_t jt_cascade_group_clusters(const jt_cascade* cascade, size_t index) {
  if (!in_range(cascade, index, jt_cascade_group_count(cascade))) return 0;
  auto it = cascade->value.verticals.find(cascade->value.groups[index].key);
  return it == cascade->value.verticals.end() ? 0 : it->second.clusters.clusters.size();
}

int jt_cascade_group_has_vertical(const jt_cascade* cascade, size_t index) {
  return in_range(cascade, index, jt_cascade_group_count(cascade)) && cascade->value.groups[index].has_vertical;
}

size_t jt_cascade_warning_count(const jt_cascade* cascade) { return cascade ? cascade->value.warnings.size() : 0; }

const char* jt_cascade_warning(const jt_cascade* cascade, size_t index) {
  return in_range(cascade, index, jt_cascade_warning_count(cascade)) ? cascade->value.warnings[index].c_str() : nullptr;
}

jt_status jt_cascade_classify(const jt_cascade* cascade, const jt_corpus* corpus, size_t index, size_t k,
                              jt_prediction** out) {
  return guarded([&] {
    require(cascade, "cascade");
    require(corpus, "corpus");
    require(out, "out");
    if (index >= corpus->value.size()) fail(ErrorKind::Parameter, "document index out of range");
    const std::size_t kk = k == 0 ? cascade->value.config.k : k;
    *out = new jt_prediction{classify(cascade->value, corpus->value[index], kk)};
  });
}

void jt_cascade_free(jt_cascade* cascade) { delete cascade; }

const char* jt_prediction_coarse_group(const jt_prediction* prediction) {
  return prediction ? prediction->value.coarse_group.c_str() : nullptr;
}

int jt_prediction_abstained(const jt_prediction* prediction) { return prediction ? prediction->value.abstained : 1; }

size_t jt_prediction_count(const jt_prediction* prediction) {
  return prediction ? prediction->value.fine_titles.size() : 0;
}

const char* jt_prediction_label(const jt_prediction* prediction, size_t rank) {
  return in_range(prediction, rank, jt_prediction_count(prediction)) ? prediction->value.fine_titles[rank].label.c_str()
                                                                      : nullptr;
}

double jt_prediction_score(const jt_prediction* prediction, size_t rank) {
  return in_range(prediction, rank, jt_prediction_count(prediction)) ? prediction->value.fine_titles[rank].score : 0.0;
}

void jt_prediction_free(jt_prediction* prediction) { delete prediction; }

jt_status jt_evaluate(const jt_cascade* cascade, const jt_corpus* corpus, size_t k, jt_report** out) {
  return guarded([&] {
    require(cascade, "cascade");
    require(corpus, "corpus");
    require(out, "out");
    const std::size_t kk = k == 0 ? cascade->value.config.k : k;
    *out = new jt_report{evaluate_cascade(cascade->value, corpus->value, kk)};
  });
}

jt_status jt_cross_validate(const jt_corpus* corpus, const jt_config* config, size_t folds, jt_report** out) {
  return guarded([&] {
    require(corpus, "corpus");
    require(config, "config");
    require(out, "out");
    config->value.validate();
    const std::size_t k = folds == 0 ? config->value.folds : folds;
    *out = new jt_report{cross_validate(corpus->value, config->value, k, config->value.seed)};
  });
}

jt_status jt_report_metric(const jt_report* report, const char* name, double* out) {
  return guarded([&] {
    require(report, "report");
    require(name, "name");
    require(out, "out");
    const nlohmann::json full = report_json(*report);
    const nlohmann::json& j = std::holds_alternative<EvalReport>(report->value) ? full : full.at("summary");
    if (!j.contains(name)) fail(ErrorKind::Parameter, std::string("report has no metric '") + name + "'");
    const auto& v = j.at(name);
    *out = v.is_object() ? v.at("mean").get<double>() : v.get<double>();
  });
}

int jt_report_is_valid(const jt_report* report) {
  if (!report) return 0;
  return std::holds_alternative<EvalReport>(report->value) || std::get<CvReport>(report->value).valid;
}

jt_status jt_report_json(const jt_report* report, char** out) {
  return guarded([&] {
    require(report, "report");
    require(out, "out");
    *out = copy_string(report_json(*report).dump(2) + "\n");
  });
}

jt_status jt_report_text(const jt_report* report, char** out) {
  return guarded([&] {
    require(report, "report");
    require(out, "out");
    *out = copy_string(std::holds_alternative<EvalReport>(report->value)
                           ? format_report(std::get<EvalReport>(report->value))
                           : format_cv_report(std::get<CvReport>(report->value)));
  });
}

jt_status jt_report_save(const jt_report* report, const char* path) {
  return guarded([&] {
    require(report, "report");
    require(path, "path");
    persist::write_file(path, report_json(*report).dump(2) + "\n");
  });
}

void jt_report_free(jt_report* report) { delete report; }

}  // extern "C"
