#include "core/config.hpp"

#include <cstdio>

#include "core/error.hpp"
#include "core/persist.hpp"

namespace jobtitle {

namespace {

using nlohmann::json;

[[noreturn]] void bad_value(std::string_view key, const std::string& why) {
  fail(ErrorKind::Parameter, "config key '" + std::string(key) + "': " + why);
}

std::size_t get_count(const json& v, std::string_view key, std::size_t min_value) {
  if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min_value))
    bad_value(key, "expected an integer >= " + std::to_string(min_value));
  return v.get<std::size_t>();
}

double get_real(const json& v, std::string_view key) {
  if (!v.is_number()) bad_value(key, "expected a number");
  return v.get<double>();
}

bool get_bool(const json& v, std::string_view key) {
  if (!v.is_boolean()) bad_value(key, "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& v, std::string_view key) {
  if (!v.is_string()) bad_value(key, "expected a string");
  return v.get<std::string>();
}

void apply(Config& c, const std::string& key, const json& v) {
  if (key == "min_df") c.min_df = get_count(v, key, 1);
  else if (key == "min_title_freq") c.min_title_freq = get_count(v, key, 1);
  else if (key == "quality_q") c.quality_q = get_real(v, key);
  else if (key == "threshold") c.threshold = get_real(v, key);
  else if (key == "max_labels") c.max_labels = get_count(v, key, 1);
  else if (key == "k") c.k = get_count(v, key, 1);
  else if (key == "min_tf") c.min_tf = get_count(v, key, 1);
  else if (key == "C") c.C = get_real(v, key);
  else if (key == "strategy") {
    try {
      c.strategy = parse_strategy(get_string(v, key));
    } catch (const Error& e) {
      bad_value(key, e.what());
    }
  } else if (key == "bias") c.bias = get_bool(v, key);
  else if (key == "svm_tol") c.svm_tol = get_real(v, key);
  else if (key == "svm_max_iters") c.svm_max_iters = static_cast<int>(get_count(v, key, 1));
  else if (key == "base_count") c.base_count = get_count(v, key, 1);
  else if (key == "min_group_size") c.min_group_size = get_count(v, key, 1);
  else if (key == "aliases") {
    if (!v.is_object()) bad_value(key, "expected an object mapping alias name to a list of major groups");
    std::map<std::string, std::set<int>> aliases;
    for (const auto& [name, majors] : v.items()) {
      if (!majors.is_array()) bad_value(key, "alias '" + name + "' must list major groups");
      for (const auto& m : majors) {
        if (!m.is_number_integer()) bad_value(key, "alias '" + name + "' must list integers");
        aliases[name].insert(m.get<int>());
      }
    }
    c.aliases = std::move(aliases);
  } else if (key == "seed") {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      bad_value(key, "expected a non-negative integer");
    c.seed = v.get<std::uint64_t>();
  } else if (key == "stopwords") c.stopwords = get_string(v, key);
  else if (key == "exceptions") {
    if (!v.is_array()) bad_value(key, "expected a list of tokens");
    std::vector<std::string> tokens;
    for (const auto& t : v) tokens.push_back(get_string(t, key));
    c.exceptions = std::move(tokens);
  } else if (key == "folds") c.folds = get_count(v, key, 2);
  else if (key == "stratified") c.stratified = get_bool(v, key);
  else fail(ErrorKind::Parameter, "unknown config key '" + key + "'");
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"min_df", "minimum number of documents a term must occur in to enter a vocabulary (default 2)"},
      {"min_title_freq", "minimum occurrences of a normalized title for it to be clustered (default 4)"},
      {"quality_q", "fraction of squared Frobenius norm the retained singular values must carry, in (0,1] (default 0.9)"},
      {"threshold", "cosine threshold for joining a cluster, in (0,1] (default 0.2)"},
      {"max_labels", "maximum number of cluster labels induced per clustering run (default 100)"},
      {"k", "number of fine-level titles returned per document (default 5)"},
      {"min_tf", "minimum in-title term count for a term to enter a k-NN query (default 1)"},
      {"C", "SVM regularization constant, > 0 (default 1.0)"},
      {"strategy", "multiclass strategy: \"ova\" or \"crammer_singer\" (default \"ova\")"},
      {"bias", "append an always-on bias feature to SVM inputs (default false)"},
      {"svm_tol", "stop SVM training when an epoch lowers the objective by less than this, relative (default 1e-6)"},
      {"svm_max_iters", "maximum SVM training epochs (default 1000)"},
      {"base_count", "per-class cap for under-sampling the training set (default 150000)"},
      {"min_group_size", "minimum documents in a group for it to get a fine-level vertical (default 5)"},
      {"aliases", "object mapping a group name to the major groups it merges (default {\"healthcare\": [29, 31]})"},
      {"seed", "seed for every randomized step (default 42)"},
      {"stopwords", "path of a stop list file, one word per line; empty uses the built-in list"},
      {"exceptions", "tokens kept verbatim by normalization (default [\"c++\", \"c#\", \".net\", ...])"},
      {"folds", "number of cross-validation folds, >= 2 (default 10)"},
      {"stratified", "stratify cross-validation folds by group (default false)"},
  };
  return keys;
}

void Config::validate() const {
  if (!(quality_q > 0.0 && quality_q <= 1.0)) bad_value("quality_q", "must lie in (0, 1]");
  if (!(threshold > 0.0 && threshold <= 1.0)) bad_value("threshold", "must lie in (0, 1]");
  if (!(C > 0.0)) bad_value("C", "must be > 0");
  if (!(svm_tol > 0.0)) bad_value("svm_tol", "must be > 0");
  if (svm_max_iters < 1) bad_value("svm_max_iters", "must be >= 1");
  if (min_df < 1) bad_value("min_df", "must be >= 1");
  if (min_title_freq < 1) bad_value("min_title_freq", "must be >= 1");
  if (k < 1) bad_value("k", "must be >= 1");
  if (min_tf < 1) bad_value("min_tf", "must be >= 1");
  if (base_count < 1) bad_value("base_count", "must be >= 1");
  if (folds < 2) bad_value("folds", "must be >= 2");
  GroupAliases{aliases};
}

TextPipeline Config::text_pipeline() const {
  TextPipeline text;
  if (!stopwords.empty()) text.stops = StopList::load(stopwords);
  text.exceptions = ExceptionLexicon(exceptions.begin(), exceptions.end());
  return text;
}

ClusterParams Config::cluster_params() const {
  ClusterParams p;
  p.min_title_freq = min_title_freq;
  p.min_df = min_df;
  p.quality_q = quality_q;
  p.threshold = threshold;
  p.max_labels = max_labels;
  p.seed = seed;
  p.text = text_pipeline();
  return p;
}

SvmOptions Config::svm_options() const {
  SvmOptions o;
  o.C = C;
  o.tol = svm_tol;
  o.max_iters = svm_max_iters;
  o.seed = seed;
  return o;
}

GroupAliases Config::group_aliases() const { return GroupAliases(aliases); }

Config config_from_json(const json& j, Config base) {
  if (!j.is_object()) fail(ErrorKind::Parameter, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) apply(base, key, value);
  base.validate();
  return base;
}

json config_to_json(const Config& c) {
  json aliases = json::object();
  for (const auto& [name, majors] : c.aliases) aliases[name] = std::vector<int>(majors.begin(), majors.end());
  return json{{"min_df", c.min_df},
              {"min_title_freq", c.min_title_freq},
              {"quality_q", c.quality_q},
              {"threshold", c.threshold},
              {"max_labels", c.max_labels},
              {"k", c.k},
              {"min_tf", c.min_tf},
              {"C", c.C},
              {"strategy", to_string(c.strategy)},
              {"bias", c.bias},
              {"svm_tol", c.svm_tol},
              {"svm_max_iters", c.svm_max_iters},
              {"base_count", c.base_count},
              {"min_group_size", c.min_group_size},
              {"aliases", aliases},
              {"seed", c.seed},
              {"stopwords", c.stopwords},
              {"exceptions", c.exceptions},
              {"folds", c.folds},
              {"stratified", c.stratified}};
}

Config load_config(const std::string& path, Config base) {
  const std::string text = persist::read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Parameter, "config '" + path + "': " + e.what());
  }
  return config_from_json(j, std::move(base));
}

void set_config_value(Config& config, std::string_view key, std::string_view value) {
  json v;
  try {
    v = json::parse(value);
  } catch (const json::parse_error&) {
    v = std::string(value);
  }
  Config updated = config;
  apply(updated, std::string(key), v);
  updated.validate();
  config = std::move(updated);
}

std::string describe_config_keys() {
  std::string out = "Config keys (JSON file via --config, or --set key=value):\n";
  for (const auto& key : config_keys()) {
    char line[64];
    std::snprintf(line, sizeof line, "  %-16s ", key.name);
    out += line;
    out += key.description;
    out += '\n';
  }
  return out;
}

}  // namespace jobtitle
