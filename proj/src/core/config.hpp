#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "core/corpus.hpp"
#include "core/linear_svm.hpp"
#include "core/textprep.hpp"
#include "core/title_cluster.hpp"

namespace jobtitle {

// Every tunable of the pipeline. Ranges are checked by validate().
struct Config {
  std::size_t min_df = 2;
  std::size_t min_title_freq = 4;
  double quality_q = 0.9;
  double threshold = 0.2;
  std::size_t max_labels = 100;
  std::size_t k = 5;
  std::size_t min_tf = 1;
  double C = 1.0;
  MulticlassStrategy strategy = MulticlassStrategy::OneVsAll;
  bool bias = false;
  double svm_tol = 1e-6;
  int svm_max_iters = 1000;
  std::size_t base_count = 150000;
  std::size_t min_group_size = 5;
  std::map<std::string, std::set<int>> aliases = {{"healthcare", {29, 31}}};
  std::uint64_t seed = 42;
  std::string stopwords;  // empty: built-in English list
  std::vector<std::string> exceptions = {default_exceptions().begin(), default_exceptions().end()};
  std::size_t folds = 10;
  bool stratified = false;

  void validate() const;

  TextPipeline text_pipeline() const;
  ClusterParams cluster_params() const;
  SvmOptions svm_options() const;
  GroupAliases group_aliases() const;
};

struct ConfigKey {
  const char* name;
  const char* description;
};

const std::vector<ConfigKey>& config_keys();

// Unknown keys and out-of-range values raise ErrorKind::Parameter.
Config config_from_json(const nlohmann::json& json, Config base = {});
nlohmann::json config_to_json(const Config& config);
Config load_config(const std::string& path, Config base = {});

// value is a JSON literal; bare words are taken as strings.
void set_config_value(Config& config, std::string_view key, std::string_view value);

std::string describe_config_keys();

}  // namespace jobtitle
