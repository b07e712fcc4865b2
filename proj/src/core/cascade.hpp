#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/corpus.hpp"
#include "core/linear_svm.hpp"
#include "core/proximity_knn.hpp"
#include "core/title_cluster.hpp"
#include "core/vectorspace.hpp"

namespace jobtitle {

using ClassKey = std::function<std::string(const Document&)>;

// Caps every class at base_count documents by seeded uniform sampling
// without replacement. Unlabeled documents are dropped; survivors keep
// their input order.
DocumentSet balance_undersample(const DocumentSet& data, std::size_t base_count, std::uint64_t seed,
                                const ClassKey& key = {});

// Fine-level classifier for one major group or alias group.
struct Vertical {
  ClusterSet clusters;
  ProximityIndex index;
};

struct GroupInfo {
  std::string key;
  std::size_t documents = 0;  // training documents after balancing
  bool has_vertical = false;
};

struct CascadeModel {
  Config config;
  TextPipeline text;
  TfIdfModel features;  // coarse-level vocabulary over full postings
  LinearModel coarse;   // class id i routes to groups[i].key
  std::vector<GroupInfo> groups;
  std::map<std::string, Vertical> verticals;
  std::vector<std::string> warnings;

  // Unit-length tf-idf over title + description + requirements, plus the
  // bias feature when configured.
  SparseVector coarse_features(const Document& doc) const;
};

struct CascadePrediction {
  std::string coarse_group;
  std::vector<double> coarse_scores;  // aligned with CascadeModel::groups
  std::vector<ScoredLabel> fine_titles;
  bool abstained = true;
};

// Balances by (aliased) group, trains the coarse SVM over full postings,
// then clusters and indexes the titles of every group holding at least
// min_group_size documents.
CascadeModel train_cascade(const DocumentSet& data, const Config& config);

CascadePrediction classify(const CascadeModel& model, const Document& doc, std::size_t k);

// manifest.json + coarse/ + text/ + verticals/<group>/{clusters,index}/
void save_cascade(const CascadeModel& model, const std::filesystem::path& dir);
// Verifies every checksum listed in the manifest; ErrorKind::Integrity on
// any mismatch.
CascadeModel load_cascade(const std::filesystem::path& dir);

}  // namespace jobtitle
