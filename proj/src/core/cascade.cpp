#include "core/cascade.hpp"

#include <algorithm>
#include <set>

#include "core/error.hpp"
#include "core/persist.hpp"
#include "core/rng.hpp"

namespace jobtitle {

namespace {

constexpr const char* kFormat = "jobtitle-cascade";
constexpr int kFormatVersion = 1;

std::string serialize_features(const TfIdfModel& model) {
  const Vocabulary& v = model.vocab();
  std::string out = "# n_docs\t" + std::to_string(v.n_docs()) + "\n";
  for (TermId t = 0; t < v.size(); ++t) out += v.term(t) + '\t' + std::to_string(v.document_frequency(t)) + '\n';
  return out;
}

TfIdfModel parse_features(std::string_view text) {
  const auto rows = persist::lines(text);
  constexpr std::string_view kHeader = "# n_docs\t";
  if (rows.empty() || rows[0].substr(0, kHeader.size()) != kHeader) fail(ErrorKind::Integrity, "features.tsv: missing header");
  const std::size_t n_docs = persist::parse_size(rows[0].substr(kHeader.size()));
  std::vector<std::string> terms;
  std::vector<std::size_t> df;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    auto f = persist::split(rows[i], '\t');
    if (f.size() != 2) fail(ErrorKind::Integrity, "features.tsv: malformed line " + std::to_string(i + 1));
    terms.emplace_back(f[0]);
    df.push_back(persist::parse_size(f[1]));
  }
  try {
    return TfIdfModel(Vocabulary(std::move(terms), std::move(df), n_docs));
  } catch (const Error& e) {
    fail(ErrorKind::Integrity, std::string("features.tsv: ") + e.what());
  }
}

std::string serialize_stopwords(const StopList& stops) {
  std::string out = "# stop list used at training time\n";
  for (const auto& w : stops.words()) out += w + '\n';
  return out;
}

void add_prefixed(std::map<std::string, std::string>& files, const std::string& prefix, FileMap part) {
  for (auto& [name, contents] : part) files[prefix + name] = std::move(contents);
}

FileMap with_prefix(const std::map<std::string, std::string>& files, const std::string& prefix,
                    std::initializer_list<const char*> names) {
  FileMap out;
  for (const char* name : names) {
    auto it = files.find(prefix + name);
    if (it == files.end()) fail(ErrorKind::Integrity, "manifest does not list " + prefix + name);
    out[name] = it->second;
  }
  return out;
}

}  // namespace

DocumentSet balance_undersample(const DocumentSet& data, std::size_t base_count, std::uint64_t seed,
                                const ClassKey& key) {
  if (base_count < 1) fail(ErrorKind::Parameter, "base_count must be >= 1");
  const ClassKey class_of = key ? key : [](const Document& d) { return group_key(d.gold_soc->major); };

  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data[i].gold_soc) by_class[class_of(data[i])].push_back(i);
  if (by_class.empty()) fail(ErrorKind::Degenerate, "no labeled documents to balance");

  Rng rng(seed);
  std::vector<char> keep(data.size(), 0);
  for (auto& [cls, positions] : by_class) {
    if (positions.size() > base_count) {
      // Partial Fisher-Yates: the first base_count slots become a uniform
      // sample without replacement.
      for (std::size_t i = 0; i < base_count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(uniform_index(rng, positions.size() - i));
        std::swap(positions[i], positions[j]);
      }
      positions.resize(base_count);
    }
    for (std::size_t p : positions) keep[p] = 1;
  }
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (keep[i]) kept.push_back(i);
  return data.subset(kept);
}

SparseVector CascadeModel::coarse_features(const Document& doc) const {
  SparseVector x = tfidf_vector(text.terms(doc.full_text()), features).normalized();
  if (!config.bias) return x;
  std::vector<SparseEntry> entries = x.entries();
  entries.push_back({static_cast<TermId>(features.vocab().size()), 1.0});
  return SparseVector::from_unsorted(std::move(entries));
}

CascadeModel train_cascade(const DocumentSet& data, const Config& config) {
  config.validate();
  CascadeModel model;
  model.config = config;
  model.text = config.text_pipeline();
  const GroupAliases aliases = config.group_aliases();
  const ClassKey group_of = [&](const Document& d) { return aliases.resolve(d.gold_soc->major); };

  std::set<std::string> present;
  for (const auto& d : data.docs())
    if (d.gold_soc) present.insert(group_of(d));
  if (present.size() < 2)
    fail(ErrorKind::Degenerate, "training needs labeled documents from at least 2 groups, found " +
                                    std::to_string(present.size()));

  const DocumentSet balanced = balance_undersample(data, config.base_count, config.seed, group_of);
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < balanced.size(); ++i) members[group_of(balanced[i])].push_back(i);

  std::map<std::string, int> class_of;
  for (const auto& [key, positions] : members) {
    class_of[key] = static_cast<int>(model.groups.size());
    model.groups.push_back({key, positions.size(), false});
  }

  std::vector<TermSequence> terms;
  terms.reserve(balanced.size());
  for (const auto& d : balanced.docs()) terms.push_back(model.text.terms(d.full_text(), d.id));
  Vocabulary vocab = build_vocabulary(terms, config.min_df);
  if (vocab.empty()) fail(ErrorKind::Degenerate, "no feature reaches min_df " + std::to_string(config.min_df));
  model.features = TfIdfModel(std::move(vocab));

  std::vector<LabeledInstance> instances;
  instances.reserve(balanced.size());
  for (const auto& d : balanced.docs()) instances.push_back({model.coarse_features(d), class_of[group_of(d)]});
  const std::size_t dim = model.features.vocab().size() + (config.bias ? 1 : 0);
  MulticlassTrainResult trained = config.strategy == MulticlassStrategy::OneVsAll
                                      ? train_ova(instances, dim, config.svm_options())
                                      : train_crammer_singer(instances, dim, config.svm_options());
  model.coarse = std::move(trained.model);
  model.coarse.bias = config.bias;
  for (auto& w : trained.warnings) model.warnings.push_back("coarse: " + w);

  const ClusterParams cluster_params = config.cluster_params();
  for (auto& group : model.groups) {
    if (group.documents < config.min_group_size) {
      model.warnings.push_back("group " + group.key + ": " + std::to_string(group.documents) +
                               " documents, below min_group_size; no vertical");
      continue;
    }
    const DocumentSet group_docs = balanced.subset(members[group.key]);
    try {
      Vertical v;
      v.clusters = cluster_corpus(group_docs, cluster_params);
      v.index = build_index(v.clusters, group_docs, model.text);
      model.verticals.emplace(group.key, std::move(v));
      group.has_vertical = true;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Degenerate) throw;
      model.warnings.push_back("group " + group.key + ": no vertical (" + e.what() + ")");
    }
  }
  return model;
}

CascadePrediction classify(const CascadeModel& model, const Document& doc, std::size_t k) {
  if (k < 1) fail(ErrorKind::Parameter, "k must be >= 1");
  const Prediction coarse = predict(model.coarse, model.coarse_features(doc));
  CascadePrediction out;
  out.coarse_group = model.groups.at(static_cast<std::size_t>(coarse.class_id)).key;
  out.coarse_scores = coarse.scores;
  if (auto it = model.verticals.find(out.coarse_group); it != model.verticals.end())
    out.fine_titles = classify_knn(it->second.index, doc, k, model.config.min_tf, model.text);
  out.abstained = out.fine_titles.empty();
  return out;
}

void save_cascade(const CascadeModel& model, const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  files["coarse/model.txt"] = serialize_model(model.coarse);
  files["coarse/features.tsv"] = serialize_features(model.features);
  files["text/stopwords.txt"] = serialize_stopwords(model.text.stops);
  for (const auto& [key, v] : model.verticals) {
    add_prefixed(files, "verticals/" + key + "/clusters/", cluster_set_files(v.clusters));
    add_prefixed(files, "verticals/" + key + "/index/", index_files(v.index));
  }

  nlohmann::json manifest;
  manifest["format"] = kFormat;
  manifest["format_version"] = kFormatVersion;
  manifest["config"] = config_to_json(model.config);
  nlohmann::json groups = nlohmann::json::array();
  for (std::size_t i = 0; i < model.groups.size(); ++i) {
    const auto& g = model.groups[i];
    nlohmann::json entry{{"key", g.key}, {"class_id", i}, {"documents", g.documents}, {"vertical", g.has_vertical}};
    if (g.has_vertical) {
      const Vertical& v = model.verticals.at(g.key);
      entry["clusters"] = v.clusters.clusters.size();
      entry["unassigned"] = v.clusters.other_bucket.size();
    }
    groups.push_back(std::move(entry));
  }
  manifest["groups"] = std::move(groups);
  manifest["warnings"] = model.warnings;
  nlohmann::json sums = nlohmann::json::object();
  for (const auto& [path, contents] : files) sums[path] = persist::checksum_hex(contents);
  manifest["files"] = std::move(sums);

  persist::ensure_directory(dir);
  for (const char* stale : {"coarse", "text", "verticals"}) std::filesystem::remove_all(dir / stale);
  for (const auto& [path, contents] : files) persist::write_file(dir / path, contents);
  persist::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

CascadeModel load_cascade(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) fail(ErrorKind::Io, "model directory '" + dir.string() + "' not found");
  const auto manifest_path = dir / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) fail(ErrorKind::Integrity, "model has no manifest.json");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(persist::read_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Integrity, std::string("corrupted manifest: ") + e.what());
  }

  try {
    if (manifest.at("format") != kFormat || manifest.at("format_version") != kFormatVersion)
      fail(ErrorKind::Integrity, "unsupported model format");

    std::map<std::string, std::string> files;
    for (const auto& [path, sum] : manifest.at("files").items()) {
      const auto full = dir / path;
      if (!std::filesystem::is_regular_file(full)) fail(ErrorKind::Integrity, "model file missing: " + path);
      std::string contents = persist::read_file(full);
      if (persist::checksum_hex(contents) != sum.get<std::string>())
        fail(ErrorKind::Integrity, "checksum mismatch: " + path);
      files.emplace(path, std::move(contents));
    }
    auto file = [&](const std::string& path) -> const std::string& {
      auto it = files.find(path);
      if (it == files.end()) fail(ErrorKind::Integrity, "manifest does not list " + path);
      return it->second;
    };

    CascadeModel model;
    try {
      model.config = config_from_json(manifest.at("config"));
    } catch (const Error& e) {
      fail(ErrorKind::Integrity, std::string("manifest config: ") + e.what());
    }
    model.text.stops = StopList::parse(file("text/stopwords.txt"));
    model.text.exceptions = ExceptionLexicon(model.config.exceptions.begin(), model.config.exceptions.end());
    model.features = parse_features(file("coarse/features.tsv"));
    model.coarse = parse_model(file("coarse/model.txt"));
    for (const auto& w : manifest.at("warnings")) model.warnings.push_back(w.get<std::string>());

    const GroupAliases aliases = model.config.group_aliases();
    for (const auto& g : manifest.at("groups")) {
      GroupInfo info{g.at("key").get<std::string>(), g.at("documents").get<std::size_t>(), g.at("vertical").get<bool>()};
      if (!aliases.is_valid_key(info.key)) fail(ErrorKind::Integrity, "invalid group key '" + info.key + "'");
      if (g.at("class_id").get<std::size_t>() != model.groups.size()) fail(ErrorKind::Integrity, "group ids out of order");
      if (info.has_vertical) {
        const std::string base = "verticals/" + info.key + "/";
        Vertical v{parse_cluster_set_files(with_prefix(files, base + "clusters/", {"labels.tsv", "memberships.tsv", "unassigned.txt"})),
                   parse_index_files(with_prefix(files, base + "index/", {"meta_docs.tsv", "postings.tsv"}))};
        model.verticals.emplace(info.key, std::move(v));
      }
      model.groups.push_back(std::move(info));
    }
    if (model.coarse.classes.size() != model.groups.size())
      fail(ErrorKind::Integrity, "coarse model classes do not match the manifest groups");
    if (model.coarse.dim != model.features.vocab().size() + (model.config.bias ? 1 : 0))
      fail(ErrorKind::Integrity, "coarse model dimension does not match the feature vocabulary");
    return model;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Integrity, std::string("corrupted manifest: ") + e.what());
  }
}

}  // namespace jobtitle
