#include "core/proximity_knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "core/error.hpp"
#include "core/persist.hpp"

namespace jobtitle {

ProximityIndex ProximityIndex::build(std::vector<MetaDocument> metas, const std::map<std::string, double>* frozen_idf) {
  ProximityIndex index;
  index.metas_ = std::move(metas);

  std::set<std::string> vocabulary;
  for (const auto& m : index.metas_)
    for (const auto& [term, count] : m.term_counts)
      if (count > 0) vocabulary.insert(term);
  index.terms_.assign(vocabulary.begin(), vocabulary.end());
  for (std::uint32_t i = 0; i < index.terms_.size(); ++i) index.term_ids_.emplace(index.terms_[i], i);

  index.postings_.assign(index.terms_.size(), {});
  for (std::uint32_t meta = 0; meta < index.metas_.size(); ++meta)
    for (const auto& [term, count] : index.metas_[meta].term_counts)
      if (count > 0) index.postings_[index.term_ids_.find(term)->second].push_back({meta, count});

  const double n = static_cast<double>(index.metas_.size());
  index.idf_.resize(index.terms_.size());
  for (std::uint32_t t = 0; t < index.terms_.size(); ++t) {
    if (frozen_idf) {
      if (auto it = frozen_idf->find(index.terms_[t]); it != frozen_idf->end()) {
        index.idf_[t] = it->second;
        continue;
      }
    }
    const double df = static_cast<double>(index.postings_[t].size());
    index.idf_[t] = df == n ? 0.0 : std::log2(n / df);
  }

  // Norms summed in term order so that scores are reproducible bit for bit.
  std::vector<double> sums(index.metas_.size(), 0.0);
  for (std::uint32_t t = 0; t < index.terms_.size(); ++t)
    for (const auto& p : index.postings_[t]) {
      const double w = static_cast<double>(p.tf) * index.idf_[t];
      sums[p.meta] += w * w;
    }
  index.norms_.resize(sums.size());
  std::transform(sums.begin(), sums.end(), index.norms_.begin(), [](double s) { return std::sqrt(s); });
  return index;
}

std::optional<std::uint32_t> ProximityIndex::term_id(std::string_view term) const {
  auto it = term_ids_.find(term);
  if (it == term_ids_.end()) return std::nullopt;
  return it->second;
}

std::map<std::string, double> ProximityIndex::idf_table() const {
  std::map<std::string, double> table;
  for (std::uint32_t t = 0; t < terms_.size(); ++t) table.emplace(terms_[t], idf_[t]);
  return table;
}

std::vector<ScoredLabel> ProximityIndex::rank(const Query& query, std::size_t k) const {
  if (k < 1) fail(ErrorKind::Parameter, "k must be >= 1");
  if (query.empty()) return {};

  std::vector<double> acc(metas_.size(), 0.0);
  std::vector<char> touched(metas_.size(), 0);
  double qsum = 0.0;
  for (const auto& qt : query.terms) {
    qsum += qt.weight * qt.weight;
    auto id = term_id(qt.term);
    if (!id) continue;
    for (const auto& p : postings_[*id]) {
      acc[p.meta] += qt.weight * (static_cast<double>(p.tf) * idf_[*id]);
      touched[p.meta] = 1;
    }
  }
  const double qnorm = std::sqrt(qsum);

  std::vector<std::pair<std::uint32_t, double>> scored;
  for (std::uint32_t m = 0; m < metas_.size(); ++m) {
    if (!touched[m] || norms_[m] == 0.0 || qnorm == 0.0) continue;
    const double score = std::clamp(acc[m] / (qnorm * norms_[m]), 0.0, 1.0);
    if (score > 0.0) scored.emplace_back(m, score);
  }
  auto better = [this](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    if (metas_[a.first].label != metas_[b.first].label) return metas_[a.first].label < metas_[b.first].label;
    return a.first < b.first;
  };
  const std::size_t top = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(top), scored.end(), better);

  std::vector<ScoredLabel> out;
  out.reserve(top);
  for (std::size_t i = 0; i < top; ++i) out.push_back({metas_[scored[i].first].label, scored[i].second});
  return out;
}

ProximityIndex build_index(const ClusterSet& clusters, const DocumentSet& docs, const TextPipeline& text) {
  if (clusters.clusters.empty()) fail(ErrorKind::Degenerate, "cannot index an empty cluster set");
  std::vector<MetaDocument> metas;
  metas.reserve(clusters.clusters.size());
  for (const auto& cluster : clusters.clusters) {
    MetaDocument meta{cluster.label.phrase, {}};
    for (const auto& id : cluster.member_ids) {
      const Document* doc = docs.find(id);
      if (!doc) fail(ErrorKind::Validation, "cluster '" + cluster.label.phrase + "' references unknown document '" + id + "'");
      for (auto& term : text.terms(doc->title).terms) ++meta.term_counts[std::move(term)];
    }
    metas.push_back(std::move(meta));
  }
  return ProximityIndex::build(std::move(metas));
}

Query build_query(const Document& doc, const ProximityIndex& index, std::size_t min_tf, const TextPipeline& text) {
  if (min_tf < 1) fail(ErrorKind::Parameter, "min_tf must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (auto& term : text.terms(doc.title).terms) ++counts[std::move(term)];
  Query q;
  for (const auto& [term, count] : counts) {
    if (count < min_tf) continue;
    auto id = index.term_id(term);
    if (!id) continue;
    const double weight = static_cast<double>(count) * index.idf(*id);
    if (weight > 0.0) q.terms.push_back({term, weight});
  }
  return q;
}

std::vector<ScoredLabel> classify_knn(const ProximityIndex& index, const Document& doc, std::size_t k,
                                      std::size_t min_tf, const TextPipeline& text) {
  if (k < 1) fail(ErrorKind::Parameter, "k must be >= 1");
  return index.rank(build_query(doc, index, min_tf, text), k);
}

FileMap index_files(const ProximityIndex& index) {
  std::string metas = "# meta_id\tlabel\tterm\tcount\n";
  for (std::size_t m = 0; m < index.size(); ++m) {
    const auto& meta = index.meta_documents()[m];
    for (const auto& [term, count] : meta.term_counts)
      metas += std::to_string(m) + '\t' + meta.label + '\t' + term + '\t' + std::to_string(count) + '\n';
  }
  std::string postings = "# term\tdf\tidf\tmeta:tf,...\n";
  for (std::uint32_t t = 0; t < index.terms().size(); ++t) {
    postings += index.terms()[t] + '\t' + std::to_string(index.document_frequency(t)) + '\t' +
                persist::format_double(index.idf(t)) + '\t';
    const auto& list = index.postings(t);
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (i) postings += ',';
      postings += std::to_string(list[i].meta) + ':' + std::to_string(list[i].tf);
    }
    postings += '\n';
  }
  return {{"meta_docs.tsv", metas}, {"postings.tsv", postings}};
}

ProximityIndex parse_index_files(const FileMap& files) {
  auto required = [&](const char* name) -> const std::string& {
    auto it = files.find(name);
    if (it == files.end()) fail(ErrorKind::Integrity, std::string("missing ") + name);
    return it->second;
  };
  std::vector<MetaDocument> metas;
  for (std::string_view line : persist::lines(required("meta_docs.tsv"))) {
    if (line.empty() || line.front() == '#') continue;
    auto f = persist::split(line, '\t');
    if (f.size() != 4) fail(ErrorKind::Integrity, "malformed meta_docs.tsv line: " + std::string(line));
    const std::size_t id = persist::parse_size(f[0]);
    if (id == metas.size()) metas.push_back({std::string(f[1]), {}});
    if (id + 1 != metas.size() || metas.back().label != f[1])
      fail(ErrorKind::Integrity, "meta_docs.tsv rows out of order at: " + std::string(line));
    metas.back().term_counts[std::string(f[2])] = persist::parse_size(f[3]);
  }

  std::map<std::string, double> idf;
  std::map<std::string, std::vector<ProximityIndex::Posting>> stored;
  for (std::string_view line : persist::lines(required("postings.tsv"))) {
    if (line.empty() || line.front() == '#') continue;
    auto f = persist::split(line, '\t');
    if (f.size() != 4) fail(ErrorKind::Integrity, "malformed postings.tsv line: " + std::string(line));
    std::string term(f[0]);
    idf[term] = persist::parse_double(f[2]);
    auto& list = stored[term];
    if (!f[3].empty())
      for (std::string_view item : persist::split(f[3], ',')) {
        auto pair = persist::split(item, ':');
        if (pair.size() != 2) fail(ErrorKind::Integrity, "malformed posting '" + std::string(item) + "'");
        list.push_back({static_cast<std::uint32_t>(persist::parse_size(pair[0])), persist::parse_size(pair[1])});
      }
    if (persist::parse_size(f[1]) != list.size())
      fail(ErrorKind::Integrity, "document frequency of '" + term + "' disagrees with its postings");
  }

  ProximityIndex index = ProximityIndex::build(std::move(metas), &idf);
  if (index.terms().size() != stored.size())
    fail(ErrorKind::Integrity, "postings.tsv and meta_docs.tsv disagree on the vocabulary");
  for (std::uint32_t t = 0; t < index.terms().size(); ++t) {
    auto it = stored.find(index.terms()[t]);
    if (it == stored.end() || it->second != index.postings(t))
      fail(ErrorKind::Integrity, "postings for '" + index.terms()[t] + "' disagree with meta_docs.tsv");
  }
  return index;
}

void save_index(const ProximityIndex& index, const std::filesystem::path& dir) {
  persist::ensure_directory(dir);
  for (const auto& [name, contents] : index_files(index)) persist::write_file(dir / name, contents);
}

ProximityIndex load_index(const std::filesystem::path& dir) {
  FileMap files;
  for (const char* name : {"meta_docs.tsv", "postings.tsv"}) files[name] = persist::read_file(dir / name);
  return parse_index_files(files);
}

}  // namespace jobtitle
