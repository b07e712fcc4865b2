#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/corpus.hpp"
#include "core/textprep.hpp"
#include "core/title_cluster.hpp"

namespace jobtitle {

// Aggregated title-term profile of one cluster.
struct MetaDocument {
  std::string label;
  std::map<std::string, std::size_t> term_counts;
};

struct QueryTerm {
  std::string term;
  double weight;
};

// Deduplicated, sorted by term, all weights > 0.
struct Query {
  std::vector<QueryTerm> terms;
  bool empty() const { return terms.empty(); }
};

struct ScoredLabel {
  std::string label;
  double score;
  bool operator==(const ScoredLabel&) const = default;
};

// Inverted index over meta-documents. Meta-document vectors weight each
// term by raw count times idf; idf is fixed when the index is built.
class ProximityIndex {
 public:
  struct Posting {
    std::uint32_t meta;
    std::size_t tf;
    bool operator==(const Posting&) const = default;
  };

  ProximityIndex() = default;

  // idf = log2(M / df) over the M meta-documents unless the term appears
  // in frozen_idf, whose value is used verbatim.
  static ProximityIndex build(std::vector<MetaDocument> metas,
                              const std::map<std::string, double>* frozen_idf = nullptr);

  std::size_t size() const { return metas_.size(); }
  const std::vector<MetaDocument>& meta_documents() const { return metas_; }
  const std::vector<std::string>& terms() const { return terms_; }
  std::optional<std::uint32_t> term_id(std::string_view term) const;
  double idf(std::uint32_t term) const { return idf_[term]; }
  std::size_t document_frequency(std::uint32_t term) const { return postings_[term].size(); }
  const std::vector<Posting>& postings(std::uint32_t term) const { return postings_[term]; }
  double meta_norm(std::size_t meta) const { return norms_[meta]; }
  std::map<std::string, double> idf_table() const;

  // Top min(k, size) labels with positive cosine to the query, by
  // descending score then label.
  std::vector<ScoredLabel> rank(const Query& query, std::size_t k) const;

 private:
  std::vector<MetaDocument> metas_;
  std::vector<std::string> terms_;
  std::map<std::string, std::uint32_t, std::less<>> term_ids_;
  std::vector<std::vector<Posting>> postings_;
  std::vector<double> idf_;
  std::vector<double> norms_;
};

ProximityIndex build_index(const ClusterSet& clusters, const DocumentSet& docs, const TextPipeline& text = {});

// Title terms with in-document count >= min_tf that the index knows and
// that carry nonzero idf, weighted by count * idf.
Query build_query(const Document& doc, const ProximityIndex& index, std::size_t min_tf, const TextPipeline& text = {});

std::vector<ScoredLabel> classify_knn(const ProximityIndex& index, const Document& doc, std::size_t k,
                                      std::size_t min_tf, const TextPipeline& text = {});

// meta_docs.tsv + postings.tsv
FileMap index_files(const ProximityIndex& index);
// Rebuilds the index with the stored idf and checks the stored postings
// against it.
ProximityIndex parse_index_files(const FileMap& files);
void save_index(const ProximityIndex& index, const std::filesystem::path& dir);
ProximityIndex load_index(const std::filesystem::path& dir);

}  // namespace jobtitle
