#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "core/textprep.hpp"

namespace jobtitle {

using TermId = std::uint32_t;

struct SparseEntry {
  TermId index;
  double weight;
  bool operator==(const SparseEntry&) const = default;
};

// Entries sorted by strictly increasing index, no stored zeros.
class SparseVector {
 public:
  SparseVector() = default;
  // Sorts, merges duplicate indices by summation and drops zeros.
  static SparseVector from_unsorted(std::vector<SparseEntry> entries);

  const std::vector<SparseEntry>& entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  double norm() const;
  double dot(const SparseVector& other) const;
  double dot(std::span<const double> dense) const;
  // Largest index + 1, or 0 when empty.
  std::size_t extent() const { return entries_.empty() ? 0 : entries_.back().index + 1; }

  SparseVector scaled(double factor) const;
  SparseVector normalized() const;

  bool operator==(const SparseVector&) const = default;

 private:
  std::vector<SparseEntry> entries_;
};

double cosine(const SparseVector& a, const SparseVector& b);

// Terms indexed in lexicographic order.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> document_frequency, std::size_t n_docs);

  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  std::size_t n_docs() const { return n_docs_; }
  const std::string& term(TermId id) const { return terms_[id]; }
  const std::vector<std::string>& terms() const { return terms_; }
  std::size_t document_frequency(TermId id) const { return df_[id]; }
  const std::vector<std::size_t>& document_frequencies() const { return df_; }
  std::optional<TermId> find(std::string_view term) const;

 private:
  std::vector<std::string> terms_;
  std::vector<std::size_t> df_;
  std::size_t n_docs_ = 0;
  std::unordered_map<std::string, TermId> index_;
};

// Keeps exactly the terms present in at least min_df distinct documents.
Vocabulary build_vocabulary(std::span<const TermSequence> docs, std::size_t min_df = 2);

class TfIdfModel {
 public:
  TfIdfModel() = default;
  // idf = log2(n_docs / df).
  explicit TfIdfModel(Vocabulary vocab);

  const Vocabulary& vocab() const { return vocab_; }
  double idf(TermId id) const { return idf_[id]; }
  const std::vector<double>& idf_table() const { return idf_; }

 private:
  Vocabulary vocab_;
  std::vector<double> idf_;
};

// weight(t) = count(t) / max_count(doc) * idf(t); out-of-vocabulary terms
// are ignored but still count towards max_count.
SparseVector tfidf_vector(const TermSequence& doc, const TfIdfModel& model);

// Column-major sparse matrix; each column is a SparseVector over rows.
struct SparseMatrix {
  std::size_t rows = 0;
  std::vector<SparseVector> columns;

  std::size_t cols() const { return columns.size(); }
  bool is_zero() const;
  double frobenius_norm_squared() const;
  // y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  // y = A^T x
  void multiply_transposed(std::span<const double> x, std::span<double> y) const;
};

// Columns are tfidf vectors scaled to unit length (zero columns stay zero).
SparseMatrix term_document_matrix(std::span<const TermSequence> docs, const TfIdfModel& model);

}  // namespace jobtitle
