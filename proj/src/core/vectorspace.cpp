#include "core/vectorspace.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "core/error.hpp"

namespace jobtitle {

SparseVector SparseVector::from_unsorted(std::vector<SparseEntry> entries) {
  std::sort(entries.begin(), entries.end(), [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
  SparseVector v;
  for (const SparseEntry& e : entries) {
    if (!v.entries_.empty() && v.entries_.back().index == e.index)
      v.entries_.back().weight += e.weight;
    else
      v.entries_.push_back(e);
  }
  std::erase_if(v.entries_, [](const SparseEntry& e) { return e.weight == 0.0; });
  return v;
}

double SparseVector::norm() const {
  double sum = 0.0;
  for (const auto& e : entries_) sum += e.weight * e.weight;
  return std::sqrt(sum);
}

double SparseVector::dot(const SparseVector& other) const {
  double sum = 0.0;
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  while (a != entries_.end() && b != other.entries_.end()) {
    if (a->index < b->index) {
      ++a;
    } else if (b->index < a->index) {
      ++b;
    } else {
      sum += a->weight * b->weight;
      ++a;
      ++b;
    }
  }
  return sum;
}

double SparseVector::dot(std::span<const double> dense) const {
  double sum = 0.0;
  for (const auto& e : entries_) sum += e.weight * dense[e.index];
  return sum;
}

SparseVector SparseVector::scaled(double factor) const {
  SparseVector out;
  if (factor == 0.0) return out;
  out.entries_ = entries_;
  for (auto& e : out.entries_) e.weight *= factor;
  std::erase_if(out.entries_, [](const SparseEntry& e) { return e.weight == 0.0; });
  return out;
}

SparseVector SparseVector::normalized() const {
  const double n = norm();
  return n > 0.0 ? scaled(1.0 / n) : SparseVector{};
}

double cosine(const SparseVector& a, const SparseVector& b) {
  if (a.empty() || b.empty()) return 0.0;
  const double denom = a.norm() * b.norm();
  if (denom == 0.0) return 0.0;
  return std::clamp(a.dot(b) / denom, 0.0, 1.0);
}

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> document_frequency, std::size_t n_docs)
    : terms_(std::move(terms)), df_(std::move(document_frequency)), n_docs_(n_docs) {
  if (terms_.size() != df_.size()) fail(ErrorKind::Validation, "vocabulary terms and frequencies differ in length");
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (i > 0 && !(terms_[i - 1] < terms_[i]))
      fail(ErrorKind::Validation, "vocabulary terms must be strictly increasing: '" + terms_[i] + "'");
    if (df_[i] < 1 || df_[i] > n_docs_)
      fail(ErrorKind::Validation, "document frequency of '" + terms_[i] + "' outside [1, n_docs]");
    index_.emplace(terms_[i], static_cast<TermId>(i));
  }
}

std::optional<TermId> Vocabulary::find(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary build_vocabulary(std::span<const TermSequence> docs, std::size_t min_df) {
  if (min_df < 1) fail(ErrorKind::Parameter, "min_df must be >= 1");
  std::map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    std::set<std::string_view> seen(doc.terms.begin(), doc.terms.end());
    for (std::string_view t : seen) ++df[std::string(t)];
  }
  std::vector<std::string> terms;
  std::vector<std::size_t> freqs;
  for (auto& [term, count] : df) {
    if (count < min_df) continue;
    terms.push_back(term);
    freqs.push_back(count);
  }
  return Vocabulary(std::move(terms), std::move(freqs), docs.size());
}

TfIdfModel::TfIdfModel(Vocabulary vocab) : vocab_(std::move(vocab)) {
  idf_.resize(vocab_.size());
  const double n = static_cast<double>(vocab_.n_docs());
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    const double df = static_cast<double>(vocab_.document_frequency(static_cast<TermId>(i)));
    idf_[i] = df == n ? 0.0 : std::log2(n / df);
  }
}

SparseVector tfidf_vector(const TermSequence& doc, const TfIdfModel& model) {
  std::map<std::string_view, std::size_t> counts;
  for (const auto& t : doc.terms) ++counts[t];
  std::size_t max_count = 0;
  for (const auto& [term, c] : counts) max_count = std::max(max_count, c);

  std::vector<SparseEntry> entries;
  for (const auto& [term, c] : counts) {
    auto id = model.vocab().find(term);
    if (!id) continue;
    const double w = static_cast<double>(c) / static_cast<double>(max_count) * model.idf(*id);
    if (w != 0.0) entries.push_back({*id, w});
  }
  return SparseVector::from_unsorted(std::move(entries));
}

bool SparseMatrix::is_zero() const {
  return std::all_of(columns.begin(), columns.end(), [](const SparseVector& c) { return c.empty(); });
}

double SparseMatrix::frobenius_norm_squared() const {
  double sum = 0.0;
  for (const auto& c : columns)
    for (const auto& e : c.entries()) sum += e.weight * e.weight;
  return sum;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const double xj = x[j];
    if (xj == 0.0) continue;
    for (const auto& e : columns[j].entries()) y[e.index] += e.weight * xj;
  }
}

void SparseMatrix::multiply_transposed(std::span<const double> x, std::span<double> y) const {
  for (std::size_t j = 0; j < columns.size(); ++j) y[j] = columns[j].dot(x);
}

SparseMatrix term_document_matrix(std::span<const TermSequence> docs, const TfIdfModel& model) {
  SparseMatrix m;
  m.rows = model.vocab().size();
  m.columns.reserve(docs.size());
  for (const auto& doc : docs) m.columns.push_back(tfidf_vector(doc, model).normalized());
  return m;
}

}  // namespace jobtitle
