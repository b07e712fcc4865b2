#include "core/title_cluster.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "core/error.hpp"
#include "core/persist.hpp"
#include "core/rng.hpp"

namespace jobtitle {

namespace {

using Column = std::vector<double>;
using Block = std::vector<Column>;

double dot(const Column& a, const Column& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Column& a) { return std::sqrt(dot(a, a)); }

Column random_column(std::size_t d, Rng& rng) {
  Column c(d);
  for (double& x : c) x = uniform_signed(rng);
  return c;
}

// Modified Gram-Schmidt, two passes. Columns that collapse (null space of
// the operator, or exact dependence) are replaced by fresh random ones.
void orthonormalize(Block& q, Rng& rng) {
  const std::size_t d = q.empty() ? 0 : q.front().size();
  for (std::size_t j = 0; j < q.size(); ++j) {
    for (int attempt = 0;; ++attempt) {
      const double before = norm(q[j]);
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t i = 0; i < j; ++i) {
          const double r = dot(q[i], q[j]);
          for (std::size_t t = 0; t < d; ++t) q[j][t] -= r * q[i][t];
        }
      const double after = norm(q[j]);
      if (before > 0.0 && after > 1e-10 * before) {
        for (double& x : q[j]) x /= after;
        break;
      }
      if (attempt > 16) fail(ErrorKind::Convergence, "cannot extend orthonormal basis");
      q[j] = random_column(d, rng);
    }
  }
}

// Cyclic Jacobi on a dense symmetric matrix (row-major, n x n). Returns
// eigenvalues in descending order with matching eigenvector columns.
void symmetric_eigen(std::vector<double> a, std::size_t n, std::vector<double>& values, Block& vectors) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  auto at = [n](std::vector<double>& m, std::size_t r, std::size_t c) -> double& { return m[r * n + c]; };

  double scale = 0.0;
  for (double x : a) scale += x * x;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += at(a, p, q) * at(a, p, q);
    if (off <= 1e-30 * scale || off == 0.0) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(a, p, q);
        if (apq == 0.0) continue;
        const double theta = (at(a, q, q) - at(a, p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = at(a, k, p), akq = at(a, k, q);
          at(a, k, p) = c * akp - s * akq;
          at(a, k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = at(a, p, k), aqk = at(a, q, k);
          at(a, p, k) = c * apk - s * aqk;
          at(a, q, k) = s * apk + c * aqk;
        }
        at(a, p, q) = at(a, q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = at(v, k, p), vkq = at(v, k, q);
          at(v, k, p) = c * vkp - s * vkq;
          at(v, k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return at(a, x, x) > at(a, y, y); });
  values.assign(n, 0.0);
  vectors.assign(n, Column(n));
  for (std::size_t j = 0; j < n; ++j) {
    values[j] = at(a, order[j], order[j]);
    for (std::size_t k = 0; k < n; ++k) vectors[j][k] = at(v, k, order[j]);
  }
}

// out_j = sum_i block_i * coeffs[j][i]
Block combine(const Block& block, const Block& coeffs) {
  const std::size_t d = block.empty() ? 0 : block.front().size();
  Block out(coeffs.size(), Column(d, 0.0));
  for (std::size_t j = 0; j < coeffs.size(); ++j)
    for (std::size_t i = 0; i < block.size(); ++i) {
      const double w = coeffs[j][i];
      if (w == 0.0) continue;
      for (std::size_t t = 0; t < d; ++t) out[j][t] += w * block[i][t];
    }
  return out;
}

// Smallest k with sum_{i<k} values_i >= q * total (tiny slack for rounding);
// returns values.size() + 1 when the block does not carry enough energy.
std::size_t rank_for_quality(const std::vector<double>& values, double q, double total) {
  const double target = q * total - 1e-10 * total;
  double cum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    cum += std::max(values[i], 0.0);
    if (cum >= target) return i + 1;
  }
  return values.size() + 1;
}

// Rotates an orthonormal group of columns onto directions aligned with the
// term rows carrying the most weight in the group's subspace.
Block canonical_basis(Block group) {
  Block out;
  const std::size_t m = group.front().size();
  while (!group.empty()) {
    const std::size_t c = group.size();
    std::vector<double> row_norm(m, 0.0);
    double best = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
      for (std::size_t j = 0; j < c; ++j) row_norm[t] += group[j][t] * group[j][t];
      best = std::max(best, row_norm[t]);
    }
    std::size_t pivot = 0;
    while (row_norm[pivot] < best * (1.0 - 1e-9)) ++pivot;

    Column g(c);
    const double gnorm = std::sqrt(row_norm[pivot]);
    for (std::size_t j = 0; j < c; ++j) g[j] = group[j][pivot] / gnorm;

    Column h = g;
    h[0] -= 1.0;
    const double hh = dot(h, h);
    Block rotated;
    if (hh < 1e-30) {
      rotated = std::move(group);
    } else {
      // Householder reflection swapping g and e_0.
      rotated = group;
      for (std::size_t t = 0; t < m; ++t) {
        double proj = 0.0;
        for (std::size_t j = 0; j < c; ++j) proj += group[j][t] * h[j];
        for (std::size_t j = 0; j < c; ++j) rotated[j][t] -= 2.0 * proj * h[j] / hh;
      }
    }
    out.push_back(std::move(rotated.front()));
    rotated.erase(rotated.begin());
    group = std::move(rotated);
  }
  return out;
}

SparseMatrix term_frequency_matrix(std::span<const TermSequence> docs, const Vocabulary& vocab) {
  SparseMatrix m;
  m.rows = vocab.size();
  for (const auto& doc : docs) {
    std::map<std::string_view, std::size_t> counts;
    std::size_t max_count = 0;
    for (const auto& t : doc.terms) max_count = std::max(max_count, ++counts[t]);
    std::vector<SparseEntry> entries;
    for (const auto& [term, c] : counts)
      if (auto id = vocab.find(term)) entries.push_back({*id, static_cast<double>(c) / static_cast<double>(max_count)});
    m.columns.push_back(SparseVector::from_unsorted(std::move(entries)).normalized());
  }
  return m;
}

}  // namespace

SvdResult truncated_svd(const SparseMatrix& matrix, double quality_q, const SvdOptions& options) {
  if (!(quality_q > 0.0 && quality_q <= 1.0)) fail(ErrorKind::Parameter, "quality_q must lie in (0, 1]");
  const double total = matrix.frobenius_norm_squared();
  if (matrix.rows == 0 || matrix.cols() == 0 || total == 0.0)
    fail(ErrorKind::Degenerate, "truncated SVD of a zero matrix");

  const std::size_t d = matrix.rows;
  Rng rng(options.seed);
  std::size_t p = std::min(d, std::max<std::size_t>(2 * options.oversample, 1));

  Block q;
  for (std::size_t j = 0; j < p; ++j) q.push_back(random_column(d, rng));
  orthonormalize(q, rng);

  Column scratch(matrix.cols());
  auto apply = [&](const Column& x) {
    Column y(d);
    matrix.multiply_transposed(x, scratch);
    matrix.multiply(scratch, y);
    return y;
  };

  double last_residual = 0.0;
  for (int it = 1; it <= options.max_iterations; ++it) {
    Block z;
    z.reserve(p);
    for (const auto& col : q) z.push_back(apply(col));

    std::vector<double> h(p * p);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i; j < p; ++j) h[i * p + j] = h[j * p + i] = 0.5 * (dot(q[i], z[j]) + dot(q[j], z[i]));
    std::vector<double> lambda;
    Block w;
    symmetric_eigen(std::move(h), p, lambda, w);
    Block ritz = combine(q, w);
    Block image = combine(z, w);

    std::size_t k = rank_for_quality(lambda, quality_q, total);
    if (k > p && p == d) k = p;
    if (p < d && (k > p || k + options.oversample > p)) {
      const std::size_t grown = std::min(d, std::max(2 * p, std::min(k, p) + options.oversample));
      q = std::move(image);
      while (q.size() < grown) q.push_back(random_column(d, rng));
      orthonormalize(q, rng);
      p = grown;
      continue;
    }

    const double scale = std::max(lambda.front(), 0.0);
    last_residual = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      Column r = image[i];
      for (std::size_t t = 0; t < d; ++t) r[t] -= lambda[i] * ritz[i][t];
      last_residual = std::max(last_residual, norm(r));
    }
    if (last_residual <= options.tolerance * scale) {
      SvdResult result;
      result.total_energy = total;
      result.iterations = it;
      struct Triplet {
        double sigma;
        Column u, v;
      };
      std::vector<Triplet> triplets;
      for (std::size_t i = 0; i < k; ++i) {
        Column v(matrix.cols());
        matrix.multiply_transposed(ritz[i], v);
        const double sigma = norm(v);
        if (sigma == 0.0) break;
        for (double& x : v) x /= sigma;
        triplets.push_back({sigma, std::move(ritz[i]), std::move(v)});
      }
      std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) { return a.sigma > b.sigma; });
      for (auto& tr : triplets) {
        result.singular_values.push_back(tr.sigma);
        result.left_vectors.push_back(std::move(tr.u));
        result.right_vectors.push_back(std::move(tr.v));
      }
      result.rank_k = result.singular_values.size();
      return result;
    }
    q = std::move(image);
    orthonormalize(q, rng);
  }
  fail(ErrorKind::Convergence, "truncated SVD did not converge in " + std::to_string(options.max_iterations) +
                                   " iterations (residual " + persist::format_double(last_residual) + ")");
}

std::vector<ClusterLabel> induce_labels(const SvdResult& svd, const Vocabulary& vocab, std::size_t max_labels) {
  if (vocab.empty()) fail(ErrorKind::Degenerate, "cannot induce labels over an empty vocabulary");
  const std::size_t k = std::min(svd.rank_k, svd.left_vectors.size());
  for (std::size_t i = 0; i < k; ++i)
    if (svd.left_vectors[i].size() != vocab.size())
      fail(ErrorKind::Parameter, "left-singular vectors do not match the vocabulary size");

  Block basis;
  const double top = k ? svd.singular_values.front() : 0.0;
  for (std::size_t start = 0; start < k;) {
    std::size_t end = start + 1;
    while (end < k && svd.singular_values[start] - svd.singular_values[end] <= 1e-6 * top) ++end;
    Block group(svd.left_vectors.begin() + static_cast<std::ptrdiff_t>(start),
                svd.left_vectors.begin() + static_cast<std::ptrdiff_t>(end));
    if (group.size() > 1) group = canonical_basis(std::move(group));
    for (auto& col : group) basis.push_back(std::move(col));
    start = end;
  }

  std::vector<ClusterLabel> labels;
  const std::size_t count = std::min(k, max_labels);
  for (std::size_t comp = 0; comp < count; ++comp) {
    const Column& u = basis[comp];
    double best = 0.0;
    for (double x : u) best = std::max(best, std::fabs(x));
    if (best == 0.0) continue;
    TermId term = 0;
    while (std::fabs(u[term]) < best * (1.0 - 1e-9)) ++term;
    const std::string& phrase = vocab.term(term);
    if (std::any_of(labels.begin(), labels.end(), [&](const ClusterLabel& l) { return l.phrase == phrase; })) continue;
    labels.push_back({phrase, SparseVector::from_unsorted({{term, 1.0}}), comp});
  }
  return labels;
}

ClusterSet assign_documents(std::span<const SparseVector> doc_vectors, std::span<const std::string> doc_ids,
                            const std::vector<ClusterLabel>& labels, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) fail(ErrorKind::Parameter, "assignment threshold must lie in (0, 1]");
  if (doc_vectors.size() != doc_ids.size()) fail(ErrorKind::Parameter, "document vectors and ids differ in length");
  ClusterSet out;
  for (const auto& label : labels) out.clusters.push_back({label, {}, {}});
  for (std::size_t d = 0; d < doc_vectors.size(); ++d) {
    bool placed = false;
    for (auto& cluster : out.clusters) {
      const double sim = cosine(doc_vectors[d], cluster.label.label_vector);
      if (sim >= threshold) {
        cluster.member_ids.push_back(doc_ids[d]);
        cluster.similarities.push_back(sim);
        placed = true;
      }
    }
    if (!placed) out.other_bucket.push_back(doc_ids[d]);
  }
  return out;
}

ClusterSet cluster_corpus(const DocumentSet& docs, const ClusterParams& params) {
  if (docs.empty()) fail(ErrorKind::Degenerate, "cannot cluster an empty corpus");
  if (params.min_title_freq < 1) fail(ErrorKind::Parameter, "min_title_freq must be >= 1");

  std::map<std::string, std::size_t> title_counts;
  std::vector<std::string> normalized;
  normalized.reserve(docs.size());
  for (const auto& d : docs.docs()) {
    normalized.push_back(normalize(d.title, params.text.exceptions));
    ++title_counts[normalized.back()];
  }
  const std::set<std::string> frequent = min_count_filter(title_counts, params.min_title_freq);

  std::vector<TermSequence> terms;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!frequent.count(normalized[i])) continue;
    terms.push_back(ngrams(tokenize(normalized[i], params.text.stops), params.text.max_n));
    terms.back().source_id = docs[i].id;
    ids.push_back(docs[i].id);
  }
  if (terms.empty())
    fail(ErrorKind::Degenerate, "no title occurs at least " + std::to_string(params.min_title_freq) + " times");

  Vocabulary vocab = build_vocabulary(terms, params.min_df);
  if (vocab.empty()) fail(ErrorKind::Degenerate, "no title term reaches min_df " + std::to_string(params.min_df));
  TfIdfModel model(vocab);
  SparseMatrix matrix = term_document_matrix(terms, model);
  // Every term in every title: idf is zero throughout, fall back to tf.
  if (matrix.is_zero()) matrix = term_frequency_matrix(terms, vocab);
  if (matrix.is_zero()) fail(ErrorKind::Degenerate, "all surviving titles are empty after preprocessing");

  SvdOptions svd_options;
  svd_options.seed = params.seed;
  const SvdResult svd = truncated_svd(matrix, params.quality_q, svd_options);
  const auto labels = induce_labels(svd, model.vocab(), params.max_labels);

  ClusterSet out = assign_documents(matrix.columns, ids, labels, params.threshold);
  std::erase_if(out.clusters, [](const Cluster& c) { return c.member_ids.empty(); });
  return out;
}

namespace {

const std::string& required(const FileMap& files, const std::string& name) {
  auto it = files.find(name);
  if (it == files.end()) fail(ErrorKind::Integrity, "missing " + name);
  return it->second;
}

}  // namespace

FileMap cluster_set_files(const ClusterSet& clusters) {
  std::string labels = "# label_id\tcomponent\tterm_index\tphrase\n";
  std::string members = "# doc_id\tlabel_id\tsimilarity\n";
  for (std::size_t i = 0; i < clusters.clusters.size(); ++i) {
    const Cluster& c = clusters.clusters[i];
    const auto& entries = c.label.label_vector.entries();
    const std::size_t term_index = entries.empty() ? 0 : entries.front().index;
    labels += std::to_string(i) + '\t' + std::to_string(c.label.source_component) + '\t' + std::to_string(term_index) +
              '\t' + c.label.phrase + '\n';
    for (std::size_t m = 0; m < c.member_ids.size(); ++m)
      members += c.member_ids[m] + '\t' + std::to_string(i) + '\t' + persist::format_double(c.similarities[m]) + '\n';
  }
  std::string other;
  for (const auto& id : clusters.other_bucket) other += id + '\n';
  return {{"labels.tsv", labels}, {"memberships.tsv", members}, {"unassigned.txt", other}};
}

ClusterSet parse_cluster_set_files(const FileMap& files) {
  ClusterSet out;
  for (std::string_view line : persist::lines(required(files, "labels.tsv"))) {
    if (line.empty() || line.front() == '#') continue;
    auto f = persist::split(line, '\t');
    if (f.size() != 4 || persist::parse_size(f[0]) != out.clusters.size())
      fail(ErrorKind::Integrity, "malformed labels.tsv line: " + std::string(line));
    Cluster c;
    c.label.source_component = persist::parse_size(f[1]);
    c.label.label_vector = SparseVector::from_unsorted({{static_cast<TermId>(persist::parse_size(f[2])), 1.0}});
    c.label.phrase = std::string(f[3]);
    out.clusters.push_back(std::move(c));
  }
  for (std::string_view line : persist::lines(required(files, "memberships.tsv"))) {
    if (line.empty() || line.front() == '#') continue;
    auto f = persist::split(line, '\t');
    if (f.size() != 3) fail(ErrorKind::Integrity, "malformed memberships.tsv line: " + std::string(line));
    const std::size_t label = persist::parse_size(f[1]);
    if (label >= out.clusters.size()) fail(ErrorKind::Integrity, "membership references unknown label");
    out.clusters[label].member_ids.emplace_back(f[0]);
    out.clusters[label].similarities.push_back(persist::parse_double(f[2]));
  }
  for (std::string_view line : persist::lines(required(files, "unassigned.txt")))
    if (!line.empty()) out.other_bucket.emplace_back(line);
  return out;
}

void save_cluster_set(const ClusterSet& clusters, const std::filesystem::path& dir) {
  persist::ensure_directory(dir);
  for (const auto& [name, contents] : cluster_set_files(clusters)) persist::write_file(dir / name, contents);
}

ClusterSet load_cluster_set(const std::filesystem::path& dir) {
  FileMap files;
  for (const char* name : {"labels.tsv", "memberships.tsv", "unassigned.txt"}) files[name] = persist::read_file(dir / name);
  return parse_cluster_set_files(files);
}

}  // namespace jobtitle
