#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "core/corpus.hpp"
#include "core/textprep.hpp"
#include "core/vectorspace.hpp"

namespace jobtitle {

struct SvdOptions {
  double tolerance = 1e-9;  // Ritz residual, relative to the top eigenvalue
  int max_iterations = 1000;
  std::uint64_t seed = 42;
  std::size_t oversample = 8;
};

// Leading singular triplets of a |V| x n matrix. Columns are stored as
// separate dense vectors.
struct SvdResult {
  std::vector<std::vector<double>> left_vectors;   // k columns of length rows
  std::vector<std::vector<double>> right_vectors;  // k columns of length cols
  std::vector<double> singular_values;             // nonincreasing
  std::size_t rank_k = 0;
  double total_energy = 0.0;  // squared Frobenius norm of the input
  int iterations = 0;
};

// Block power iteration on A A^T with Rayleigh-Ritz extraction; converged
// leading vectors are kept while the block continues on the rest. rank_k
// is the smallest k whose singular values carry a quality_q fraction of the
// squared Frobenius norm.
SvdResult truncated_svd(const SparseMatrix& matrix, double quality_q, const SvdOptions& options = {});

struct ClusterLabel {
  std::string phrase;
  SparseVector label_vector;  // unit vector on the phrase's term
  std::size_t source_component = 0;
};

// Left-singular directions with (nearly) equal singular values span a
// subspace with no preferred basis; those groups are first rotated onto
// term-aligned directions. Each component then names the term with the
// largest absolute loading, ties going to the lexicographically smallest.
std::vector<ClusterLabel> induce_labels(const SvdResult& svd, const Vocabulary& vocab, std::size_t max_labels);

struct Cluster {
  ClusterLabel label;
  std::vector<std::string> member_ids;
  std::vector<double> similarities;
};

struct ClusterSet {
  std::vector<Cluster> clusters;
  std::vector<std::string> other_bucket;
};

// Multi-label: every document joins each cluster whose label it matches at
// cosine >= threshold.
ClusterSet assign_documents(std::span<const SparseVector> doc_vectors, std::span<const std::string> doc_ids,
                            const std::vector<ClusterLabel>& labels, double threshold);

struct ClusterParams {
  std::size_t min_title_freq = 4;
  std::size_t min_df = 2;
  double quality_q = 0.9;
  double threshold = 0.2;
  std::size_t max_labels = 100;
  std::uint64_t seed = 42;
  TextPipeline text;
};

// Title-frequency filter, then tf-idf over title terms, truncated SVD,
// label induction and threshold assignment. Clusters that attract no
// member are dropped.
ClusterSet cluster_corpus(const DocumentSet& docs, const ClusterParams& params);

using FileMap = std::map<std::string, std::string>;

// labels.tsv + memberships.tsv + unassigned.txt
FileMap cluster_set_files(const ClusterSet& clusters);
ClusterSet parse_cluster_set_files(const FileMap& files);
void save_cluster_set(const ClusterSet& clusters, const std::filesystem::path& dir);
ClusterSet load_cluster_set(const std::filesystem::path& dir);

}  // namespace jobtitle
