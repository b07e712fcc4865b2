#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>

#include "core/error.hpp"
#include "core/title_cluster.hpp"
#include "support/gen.hpp"

using namespace jobtitle;

namespace {

SparseMatrix from_dense(const Eigen::MatrixXd& a) {
  SparseMatrix m;
  m.rows = static_cast<std::size_t>(a.rows());
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    std::vector<SparseEntry> e;
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      if (a(r, c) != 0.0) e.push_back({static_cast<TermId>(r), a(r, c)});
    m.columns.push_back(SparseVector::from_unsorted(std::move(e)));
  }
  return m;
}

Eigen::MatrixXd random_dense(jt_test::Gen& g, Eigen::Index rows, Eigen::Index cols, double density) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      if (g.coin(density)) a(r, c) = g.uniform(-2.0, 2.0);
  if (a.isZero()) a(0, 0) = 1.0;
  return a;
}

Vocabulary vocab_of(std::vector<std::string> terms) {
  std::vector<std::size_t> df(terms.size(), 1);
  return Vocabulary(std::move(terms), std::move(df), 1);
}

std::vector<std::string> phrases(const std::vector<ClusterLabel>& labels) {
  std::vector<std::string> out;
  for (const auto& l : labels) out.push_back(l.phrase);
  return out;
}

DocumentSet titles(const std::vector<std::pair<std::string, int>>& spec) {
  std::vector<Document> docs;
  for (const auto& [title, times] : spec)
    for (int i = 0; i < times; ++i) {
      Document d;
      d.id = title + "#" + std::to_string(i);
      d.title = title;
      docs.push_back(d);
    }
  return DocumentSet(std::move(docs));
}

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("svd of the identity keeps both directions") {
  const SvdResult r = truncated_svd(from_dense(Eigen::MatrixXd::Identity(2, 2)), 1.0);
  REQUIRE(r.singular_values.size() >= 2);
  CHECK(r.singular_values[0] == doctest::Approx(1.0));
  CHECK(r.singular_values[1] == doctest::Approx(1.0));
  CHECK(r.rank_k == 2);
}

TEST_CASE("svd of diag(2,0) at q=0.9 keeps one component") {
  Eigen::MatrixXd a(2, 2);
  a << 2, 0, 0, 0;
  const SvdResult r = truncated_svd(from_dense(a), 0.9);
  CHECK(r.singular_values[0] == doctest::Approx(2.0));
  CHECK(r.rank_k == 1);
  CHECK(r.total_energy == doctest::Approx(4.0));
}

TEST_CASE("svd errors") {
  SparseMatrix zero;
  zero.rows = 3;
  zero.columns.resize(2);
  CHECK_THROWS_WITH_AS(truncated_svd(zero, 0.9), doctest::Contains("zero"), Error);
  const SparseMatrix one = from_dense(Eigen::MatrixXd::Identity(2, 2));
  CHECK_THROWS_AS(truncated_svd(one, 0.0), Error);
  CHECK_THROWS_AS(truncated_svd(one, 1.5), Error);
  try {
    truncated_svd(zero, 0.9);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Degenerate);
  }
}

TEST_CASE("property: svd matches a dense decomposition on small matrices") {
  jt_test::Gen g(31);
  for (int round = 0; round < 60; ++round) {
    const auto rows = static_cast<Eigen::Index>(g.between(1, 8));
    const auto cols = static_cast<Eigen::Index>(g.between(1, 8));
    const Eigen::MatrixXd a = random_dense(g, rows, cols, 0.6);
    const double q = g.uniform(0.3, 1.0);
    const SvdResult r = truncated_svd(from_dense(a), q);

    Eigen::JacobiSVD<Eigen::MatrixXd> oracle(a);
    const Eigen::VectorXd s = oracle.singularValues();
    const std::size_t k = r.rank_k;
    REQUIRE(k >= 1);
    REQUIRE(r.left_vectors.size() >= k);
    for (std::size_t i = 0; i < k; ++i) CHECK(r.singular_values[i] == doctest::Approx(s(Eigen::Index(i))).epsilon(1e-8));
    for (std::size_t i = 1; i < r.singular_values.size(); ++i) CHECK(r.singular_values[i] <= r.singular_values[i - 1]);

    // rank_k is the smallest prefix carrying a q share of the energy.
    const double total = s.squaredNorm();
    double prefix = 0.0;
    std::size_t expect_k = 0;
    while (expect_k < static_cast<std::size_t>(s.size()) && prefix < q * total * (1.0 - 1e-10))
      prefix += s(Eigen::Index(expect_k)) * s(Eigen::Index(expect_k)), ++expect_k;
    CHECK(k == expect_k);

    Eigen::MatrixXd u(rows, Eigen::Index(k)), v(cols, Eigen::Index(k));
    for (std::size_t i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < rows; ++j) u(j, Eigen::Index(i)) = r.left_vectors[i][std::size_t(j)];
      for (Eigen::Index j = 0; j < cols; ++j) v(j, Eigen::Index(i)) = r.right_vectors[i][std::size_t(j)];
    }
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(Eigen::Index(k), Eigen::Index(k));
    CHECK((u.transpose() * u - eye).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((v.transpose() * v - eye).cwiseAbs().maxCoeff() < 1e-6);
    Eigen::VectorXd sigma(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) sigma(Eigen::Index(i)) = r.singular_values[i];
    const double residual = (a - u * sigma.asDiagonal() * v.transpose()).squaredNorm();
    const double tail = s.tail(s.size() - Eigen::Index(k)).squaredNorm();
    CHECK(std::abs(residual - tail) < 1e-6);
  }
}

TEST_CASE("labels follow axis-aligned components in component order") {
  const Vocabulary v = vocab_of({"java", "nurse"});
  SvdResult svd;
  svd.left_vectors = {{0.0, 1.0}, {1.0, 0.0}};
  svd.singular_values = {2.0, 1.0};
  svd.rank_k = 2;
  CHECK(phrases(induce_labels(svd, v, 10)) == std::vector<std::string>{"nurse", "java"});
  CHECK(phrases(induce_labels(svd, v, 1)) == std::vector<std::string>{"nurse"});
}

TEST_CASE("labels deduplicate, pick bigrams and break ties lexicographically") {
  const Vocabulary v = vocab_of({"developer", "java", "java developer", "nurse"});
  SvdResult dup;
  dup.left_vectors = {{0, 0, 0, 1.0}, {0.6, 0, 0, 0.8}};
  dup.singular_values = {3.0, 1.0};
  dup.rank_k = 2;
  const auto labels = induce_labels(dup, v, 10);
  CHECK(phrases(labels) == std::vector<std::string>{"nurse"});
  CHECK(labels[0].source_component == 0);
  CHECK(labels[0].label_vector.norm() == doctest::Approx(1.0));

  SvdResult bigram;
  bigram.left_vectors = {{0.3, -0.4, -0.866, 0.0}};
  bigram.singular_values = {1.0};
  bigram.rank_k = 1;
  CHECK(phrases(induce_labels(bigram, v, 10)) == std::vector<std::string>{"java developer"});

  SvdResult tie;
  const double h = std::sqrt(0.5);
  tie.left_vectors = {{0.0, h, 0.0, -h}};
  tie.singular_values = {1.0};
  tie.rank_k = 1;
  CHECK(phrases(induce_labels(tie, v, 10)) == std::vector<std::string>{"java"});

  CHECK_THROWS_AS(induce_labels(tie, Vocabulary(), 10), Error);
}

TEST_CASE("equal singular values do not depend on the basis returned") {
  const Vocabulary v = vocab_of({"a", "b", "c"});
  SvdResult rotated;
  const double h = std::sqrt(0.5);
  // Span{e_a, e_c} presented in a 45-degree rotated basis.
  rotated.left_vectors = {{h, 0.0, h}, {h, 0.0, -h}};
  rotated.singular_values = {1.0, 1.0};
  rotated.rank_k = 2;
  CHECK(sorted(phrases(induce_labels(rotated, v, 10))) == std::vector<std::string>{"a", "c"});
}

TEST_CASE("assignment by cosine threshold") {
  const ClusterLabel x{"x", SparseVector::from_unsorted({{0, 1.0}}), 0};
  const ClusterLabel y{"y", SparseVector::from_unsorted({{1, 1.0}}), 1};
  const std::vector<SparseVector> docs = {SparseVector::from_unsorted({{0, 1.0}}),
                                          SparseVector::from_unsorted({{2, 1.0}}),
                                          SparseVector::from_unsorted({{0, 0.8}, {1, 0.8}, {2, 0.2}})};
  const std::vector<std::string> ids = {"same", "orthogonal", "both"};

  const ClusterSet s = assign_documents(docs, ids, {x, y}, 0.5);
  REQUIRE(s.clusters.size() == 2);
  CHECK(s.clusters[0].member_ids == std::vector<std::string>{"same", "both"});
  CHECK(s.clusters[0].similarities[0] == doctest::Approx(1.0));
  CHECK(s.clusters[1].member_ids == std::vector<std::string>{"both"});
  CHECK(s.other_bucket == std::vector<std::string>{"orthogonal"});

  // cos = 0.8 / sqrt(0.8^2 + 0.8^2 + 0.2^2) = 0.686 against either label.
  const ClusterSet tight = assign_documents(docs, ids, {x, y}, 0.7);
  CHECK(tight.clusters[1].member_ids.empty());

  const std::vector<SparseVector> equal = {SparseVector::from_unsorted({{0, 0.8}, {1, 0.8}})};
  const ClusterSet multi = assign_documents(equal, std::vector<std::string>{"d"}, {x, y}, 0.7);
  CHECK(multi.clusters[0].member_ids.size() == 1);
  CHECK(multi.clusters[1].member_ids.size() == 1);

  const ClusterSet none = assign_documents(docs, ids, {}, 0.5);
  CHECK(none.other_bucket.size() == 3);
  CHECK_THROWS_AS(assign_documents(docs, ids, {x}, 0.0), Error);
  CHECK_THROWS_AS(assign_documents(docs, ids, {x}, 1.1), Error);
}

TEST_CASE("property: assignment respects the threshold and is anti-monotone") {
  jt_test::Gen g(41);
  for (int round = 0; round < 200; ++round) {
    std::vector<SparseVector> docs;
    std::vector<std::string> ids;
    for (std::size_t d = g.between(1, 15); d > 0; --d) {
      std::vector<SparseEntry> e;
      for (std::size_t k = g.between(0, 4); k > 0; --k) e.push_back({static_cast<TermId>(g.index(6)), g.uniform(0.1, 1)});
      docs.push_back(SparseVector::from_unsorted(std::move(e)));
      ids.push_back("d" + std::to_string(d));
    }
    std::vector<ClusterLabel> labels;
    for (TermId t = 0; t < 6; ++t)
      if (g.coin()) labels.push_back({"t" + std::to_string(t), SparseVector::from_unsorted({{t, 1.0}}), t});
    const double lo = g.uniform(0.05, 0.9);
    const double hi = std::min(1.0, lo + g.uniform(0.0, 0.5));
    const ClusterSet a = assign_documents(docs, ids, labels, lo);
    const ClusterSet b = assign_documents(docs, ids, labels, hi);
    std::set<std::string> covered(a.other_bucket.begin(), a.other_bucket.end());
    for (std::size_t c = 0; c < a.clusters.size(); ++c) {
      for (double s : a.clusters[c].similarities) CHECK(s >= lo);
      CHECK(b.clusters[c].member_ids.size() <= a.clusters[c].member_ids.size());
      for (const auto& id : b.clusters[c].member_ids)
        CHECK(std::count(a.clusters[c].member_ids.begin(), a.clusters[c].member_ids.end(), id) == 1);
      covered.insert(a.clusters[c].member_ids.begin(), a.clusters[c].member_ids.end());
    }
    CHECK(covered == std::set<std::string>(ids.begin(), ids.end()));
  }
}

TEST_CASE("two separated title groups give two exact clusters") {
  const DocumentSet docs = titles({{"Registered Nurse", 5}, {"Java Developer", 5}});
  ClusterParams p;
  p.quality_q = 0.9;
  p.threshold = 0.3;
  const ClusterSet s = cluster_corpus(docs, p);
  REQUIRE(s.clusters.size() == 2);
  CHECK(s.other_bucket.empty());
  std::set<std::set<std::string>> groups;
  for (const auto& c : s.clusters) {
    std::set<std::string> prefixes;
    for (const auto& id : c.member_ids) prefixes.insert(id.substr(0, id.find('#')));
    CHECK(prefixes.size() == 1);
    CHECK(c.member_ids.size() == 5);
    groups.insert(prefixes);
  }
  CHECK(groups.size() == 2);
  // Within each group every term ties; the lexicographically first wins.
  CHECK(sorted({s.clusters[0].label.phrase, s.clusters[1].label.phrase}) == std::vector<std::string>{"developer", "nurse"});
}

TEST_CASE("one repeated title forms a single cluster") {
  const ClusterSet s = cluster_corpus(titles({{"Staff Nurse", 6}}), ClusterParams{});
  REQUIRE(s.clusters.size() == 1);
  CHECK(s.clusters[0].member_ids.size() == 6);
  CHECK(s.other_bucket.empty());
}

TEST_CASE("titles below the frequency floor are dropped") {
  const DocumentSet docs = titles({{"Registered Nurse", 5}, {"Java Developer", 5}, {"Forklift Operator", 3}});
  const ClusterSet s = cluster_corpus(docs, ClusterParams{});
  for (const auto& c : s.clusters)
    for (const auto& id : c.member_ids) CHECK(id.rfind("Forklift", 0) == std::string::npos);
  for (const auto& id : s.other_bucket) CHECK(id.rfind("Forklift", 0) == std::string::npos);

  ClusterParams strict;
  strict.min_title_freq = 10;
  CHECK_THROWS_AS(cluster_corpus(docs, strict), Error);
  CHECK_THROWS_AS(cluster_corpus(DocumentSet(), ClusterParams{}), Error);
}

TEST_CASE("clustering is deterministic and persists losslessly") {
  const DocumentSet docs = titles({{"Registered Nurse", 6}, {"ICU Nurse", 5}, {"Java Developer", 7},
                                   {"Web Developer", 4}, {"Truck Driver", 5}, {"Nurse Practitioner", 4}});
  const ClusterSet a = cluster_corpus(docs, ClusterParams{});
  const ClusterSet b = cluster_corpus(docs, ClusterParams{});
  CHECK(cluster_set_files(a) == cluster_set_files(b));

  const auto dir = std::filesystem::temp_directory_path() / "jt_cluster_roundtrip";
  std::filesystem::remove_all(dir);
  save_cluster_set(a, dir);
  const ClusterSet loaded = load_cluster_set(dir);
  CHECK(cluster_set_files(loaded) == cluster_set_files(a));
  REQUIRE(loaded.clusters.size() == a.clusters.size());
  for (std::size_t i = 0; i < a.clusters.size(); ++i) {
    CHECK(loaded.clusters[i].label.phrase == a.clusters[i].label.phrase);
    CHECK(loaded.clusters[i].label.label_vector == a.clusters[i].label.label_vector);
    CHECK(loaded.clusters[i].similarities == a.clusters[i].similarities);
  }
  std::filesystem::remove_all(dir);
}
