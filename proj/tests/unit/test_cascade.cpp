#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "core/cascade.hpp"
#include "core/error.hpp"
#include "core/persist.hpp"
#include "support/gen.hpp"
#include "support/synthetic.hpp"

using namespace jobtitle;
namespace fs = std::filesystem;

namespace {

Document labeled(std::string id, const std::string& soc, std::string title = "clerk") {
  Document d;
  d.id = std::move(id);
  d.title = std::move(title);
  d.gold_soc = parse_soc_code(soc);
  return d;
}

DocumentSet two_group_corpus(std::size_t per_group = 40, std::uint64_t seed = 3) {
  auto groups = jt_test::default_groups();
  groups.resize(2);
  return DocumentSet(jt_test::make_documents(groups, per_group, seed));
}

std::map<std::string, std::size_t> class_counts(const DocumentSet& docs) {
  std::map<std::string, std::size_t> out;
  for (const auto& d : docs.docs()) ++out[group_key(d.gold_soc->major)];
  return out;
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = persist::read_file(e.path());
  return out;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("undersampling caps large classes and keeps small ones") {
  std::vector<Document> docs;
  for (int i = 0; i < 5; ++i) docs.push_back(labeled("a" + std::to_string(i), "15-1132.00"));
  for (int i = 0; i < 2; ++i) docs.push_back(labeled("b" + std::to_string(i), "29-1141.00"));
  const DocumentSet set(docs);
  const DocumentSet out = balance_undersample(set, 3, 7);
  CHECK(class_counts(out) == std::map<std::string, std::size_t>{{"15", 3}, {"29", 2}});

  std::vector<std::string> a, b;
  for (const auto& d : out.docs()) a.push_back(d.id);
  const DocumentSet again = balance_undersample(set, 3, 7);
  for (const auto& d : again.docs()) b.push_back(d.id);
  CHECK(a == b);

  const DocumentSet at_cap(std::vector<Document>(docs.begin(), docs.begin() + 3));
  CHECK(balance_undersample(at_cap, 3, 1).size() == 3);

  CHECK(kind_of([&] { balance_undersample(set, 0, 1); }) == ErrorKind::Parameter);
  CHECK(kind_of([] { balance_undersample(DocumentSet({Document{"x", "t"}}), 3, 1); }) == ErrorKind::Degenerate);
}

TEST_CASE("property: undersampling is exact, without replacement and order preserving") {
  jt_test::Gen g(61);
  for (int round = 0; round < 100; ++round) {
    std::vector<Document> docs;
    std::map<std::string, std::size_t> counts;
    const std::size_t classes = g.between(1, 6);
    for (std::size_t i = g.between(1, 80); i > 0; --i) {
      const int major = 11 + 2 * static_cast<int>(g.index(classes));
      char soc[16];
      std::snprintf(soc, sizeof soc, "%02d-1000.00", major);
      docs.push_back(labeled("d" + std::to_string(docs.size()), soc));
      ++counts[group_key(major)];
    }
    const std::size_t base = g.between(1, 20);
    const std::uint64_t seed = g.index(1000);
    const DocumentSet set(docs);
    const DocumentSet out = balance_undersample(set, base, seed);
    const auto got = class_counts(out);
    for (const auto& [cls, n] : counts) CHECK(got.at(cls) == std::min(n, base));
    // Positions in the input strictly increase: no repeats, order kept.
    std::size_t last = 0;
    bool first = true;
    for (const auto& d : out.docs()) {
      const std::size_t pos = std::stoul(d.id.substr(1));
      CHECK((first || pos > last));
      last = pos;
      first = false;
    }
    const DocumentSet repeat = balance_undersample(set, base, seed);
    REQUIRE(repeat.size() == out.size());
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i].id == repeat[i].id);
  }
}

TEST_CASE("two-group cascade trains two classes and two verticals") {
  Config config;
  const CascadeModel m = train_cascade(two_group_corpus(), config);
  REQUIRE(m.groups.size() == 2);
  CHECK(m.groups[0].key == "15");
  CHECK(m.groups[1].key == "healthcare");
  CHECK(m.coarse.classes == std::vector<int>{0, 1});
  CHECK(m.verticals.size() == 2);
  CHECK(m.groups[0].has_vertical);
  CHECK(m.groups[1].has_vertical);
}

TEST_CASE("routing matches the selected vertical exactly and is stable") {
  Config config;
  const DocumentSet train = two_group_corpus(40, 3);
  const CascadeModel m = train_cascade(train, config);
  const DocumentSet test = two_group_corpus(12, 77);
  for (const auto& doc : test.docs()) {
    const CascadePrediction p = classify(m, doc, 3);
    const std::string gold = config.group_aliases().resolve(doc.gold_soc->major);
    CHECK(p.coarse_group == gold);
    const auto& vertical = m.verticals.at(p.coarse_group);
    CHECK(p.fine_titles == classify_knn(vertical.index, doc, 3, config.min_tf, m.text));
    CHECK(p.abstained == p.fine_titles.empty());
    std::set<std::string> own;
    for (const auto& c : vertical.clusters.clusters) own.insert(c.label.phrase);
    for (const auto& s : p.fine_titles) CHECK(own.count(s.label) == 1);
    REQUIRE_FALSE(p.fine_titles.empty());
    // Top-1 label's members come from the generating cluster.
    for (const auto& c : vertical.clusters.clusters)
      if (c.label.phrase == p.fine_titles[0].label)
        for (const auto& id : c.member_ids) CHECK(jt_test::cluster_of_id(id) == jt_test::cluster_of_id(doc.id));
    const CascadePrediction again = classify(m, doc, 3);
    CHECK(again.fine_titles == p.fine_titles);
    CHECK(again.coarse_scores == p.coarse_scores);
  }
}

TEST_CASE("aliased majors share one vertical") {
  std::vector<Document> docs;
  for (int i = 0; i < 8; ++i) docs.push_back(labeled("n" + std::to_string(i), "29-1141.00", "registered nurse"));
  for (int i = 0; i < 8; ++i) docs.push_back(labeled("a" + std::to_string(i), "31-1014.00", "nursing assistant"));
  for (int i = 0; i < 8; ++i) docs.push_back(labeled("d" + std::to_string(i), "15-1132.00", "java developer"));
  const CascadeModel m = train_cascade(DocumentSet(docs), Config{});
  REQUIRE(m.groups.size() == 2);
  CHECK(m.groups[1].key == "healthcare");
  CHECK(m.groups[1].documents == 16);
  CHECK(m.verticals.count("healthcare") == 1);
  CHECK(m.verticals.count("29") == 0);
  CHECK(m.verticals.count("31") == 0);
  const CascadePrediction p = classify(m, labeled("q", "31-1014.00", "nursing assistant"), 3);
  CHECK(p.coarse_group == "healthcare");
}

TEST_CASE("small groups get no vertical and abstain") {
  std::vector<Document> docs;
  for (int i = 0; i < 10; ++i) docs.push_back(labeled("d" + std::to_string(i), "15-1132.00", "java developer"));
  docs.push_back(labeled("x", "43-4051.00", "filing clerk"));
  docs.push_back(labeled("y", "43-4051.00", "filing clerk"));
  const CascadeModel m = train_cascade(DocumentSet(docs), Config{});
  REQUIRE(m.groups.size() == 2);
  CHECK_FALSE(m.groups[1].has_vertical);
  CHECK_FALSE(m.warnings.empty());
  const CascadePrediction p = classify(m, labeled("q", "43-4051.00", "filing clerk"), 3);
  CHECK(p.coarse_group == "43");
  CHECK(p.abstained);
  CHECK(p.fine_titles.empty());
}

TEST_CASE("cascade training needs two groups") {
  std::vector<Document> docs;
  for (int i = 0; i < 10; ++i) docs.push_back(labeled("d" + std::to_string(i), "15-1132.00", "java developer"));
  CHECK(kind_of([&] { train_cascade(DocumentSet(docs), Config{}); }) == ErrorKind::Degenerate);
}

TEST_CASE("saved cascades reload identically and reject tampering") {
  Config config;
  config.strategy = MulticlassStrategy::CrammerSinger;
  config.bias = true;
  const CascadeModel m = train_cascade(jt_test::make_corpus(30, 5), config);
  const fs::path dir = fs::temp_directory_path() / "jt_cascade_roundtrip";
  fs::remove_all(dir);
  save_cascade(m, dir);
  const auto tree = read_tree(dir);
  CHECK(tree.count("manifest.json") == 1);
  CHECK(tree.count("coarse/model.txt") == 1);
  CHECK(tree.at("manifest.json").find("time") == std::string::npos);

  const CascadeModel back = load_cascade(dir);
  const DocumentSet probe = jt_test::make_corpus(5, 6);
  for (const auto& d : probe.docs()) {
    const auto a = classify(m, d, 4);
    const auto b = classify(back, d, 4);
    CHECK(a.coarse_group == b.coarse_group);
    CHECK(a.coarse_scores == b.coarse_scores);
    CHECK(a.fine_titles == b.fine_titles);
  }
  // Saving the reloaded model reproduces every byte.
  const fs::path again = fs::temp_directory_path() / "jt_cascade_roundtrip2";
  fs::remove_all(again);
  save_cascade(back, again);
  CHECK(read_tree(again) == tree);

  auto tamper = [&](const std::string& rel, const std::string& contents) {
    fs::remove_all(again);
    save_cascade(m, again);
    std::ofstream(again / rel, std::ios::binary | std::ios::trunc) << contents;
    return kind_of([&] { load_cascade(again); });
  };
  CHECK(tamper("coarse/model.txt", tree.at("coarse/model.txt") + " ") == ErrorKind::Integrity);
  CHECK(tamper("manifest.json", "{ not json") == ErrorKind::Integrity);
  CHECK(tamper("manifest.json", "{}") == ErrorKind::Integrity);
  fs::remove_all(again);
  save_cascade(m, again);
  fs::remove(again / "text/stopwords.txt");
  CHECK(kind_of([&] { load_cascade(again); }) == ErrorKind::Integrity);
  fs::remove(again / "manifest.json");
  CHECK(kind_of([&] { load_cascade(again); }) == ErrorKind::Integrity);
  CHECK(kind_of([] { load_cascade("/nonexistent/jt_model"); }) == ErrorKind::Io);
  fs::remove_all(dir);
  fs::remove_all(again);
}
