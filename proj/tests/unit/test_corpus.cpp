#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "core/corpus.hpp"
#include "core/error.hpp"
#include "support/gen.hpp"

using namespace jobtitle;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / ("jt_corpus_" + name);
  std::ofstream(path, std::ios::binary) << contents;
  return path;
}

}  // namespace

TEST_CASE("soc code 15-1132.00 splits into major, broad, minor and detailed") {
  const SocCode c = parse_soc_code("15-1132.00");
  CHECK(c.major == 15);
  CHECK(c.broad == 1132);
  CHECK(c.minor == 1130);
  CHECK(c.detailed == "00");
  CHECK(major_group(c) == 15);
  CHECK(major_group(parse_soc_code("29-1141.00")) == 29);
}

TEST_CASE("soc code with zero groups") {
  const SocCode c = parse_soc_code("55-0000.00");
  CHECK(c.major == 55);
  CHECK(c.broad == 0);
  CHECK(c.minor == 0);
  CHECK(c.render() == "55-0000.00");
}

TEST_CASE("malformed soc codes are parse errors") {
  for (const char* bad : {"AB-12", "", "15-1132", "15-1132.0", "1-1132.00", "15-11320.00", "15_1132.00", " 15-1132.00"})
    CHECK(kind_of([&] { parse_soc_code(bad); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse_soc_code("10-1132.00"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse_soc_code("56-1132.00"); }) == ErrorKind::Parse);
}

TEST_CASE("property: soc render/parse round trip and minor rule") {
  jt_test::Gen g(11);
  for (int i = 0; i < 500; ++i) {
    char text[16];
    const int major = static_cast<int>(g.between(11, 55));
    const int broad = static_cast<int>(g.between(0, 9999));
    const int detailed = static_cast<int>(g.between(0, 99));
    std::snprintf(text, sizeof text, "%02d-%04d.%02d", major, broad, detailed);
    const SocCode c = parse_soc_code(text);
    CHECK(c.render() == text);
    CHECK(parse_soc_code(c.render()) == c);
    CHECK(major_group(parse_soc_code(c.render())) == major);
    CHECK((c.minor % 10 == 0));
    CHECK(c.minor == broad - broad % 10);
    CHECK(c.minor == minor_from_broad(broad));
  }
}

TEST_CASE("jsonl keeps order and optional fields") {
  const DocumentSet docs = parse_jsonl(
      "{\"id\":\"a\",\"title\":\"Java Developer\",\"soc\":\"15-1132.00\",\"titles\":[\"java developer\"]}\n"
      "\n"
      "{\"id\":\"b\",\"title\":\"Nurse\",\"description\":\"ward\",\"requirements\":\"rn\"}\n");
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].id == "a");
  CHECK(docs[1].id == "b");
  CHECK(docs[0].description.empty());
  CHECK(docs[0].gold_soc->major == 15);
  CHECK(docs[0].gold_titles == std::vector<std::string>{"java developer"});
  CHECK_FALSE(docs[1].gold_soc.has_value());
  CHECK(docs[1].full_text() == "Nurse\nward\nrn");
  CHECK(docs.label_index().size() == 1);
  CHECK(docs.label_index().at(15) == std::vector<std::string>{"a"});
  CHECK(docs.find("b") == &docs[1]);
  CHECK(docs.find("zz") == nullptr);
}

TEST_CASE("empty jsonl file gives an empty set") {
  CHECK(load_jsonl(temp_file("empty.jsonl", "")).empty());
}

TEST_CASE("jsonl errors: duplicate id, malformed line, missing file") {
  try {
    parse_jsonl("{\"id\":\"a\",\"title\":\"x\"}\n{\"id\":\"a\",\"title\":\"y\"}\n");
    FAIL("duplicate accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
    CHECK(std::string(e.what()).find("'a'") != std::string::npos);
  }
  try {
    parse_jsonl("{\"id\":\"a\",\"title\":\"x\"}\n{not json\n");
    FAIL("malformed accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK(kind_of([] { parse_jsonl("{\"id\":\"a\"}\n"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse_jsonl("{\"id\":\"a\",\"title\":\"   \"}\n"); }) == ErrorKind::Validation);
  CHECK(kind_of([] { parse_jsonl("{\"id\":\"a\",\"title\":\"x\",\"soc\":\"bad\"}\n"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse_jsonl("{\"id\":\"a\\tb\",\"title\":\"x\"}\n"); }) == ErrorKind::Validation);
  CHECK(kind_of([] { load_jsonl("/nonexistent/jt/docs.jsonl"); }) == ErrorKind::Io);
}

TEST_CASE("property: label index covers exactly the labeled documents") {
  jt_test::Gen g(5);
  for (int round = 0; round < 30; ++round) {
    std::vector<Document> docs;
    const std::size_t n = g.between(0, 40);
    std::size_t labeled = 0;
    for (std::size_t i = 0; i < n; ++i) {
      Document d{"d" + std::to_string(i), "title " + g.word()};
      if (g.coin()) {
        d.gold_soc = SocCode{static_cast<int>(g.between(11, 55)), 1000, 1000, "00"};
        ++labeled;
      }
      docs.push_back(d);
    }
    const DocumentSet set(docs);
    std::size_t indexed = 0;
    for (const auto& [major, ids] : set.label_index()) {
      indexed += ids.size();
      for (const auto& id : ids) CHECK(set.find(id)->gold_soc->major == major);
    }
    CHECK(indexed == labeled);
  }
}

TEST_CASE("group aliases resolve merged majors") {
  const GroupAliases aliases({{"healthcare", {29, 31}}});
  CHECK(aliases.resolve(29) == "healthcare");
  CHECK(aliases.resolve(31) == "healthcare");
  CHECK(aliases.resolve(15) == "15");
  CHECK(group_key(15) == "15");
  CHECK(aliases.is_valid_key("healthcare"));
  CHECK(aliases.is_valid_key("43"));
  CHECK_FALSE(aliases.is_valid_key("29"));
  CHECK_FALSE(aliases.is_valid_key("99"));
  CHECK_FALSE(aliases.is_valid_key("office"));
  CHECK(kind_of([] { GroupAliases({{"a", {29}}, {"b", {29}}}); }) == ErrorKind::Parameter);
  CHECK(kind_of([] { GroupAliases({{"15", {29}}}); }) == ErrorKind::Parameter);
  CHECK(kind_of([] { GroupAliases({{"x/y", {29}}}); }) == ErrorKind::Parameter);
  CHECK(kind_of([] { GroupAliases(std::map<std::string, std::set<int>>{{"x", {}}}); }) == ErrorKind::Parameter);
}
