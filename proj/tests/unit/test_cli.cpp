#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "jt_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

Run cli(const std::string& args, const std::string& env = "") {
  const fs::path err = scratch() / "stderr.txt";
  const std::string command = env + " " + quote(JT_CLI_PATH) + " " + args + " 2>" + quote(err.string());
  Run r;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

void write(const fs::path& path, const std::string& contents) { std::ofstream(path, std::ios::binary) << contents; }

// Two groups, two head nouns per group, three modifiers per head.
std::string toy_jsonl(bool one_group = false) {
  struct Row {
    const char* title;
    const char* body;
    const char* soc;
  };
  const Row rows[] = {{"software developer", "python code api", "15-1132.00"},
                      {"web developer", "javascript code api", "15-1132.00"},
                      {"java developer", "jvm code api", "15-1132.00"},
                      {"data analyst", "sql reports dashboards", "15-2041.00"},
                      {"business analyst", "requirements reports stakeholders", "15-2041.00"},
                      {"systems analyst", "integration reports design", "15-2041.00"},
                      {"registered nurse", "patient care ward", "29-1141.00"},
                      {"icu nurse", "patient care critical", "29-1141.00"},
                      {"pediatric nurse", "patient care children", "29-1141.00"},
                      {"physical therapist", "rehabilitation patient exercise", "29-1123.00"},
                      {"respiratory therapist", "ventilator patient breathing", "29-1126.00"},
                      {"occupational therapist", "daily patient activities", "29-1122.00"}};
  std::string out;
  int serial = 0;
  for (const auto& row : rows) {
    if (one_group && row.soc[0] == '2') continue;
    for (int i = 0; i < 5; ++i)
      out += nlohmann::json{{"id", "d" + std::to_string(serial++)},
                            {"title", row.title},
                            {"description", row.body},
                            {"soc", row.soc},
                            {"titles", {row.title}}}
                 .dump() +
             "\n";
  }
  return out;
}

const std::string kSmall = "--set min_title_freq=2 ";

fs::path toy_file() {
  const fs::path p = scratch() / "toy.jsonl";
  if (!fs::exists(p)) write(p, toy_jsonl());
  return p;
}

fs::path trained_model() {
  const fs::path m = scratch() / "model";
  if (!fs::exists(m / "manifest.json")) REQUIRE(cli(kSmall + "train " + toy_file().string() + " --output " + m.string()).code == 0);
  return m;
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
  return out;
}

}  // namespace

TEST_CASE("cluster writes a cluster set and a size summary") {
  const fs::path out = scratch() / "clusters";
  const Run r = cli(kSmall + "cluster " + toy_file().string() + " --output " + out.string());
  CHECK(r.code == 0);
  CHECK(r.out.rfind("clusters\t", 0) == 0);
  CHECK(r.out.find("unassigned\t0") != std::string::npos);
  CHECK(fs::exists(out / "labels.tsv"));
  CHECK(fs::exists(out / "memberships.tsv"));
  CHECK(fs::exists(out / "unassigned.txt"));
}

TEST_CASE("unreadable input and unwritable output exit with status 2") {
  const Run missing = cli("cluster /nonexistent/corpus.jsonl --output " + (scratch() / "x").string());
  CHECK(missing.code == 2);
  CHECK(missing.err.find("/nonexistent/corpus.jsonl") != std::string::npos);

  const fs::path blocker = scratch() / "plain_file";
  write(blocker, "x");
  const Run unwritable = cli(kSmall + "cluster " + toy_file().string() + " --output " + (blocker / "sub").string());
  CHECK(unwritable.code == 2);
  CHECK_FALSE(unwritable.err.empty());

  CHECK(cli("cluster").code == 2);
  CHECK(cli("frobnicate").code == 2);
  CHECK(cli("--set nonsense=1 cluster " + toy_file().string() + " --output " + (scratch() / "y").string()).code == 2);
}

TEST_CASE("malformed input exits with status 3 and names the line") {
  const fs::path bad = scratch() / "bad.jsonl";
  write(bad, toy_jsonl().substr(0, 200) + "\n{not json\n");
  const Run r = cli("cluster " + bad.string() + " --output " + (scratch() / "z").string());
  CHECK(r.code == 3);
  CHECK(r.err.find("line 2") != std::string::npos);
}

TEST_CASE("train needs two groups and records every vertical") {
  const fs::path one = scratch() / "one_group.jsonl";
  write(one, toy_jsonl(true));
  const Run degenerate = cli(kSmall + "train " + one.string() + " --output " + (scratch() / "m1").string());
  CHECK(degenerate.code == 3);
  CHECK_FALSE(degenerate.err.empty());

  const fs::path model = trained_model();
  const auto manifest = nlohmann::json::parse(slurp(model / "manifest.json"));
  std::size_t verticals = 0;
  for (const auto& g : manifest.at("groups")) verticals += g.at("vertical").get<bool>() ? 1 : 0;
  CHECK(manifest.at("groups").size() == 2);
  CHECK(verticals == 2);
}

TEST_CASE("classify routes a free-text title") {
  const Run r = cli("classify " + trained_model().string() + " --title 'registered nurse' --k 3");
  REQUIRE(r.code == 0);
  std::istringstream fields(r.out.substr(0, r.out.find('\n')));
  std::string id, group, kind, top;
  fields >> id >> group >> kind >> top;
  CHECK(group == "healthcare");
  CHECK(kind == "fine");
  CHECK(top.rfind("nurse=", 0) == 0);
}

TEST_CASE("classify on an empty corpus prints nothing") {
  const fs::path empty = scratch() / "empty.jsonl";
  write(empty, "");
  const Run r = cli("classify " + trained_model().string() + " " + empty.string());
  CHECK(r.code == 0);
  CHECK(r.out.empty());
}

TEST_CASE("corrupted models exit with status 4") {
  const fs::path copy = scratch() / "model_copy";
  fs::remove_all(copy);
  fs::copy(trained_model(), copy, fs::copy_options::recursive);
  std::string manifest = slurp(copy / "manifest.json");
  manifest[manifest.find("\"checksum") + 14] ^= 1;
  write(copy / "manifest.json", manifest);
  const Run r = cli("classify " + copy.string() + " --title nurse");
  CHECK(r.code == 4);
  CHECK(r.err.find("integrity") != std::string::npos);
}

TEST_CASE("every command documents every config key") {
  const char* names[] = {"min_title_freq", "min_df", "quality_q", "threshold", "max_labels", "k", "min_tf",
                         "C", "strategy", "bias", "base_count", "min_group_size", "seed", "aliases", "folds"};
  for (const char* command : {"", "cluster ", "train ", "classify ", "evaluate ", "cv "}) {
    const Run r = cli(std::string(command) + "--help");
    CHECK(r.code == 0);
    for (const char* key : names) CHECK_MESSAGE(r.out.find(std::string("  ") + key + " ") != std::string::npos, command << key);
  }
}

TEST_CASE("evaluate scores a perfect fixture as 1") {
  const fs::path report = scratch() / "report.json";
  const Run r = cli("evaluate " + trained_model().string() + " " + toy_file().string() + " --output " + report.string());
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(report));
  CHECK(j.at("macro_f1").get<double>() == 1.0);
  CHECK(j.at("coverage").get<double>() == 1.0);
  CHECK(r.out.find("macro_f1") != std::string::npos);
}

TEST_CASE("cv rejects more folds than documents and honours the seed") {
  const fs::path tiny = scratch() / "tiny.jsonl";
  write(tiny, toy_jsonl().substr(0, toy_jsonl().find('\n', 0) + 1));
  const Run too_many = cli("cv " + tiny.string() + " --folds 5");
  CHECK(too_many.code == 3);
  CHECK(cli("cv " + toy_file().string() + " --folds 1").code == 2);

  const fs::path a = scratch() / "cv_a.json", b = scratch() / "cv_b.json", c = scratch() / "cv_c.json";
  REQUIRE(cli(kSmall + "--seed 5 cv " + toy_file().string() + " --folds 3 --output " + a.string()).code == 0);
  REQUIRE(cli(kSmall + "--seed 5 cv " + toy_file().string() + " --folds 3 --output " + b.string()).code == 0);
  REQUIRE(cli(kSmall + "--seed 6 cv " + toy_file().string() + " --folds 3 --output " + c.string()).code == 0);
  CHECK(slurp(a) == slurp(b));
  const auto ja = nlohmann::json::parse(slurp(a));
  CHECK(ja.at("seed") == 5);
  CHECK(nlohmann::json::parse(slurp(c)).at("seed") == 6);
}

TEST_CASE("config files and the environment feed the same keys") {
  const fs::path config = scratch() / "config.json";
  write(config, R"({"min_title_freq": 2, "seed": 11})");
  const fs::path m1 = scratch() / "cfg_model", m2 = scratch() / "env_model";
  REQUIRE(cli("--config " + config.string() + " train " + toy_file().string() + " --output " + m1.string()).code == 0);
  REQUIRE(cli("train " + toy_file().string() + " --output " + m2.string(), "CASCADE_TITLES_CONFIG=" + quote(config.string())).code == 0);
  CHECK(tree(m1) == tree(m2));
  CHECK(nlohmann::json::parse(slurp(m1 / "manifest.json")).at("config").at("seed") == 11);
}
