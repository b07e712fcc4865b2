#include "core/corpus.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/error.hpp"

namespace jobtitle {

namespace {

bool all_digits(std::string_view s) {
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return !s.empty();
}

int to_int(std::string_view digits) {
  int value = 0;
  for (char c : digits) value = value * 10 + (c - '0');
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string optional_string(const nlohmann::json& record, const char* field, std::size_t line) {
  auto it = record.find(field);
  if (it == record.end() || it->is_null()) return {};
  if (!it->is_string())
    fail(ErrorKind::Parse, "line " + std::to_string(line) + ": field '" + field + "' must be a string");
  return it->get<std::string>();
}

}  // namespace

int minor_from_broad(int broad) { return broad - broad % 10; }

std::string SocCode::render() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02d-%04d.", major, broad);
  return buf + detailed;
}

SocCode parse_soc_code(std::string_view text) {
  if (text.size() != 10 || text[2] != '-' || text[7] != '.' || !all_digits(text.substr(0, 2)) ||
      !all_digits(text.substr(3, 4)) || !all_digits(text.substr(8, 2)))
    fail(ErrorKind::Parse, "malformed SOC code '" + std::string(text) + "' (expected MM-BBBB.DD)");
  SocCode code;
  code.major = to_int(text.substr(0, 2));
  if (code.major < 11 || code.major > 55)
    fail(ErrorKind::Parse, "SOC major group out of range [11,55]: '" + std::string(text) + "'");
  code.broad = to_int(text.substr(3, 4));
  code.minor = minor_from_broad(code.broad);
  code.detailed = std::string(text.substr(8, 2));
  return code;
}

int major_group(const SocCode& code) { return code.major; }

std::string Document::full_text() const {
  std::string text = title;
  if (!description.empty()) text += "\n" + description;
  if (!requirements.empty()) text += "\n" + requirements;
  return text;
}

DocumentSet::DocumentSet(std::vector<Document> docs) : docs_(std::move(docs)) {
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    const Document& d = docs_[i];
    if (d.id.empty()) fail(ErrorKind::Validation, "document " + std::to_string(i) + " has an empty id");
    if (d.id.find_first_of("\t\r\n") != std::string::npos)
      fail(ErrorKind::Validation, "document id '" + d.id + "' contains a tab or newline");
    if (trim(d.title).empty()) fail(ErrorKind::Validation, "document '" + d.id + "' has an empty title");
    if (!by_id_.emplace(d.id, i).second) fail(ErrorKind::Validation, "duplicate document id '" + d.id + "'");
    if (d.gold_soc) label_index_[d.gold_soc->major].push_back(d.id);
  }
}

const Document* DocumentSet::find(std::string_view id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &docs_[it->second];
}

DocumentSet DocumentSet::subset(const std::vector<std::size_t>& positions) const {
  std::vector<Document> picked;
  picked.reserve(positions.size());
  for (std::size_t p : positions) picked.push_back(docs_.at(p));
  return DocumentSet(std::move(picked));
}

DocumentSet parse_jsonl(std::string_view text) {
  std::vector<Document> docs;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;

    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!record.is_object()) fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": record is not an object");

    Document doc;
    auto id = record.find("id");
    if (id == record.end() || !id->is_string())
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": missing string field 'id'");
    doc.id = id->get<std::string>();
    auto title = record.find("title");
    if (title == record.end() || !title->is_string())
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": missing string field 'title'");
    doc.title = title->get<std::string>();
    doc.description = optional_string(record, "description", line_no);
    doc.requirements = optional_string(record, "requirements", line_no);
    std::string soc = optional_string(record, "soc", line_no);
    if (!soc.empty()) {
      try {
        doc.gold_soc = parse_soc_code(soc);
      } catch (const Error& e) {
        fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (auto titles = record.find("titles"); titles != record.end() && !titles->is_null()) {
      if (!titles->is_array()) fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": 'titles' must be an array");
      for (const auto& t : *titles) {
        if (!t.is_string()) fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": 'titles' entries must be strings");
        doc.gold_titles.push_back(t.get<std::string>());
      }
    }
    docs.push_back(std::move(doc));
  }
  return DocumentSet(std::move(docs));
}

DocumentSet load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorKind::Io, "error reading '" + path.string() + "'");
  return parse_jsonl(buf.str());
}

std::string group_key(int major) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", major);
  return buf;
}

GroupAliases::GroupAliases(std::map<std::string, std::set<int>> aliases) : aliases_(std::move(aliases)) {
  for (const auto& [name, majors] : aliases_) {
    if (name.empty()) fail(ErrorKind::Parameter, "group alias with empty name");
    if (all_digits(name)) fail(ErrorKind::Parameter, "group alias name '" + name + "' must not be numeric");
    for (char c : name)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
        fail(ErrorKind::Parameter, "group alias name '" + name + "' may only use letters, digits, '_' and '-'");
    if (majors.empty()) fail(ErrorKind::Parameter, "group alias '" + name + "' lists no major groups");
    for (int m : majors) {
      if (m < 11 || m > 55) fail(ErrorKind::Parameter, "group alias '" + name + "' has major out of range");
      if (!by_major_.emplace(m, name).second)
        fail(ErrorKind::Parameter, "major group " + std::to_string(m) + " appears in more than one alias");
    }
  }
}

std::string GroupAliases::resolve(int major) const {
  auto it = by_major_.find(major);
  return it != by_major_.end() ? it->second : group_key(major);
}

bool GroupAliases::is_valid_key(std::string_view key) const {
  if (aliases_.count(std::string(key))) return true;
  if (key.size() != 2 || !all_digits(key)) return false;
  const int major = to_int(key);
  return major >= 11 && major <= 55 && !by_major_.count(major);
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "io";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::Integrity: return "integrity";
  }
  return "unknown";
}

}  // namespace jobtitle
