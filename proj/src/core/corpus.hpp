#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace jobtitle {

// Four-level occupational code, rendered canonically as "MM-BBBB.DD".
struct SocCode {
  int major = 0;
  int broad = 0;
  int minor = 0;
  std::string detailed;

  std::string render() const;
  bool operator==(const SocCode&) const = default;
};

// Parses "MM-BBBB.DD". The minor group is the broad group with its last
// digit zeroed (15-1132.00 -> minor 1130).
SocCode parse_soc_code(std::string_view text);

int major_group(const SocCode& code);

int minor_from_broad(int broad);

struct Document {
  std::string id;
  std::string title;
  std::string description;
  std::string requirements;
  std::optional<SocCode> gold_soc;
  std::vector<std::string> gold_titles;

  std::string full_text() const;
};

class DocumentSet {
 public:
  DocumentSet() = default;
  // Validates ids and titles; throws ErrorKind::Validation on violations.
  explicit DocumentSet(std::vector<Document> docs);

  const std::vector<Document>& docs() const { return docs_; }
  std::size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }
  const Document& operator[](std::size_t i) const { return docs_[i]; }

  // Gold major group -> ids, in input order.
  const std::map<int, std::vector<std::string>>& label_index() const { return label_index_; }

  const Document* find(std::string_view id) const;

  // Documents at the given positions, in the given order.
  DocumentSet subset(const std::vector<std::size_t>& positions) const;

 private:
  std::vector<Document> docs_;
  std::map<int, std::vector<std::string>> label_index_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
};

DocumentSet load_jsonl(const std::filesystem::path& path);
DocumentSet parse_jsonl(std::string_view text);

// Named groups of major codes that train and route as one class, e.g.
// healthcare = {29, 31}.
class GroupAliases {
 public:
  GroupAliases() = default;
  explicit GroupAliases(std::map<std::string, std::set<int>> aliases);

  // Alias name when the major belongs to one, else the two-digit group.
  std::string resolve(int major) const;
  bool is_valid_key(std::string_view key) const;
  const std::map<std::string, std::set<int>>& table() const { return aliases_; }

 private:
  std::map<std::string, std::set<int>> aliases_;
  std::map<int, std::string> by_major_;
};

std::string group_key(int major);

}  // namespace jobtitle
