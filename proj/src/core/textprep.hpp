#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace jobtitle {

struct TermSequence {
  std::vector<std::string> terms;
  std::string source_id;
};

class StopList {
 public:
  StopList() = default;
  explicit StopList(const std::vector<std::string>& words);

  // One word per line, '#' comments, blank lines ignored.
  static StopList parse(std::string_view text);
  static StopList load(const std::filesystem::path& path);
  // The shipped English list (data/stopwords_en.txt, compiled in).
  static const StopList& english();

  bool contains(std::string_view word) const { return words_.count(std::string(word)) != 0; }
  const std::set<std::string>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }

 private:
  std::set<std::string> words_;
};

// Tokens that survive normalization verbatim (after lowercasing), such as
// "c++" or ".net".
using ExceptionLexicon = std::set<std::string>;

const ExceptionLexicon& default_exceptions();

// Lowercases, strips markup tags and character entities, collapses every
// run of other characters to one space and trims. Intra-word hyphens and
// lexicon tokens are kept. Idempotent.
std::string normalize(std::string_view text, const ExceptionLexicon& exceptions = default_exceptions());

// Whitespace split of already-normalized text with stop words removed.
TermSequence tokenize(std::string_view text, const StopList& stops);

// Unigrams followed by adjacent bigrams ("a b") when max_n == 2.
TermSequence ngrams(const TermSequence& tokens, int max_n = 2);

std::set<std::string> min_count_filter(const std::map<std::string, std::size_t>& counts, std::size_t threshold);

// normalize -> tokenize -> ngrams.
struct TextPipeline {
  StopList stops = StopList::english();
  ExceptionLexicon exceptions = default_exceptions();
  int max_n = 2;

  TermSequence terms(std::string_view raw, std::string source_id = {}) const;
};

}  // namespace jobtitle
