#include "core/textprep.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace jobtitle {

extern const char* const kEnglishStopWords;

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_separator(char c) { return is_space(c) || c == '/' || c == ',' || c == ';' || c == '|'; }

// Replaces "<...>" and "&name;" / "&#123;" with spaces, lowercasing the rest.
std::string strip_markup(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '<') {
      const std::size_t close = text.find('>', i + 1);
      if (close != std::string_view::npos) {
        out.push_back(' ');
        i = close;
        continue;
      }
    } else if (c == '&') {
      std::size_t j = i + 1;
      while (j < text.size() && j - i <= 10 && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '#')) ++j;
      if (j < text.size() && text[j] == ';' && j > i + 1) {
        out.push_back(' ');
        i = j;
        continue;
      }
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::string_view trim_punct(std::string_view token) {
  constexpr std::string_view kLeading = "(\"'[{";
  constexpr std::string_view kTrailing = ".,;:!?)\"']}";
  while (!token.empty() && kLeading.find(token.front()) != std::string_view::npos) token.remove_prefix(1);
  while (!token.empty() && kTrailing.find(token.back()) != std::string_view::npos) token.remove_suffix(1);
  return token;
}

void append_token(std::string& out, std::string_view token) {
  if (token.empty()) return;
  if (!out.empty()) out.push_back(' ');
  out.append(token);
}

void clean_token(std::string& out, std::string_view raw) {
  std::string piece;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto c = static_cast<unsigned char>(raw[i]);
    if (is_word_byte(c)) {
      piece.push_back(static_cast<char>(c));
    } else if (c == '-' && i > 0 && i + 1 < raw.size() && is_word_byte(static_cast<unsigned char>(raw[i - 1])) &&
               is_word_byte(static_cast<unsigned char>(raw[i + 1]))) {
      piece.push_back('-');
    } else {
      append_token(out, piece);
      piece.clear();
    }
  }
  append_token(out, piece);
}

}  // namespace

StopList::StopList(const std::vector<std::string>& words) {
  for (const auto& w : words) {
    std::string lower;
    for (char c : w) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (!lower.empty()) words_.insert(std::move(lower));
  }
}

StopList StopList::parse(std::string_view text) {
  std::vector<std::string> words;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string word;
    while (fields >> word) words.push_back(word);
  }
  return StopList(words);
}

StopList StopList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot read stop list '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const StopList& StopList::english() {
  static const StopList list = parse(kEnglishStopWords);
  return list;
}

const ExceptionLexicon& default_exceptions() {
  static const ExceptionLexicon lexicon = {"c++", "c#", "f#", ".net", "asp.net", "vb.net", "node.js", "r&d"};
  return lexicon;
}

std::string normalize(std::string_view text, const ExceptionLexicon& exceptions) {
  const std::string lowered = strip_markup(text);
  std::string out;
  std::size_t i = 0;
  while (i < lowered.size()) {
    while (i < lowered.size() && is_separator(lowered[i])) ++i;
    std::size_t j = i;
    while (j < lowered.size() && !is_separator(lowered[j])) ++j;
    if (j > i) {
      std::string_view raw(lowered.data() + i, j - i);
      if (exceptions.count(std::string(raw))) {
        append_token(out, raw);
      } else if (std::string_view core = trim_punct(raw); !core.empty() && exceptions.count(std::string(core))) {
        append_token(out, core);
      } else {
        clean_token(out, raw);
      }
    }
    i = j;
  }
  return out;
}

TermSequence tokenize(std::string_view text, const StopList& stops) {
  TermSequence seq;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) {
      std::string_view word = text.substr(i, j - i);
      if (!stops.contains(word)) seq.terms.emplace_back(word);
    }
    i = j;
  }
  return seq;
}

TermSequence ngrams(const TermSequence& tokens, int max_n) {
  if (max_n != 1 && max_n != 2) fail(ErrorKind::Parameter, "ngram order must be 1 or 2, got " + std::to_string(max_n));
  TermSequence out;
  out.source_id = tokens.source_id;
  const auto& t = tokens.terms;
  out.terms.reserve(t.empty() ? 0 : (max_n == 2 ? 2 * t.size() - 1 : t.size()));
  out.terms = t;
  if (max_n == 2)
    for (std::size_t i = 0; i + 1 < t.size(); ++i) out.terms.push_back(t[i] + ' ' + t[i + 1]);
  return out;
}

std::set<std::string> min_count_filter(const std::map<std::string, std::size_t>& counts, std::size_t threshold) {
  if (threshold < 1) fail(ErrorKind::Parameter, "frequency threshold must be >= 1");
  std::set<std::string> kept;
  for (const auto& [term, count] : counts)
    if (count >= threshold) kept.insert(term);
  return kept;
}

TermSequence TextPipeline::terms(std::string_view raw, std::string source_id) const {
  TermSequence seq = ngrams(tokenize(normalize(raw, exceptions), stops), max_n);
  seq.source_id = std::move(source_id);
  return seq;
}

}  // namespace jobtitle
