#include "dascl/lexicon.h"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <utility>

#include "dascl/error.h"

namespace dascl {
namespace {

bool IsSpace(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool IsPunct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

std::string Lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && IsSpace(s.front())) s.remove_prefix(1);
  while (!s.empty() && IsSpace(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> SplitWhitespace(std::string_view s) {
  std::vector<std::string> pieces;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && IsSpace(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !IsSpace(s[j])) ++j;
    if (j > i) pieces.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return pieces;
}

}  // namespace

bool IsValidReplacementToken(std::string_view token) {
  if (token.size() < 3 || token.front() != '<' || token.back() != '>') return false;
  for (char c : token.substr(1, token.size() - 2)) {
    if (!((c >= 'a' && c <= 'z') || c == '_')) return false;
  }
  return true;
}

Lexicon ParseDictionary(std::string_view text, std::string_view token,
                        std::string_view name) {
  if (!IsValidReplacementToken(token)) {
    throw ValidationError("replacement token '" + std::string(token) +
                          "' must have the form <[a-z_]+>");
  }
  std::set<DictionaryEntry> entries;
  std::istringstream lines{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(lines, raw)) {
    ++line_no;
    std::string_view line = Trim(raw);
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string> words = SplitWhitespace(Lowercase(line));
    DictionaryEntry entry;
    if (words.size() > 1) {
      for (const auto& w : words) {
        if (w.find('*') != std::string::npos) {
          throw ValidationError("line " + std::to_string(line_no) +
                                ": wildcards are not supported inside phrases");
        }
      }
      entry.kind = DictionaryEntry::Kind::kPhrase;
      entry.surface = JoinTokens(words);
    } else {
      std::string word = words.front();
      bool wildcard = word.back() == '*';
      if (wildcard) word.pop_back();
      if (word.empty()) {
        throw ValidationError("line " + std::to_string(line_no) + ": empty wildcard stem");
      }
      if (word.find('*') != std::string::npos) {
        throw ValidationError("line " + std::to_string(line_no) +
                              ": '*' is only allowed as the final character");
      }
      entry.kind = wildcard ? DictionaryEntry::Kind::kPrefixWildcard
                            : DictionaryEntry::Kind::kLiteral;
      entry.surface = std::move(word);
    }
    entries.insert(std::move(entry));
  }
  Lexicon lexicon;
  lexicon.name = name.empty() ? std::string(token.substr(1, token.size() - 2))
                              : std::string(name);
  lexicon.token = std::string(token);
  lexicon.entries.assign(entries.begin(), entries.end());
  return lexicon;
}

TokenizedDoc Tokenize(std::string_view text) {
  TokenizedDoc doc;
  for (std::string piece : SplitWhitespace(text)) {
    piece = Lowercase(piece);
    // Replacement tokens survive re-tokenization of simplified text.
    if (IsValidReplacementToken(piece)) {
      doc.push_back(std::move(piece));
      continue;
    }
    std::size_t begin = 0, end = piece.size();
    while (begin < end && IsPunct(piece[begin])) ++begin;
    while (end > begin && IsPunct(piece[end - 1])) --end;
    if (end > begin) doc.push_back(piece.substr(begin, end - begin));
  }
  return doc;
}

std::string JoinTokens(const TokenizedDoc& doc) {
  std::string out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (i) out += ' ';
    out += doc[i];
  }
  return out;
}

LexiconSet::LexiconSet(std::vector<Lexicon> lexicons) : lexicons_(std::move(lexicons)) {
  std::set<std::string> names;
  for (std::size_t li = 0; li < lexicons_.size(); ++li) {
    const Lexicon& lex = lexicons_[li];
    if (!IsValidReplacementToken(lex.token)) {
      throw ValidationError("lexicon '" + lex.name + "' has malformed token '" + lex.token + "'");
    }
    if (!names.insert(lex.name).second) {
      throw ValidationError("duplicate lexicon name '" + lex.name + "'");
    }
    // emplace keeps the first (highest-priority) owner of a surface form.
    for (const DictionaryEntry& entry : lex.entries) {
      switch (entry.kind) {
        case DictionaryEntry::Kind::kLiteral:
          literals_.emplace(entry.surface, li);
          break;
        case DictionaryEntry::Kind::kPrefixWildcard:
          prefixes_.emplace(entry.surface, li);
          max_stem_length_ = std::max(max_stem_length_, entry.surface.size());
          break;
        case DictionaryEntry::Kind::kPhrase: {
          std::size_t node = 0;
          for (const std::string& word : SplitWhitespace(entry.surface)) {
            auto it = phrase_trie_[node].children.find(word);
            if (it == phrase_trie_[node].children.end()) {
              phrase_trie_.emplace_back();
              it = phrase_trie_[node].children.emplace(word, phrase_trie_.size() - 1).first;
            }
            node = it->second;
          }
          if (phrase_trie_[node].lexicon == kNone) phrase_trie_[node].lexicon = li;
          break;
        }
      }
    }
  }
}

std::size_t LexiconSet::SingleWordMatch(const std::string& word) const {
  std::size_t best = kNone;
  if (auto it = literals_.find(word); it != literals_.end()) best = it->second;
  const std::size_t longest = std::min(max_stem_length_, word.size());
  for (std::size_t len = 1; len <= longest; ++len) {
    auto it = prefixes_.find(word.substr(0, len));
    if (it != prefixes_.end()) best = std::min(best, it->second);
  }
  return best;
}

std::size_t LexiconSet::MatchAt(const TokenizedDoc& doc, std::size_t pos,
                                std::size_t* lexicon_index) const {
  std::size_t best_len = 0;
  std::size_t best_lex = kNone;

  std::size_t single = SingleWordMatch(doc[pos]);
  if (single != kNone) {
    best_len = 1;
    best_lex = single;
  }

  std::size_t node = 0;
  for (std::size_t i = pos; i < doc.size(); ++i) {
    auto it = phrase_trie_[node].children.find(doc[i]);
    if (it == phrase_trie_[node].children.end()) break;
    node = it->second;
    const std::size_t len = i - pos + 1;
    const std::size_t owner = phrase_trie_[node].lexicon;
    if (owner == kNone) continue;
    if (len > best_len || (len == best_len && owner < best_lex)) {
      best_len = len;
      best_lex = owner;
    }
  }

  if (lexicon_index) *lexicon_index = best_lex;
  return best_len;
}

TokenizedDoc KeywordSimplify(const TokenizedDoc& doc, const LexiconSet& lexicons) {
  if (lexicons.empty()) return doc;
  TokenizedDoc out;
  out.reserve(doc.size());
  std::size_t pos = 0;
  while (pos < doc.size()) {
    std::size_t lex = 0;
    std::size_t len = lexicons.MatchAt(doc, pos, &lex);
    if (len == 0) {
      out.push_back(doc[pos]);
      ++pos;
    } else {
      out.push_back(lexicons.lexicons()[lex].token);
      pos += len;
    }
  }
  return out;
}

std::vector<TokenizedDoc> SimplifyCorpus(const std::vector<TokenizedDoc>& docs,
                                         const LexiconSet& lexicons) {
  std::vector<TokenizedDoc> out;
  out.reserve(docs.size());
  for (const TokenizedDoc& doc : docs) out.push_back(KeywordSimplify(doc, lexicons));
  return out;
}

}  // namespace dascl
