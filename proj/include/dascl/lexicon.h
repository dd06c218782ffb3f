#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dascl {

// A document as a sequence of lowercase word tokens.
using TokenizedDoc = std::vector<std::string>;

struct DictionaryEntry {
  enum class Kind { kLiteral, kPrefixWildcard, kPhrase };

  Kind kind = Kind::kLiteral;
  // Lowercase. For kPrefixWildcard this is the stem without the trailing
  // '*'; for kPhrase the words are separated by single spaces.
  std::string surface;

  friend bool operator==(const DictionaryEntry&, const DictionaryEntry&) = default;
  friend auto operator<=>(const DictionaryEntry&, const DictionaryEntry&) = default;
};

// A named word list whose matches are replaced by `token`. Entries are kept
// sorted and unique.
struct Lexicon {
  std::string name;
  std::string token;
  std::vector<DictionaryEntry> entries;
};

// Returns true if `token` has the shape <[a-z_]+>.
bool IsValidReplacementToken(std::string_view token);

// Parses a dictionary file: one entry per line, '#' starts a comment line,
// blank lines are ignored, a trailing '*' marks a prefix wildcard and
// internal whitespace marks a phrase. Throws ValidationError on a malformed
// token, a bare '*' line, or a phrase containing '*'.
Lexicon ParseDictionary(std::string_view text, std::string_view token,
                        std::string_view name = "");

// Lowercases, splits on whitespace and strips leading/trailing punctuation
// from every piece. Apostrophes and other word-internal punctuation stay.
TokenizedDoc Tokenize(std::string_view text);

// Joins tokens with single spaces.
std::string JoinTokens(const TokenizedDoc& doc);

// An ordered set of lexicons compiled into a token-level matcher. Earlier
// lexicons win ties on match length. Immutable after construction.
class LexiconSet {
 public:
  LexiconSet() = default;
  explicit LexiconSet(std::vector<Lexicon> lexicons);

  const std::vector<Lexicon>& lexicons() const { return lexicons_; }
  bool empty() const { return lexicons_.empty(); }

  // Longest match starting at doc[pos]. Returns the number of tokens
  // consumed (0 when nothing matches) and sets *lexicon_index.
  std::size_t MatchAt(const TokenizedDoc& doc, std::size_t pos,
                      std::size_t* lexicon_index) const;

 private:
  // Phrase trie keyed by word. Node 0 is the root.
  struct PhraseNode {
    std::unordered_map<std::string, std::size_t> children;
    std::size_t lexicon = kNone;
  };
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  std::size_t SingleWordMatch(const std::string& word) const;

  std::vector<Lexicon> lexicons_;
  std::unordered_map<std::string, std::size_t> literals_;
  // stem -> owning lexicon; probed with every prefix of the word.
  std::unordered_map<std::string, std::size_t> prefixes_;
  std::size_t max_stem_length_ = 0;
  std::vector<PhraseNode> phrase_trie_{1};
};

// Replaces every dictionary match with its lexicon's token in a single
// left-to-right pass. At each position the longest match wins; ties go to
// the earlier lexicon. Emitted tokens are never re-matched.
TokenizedDoc KeywordSimplify(const TokenizedDoc& doc, const LexiconSet& lexicons);

std::vector<TokenizedDoc> SimplifyCorpus(const std::vector<TokenizedDoc>& docs,
                                         const LexiconSet& lexicons);

}  // namespace dascl
