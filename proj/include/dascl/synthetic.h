#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dascl/lexicon.h"
#include "dascl/trainer.h"

namespace dascl {

// A binary sentiment toy world: two disjoint dictionaries of signal words,
// a neutral filler vocabulary, and label-irrelevant distractor words.
struct SyntheticOptions {
  int dictionary_size = 50;
  int filler_vocab = 300;
  int distractor_vocab = 20;
  int doc_length = 12;
  int signal_words = 2;          // per document, from the label's dictionary
  double distractor_rate = 0.1;  // fraction of non-signal positions
  std::uint64_t seed = 0;
};

struct SyntheticWorld {
  SyntheticOptions options;
  std::vector<std::string> positive_words;
  std::vector<std::string> negative_words;
  std::vector<std::string> filler_words;
  std::vector<std::string> distractor_words;

  // Dictionaries mapping to <positive> / <negative>.
  Lexicon PositiveLexicon() const;
  Lexicon NegativeLexicon() const;
  LexiconSet Lexicons() const;
};

// Which part of each dictionary a document may draw signal words from.
enum class DictionarySlice { kAll, kFirstHalf, kSecondHalf };

SyntheticWorld MakeSyntheticWorld(const SyntheticOptions& options);

// `count` documents with labels alternating 0/1 before a final shuffle, so
// the label split is exact. Ids are `prefix` followed by the index.
Corpus SampleSyntheticDocs(const SyntheticWorld& world, int count, std::uint64_t seed,
                           DictionarySlice slice, const std::string& id_prefix = "doc");

}  // namespace dascl
