#include "dascl/synthetic.h"

#include <algorithm>
#include <random>
#include <set>

#include "dascl/error.h"

namespace dascl {
namespace {

// Pronounceable pseudo-words built from consonant-vowel syllables.
std::string PseudoWord(std::mt19937_64& rng, int syllables) {
  static constexpr std::string_view kConsonants = "bdfgklmnprstvz";
  static constexpr std::string_view kVowels = "aeiou";
  std::uniform_int_distribution<std::size_t> c(0, kConsonants.size() - 1);
  std::uniform_int_distribution<std::size_t> v(0, kVowels.size() - 1);
  std::string w;
  for (int i = 0; i < syllables; ++i) {
    w += kConsonants[c(rng)];
    w += kVowels[v(rng)];
  }
  return w;
}

std::vector<std::string> DrawUnique(std::mt19937_64& rng, int count, std::set<std::string>& used) {
  std::vector<std::string> words;
  while (static_cast<int>(words.size()) < count) {
    std::string w = PseudoWord(rng, 3);
    if (used.insert(w).second) words.push_back(std::move(w));
  }
  return words;
}

Lexicon MakeLexicon(const std::vector<std::string>& words, const std::string& token) {
  std::string text;
  for (const std::string& w : words) text += w + "\n";
  return ParseDictionary(text, token);
}

}  // namespace

Lexicon SyntheticWorld::PositiveLexicon() const { return MakeLexicon(positive_words, "<positive>"); }
Lexicon SyntheticWorld::NegativeLexicon() const { return MakeLexicon(negative_words, "<negative>"); }
LexiconSet SyntheticWorld::Lexicons() const {
  return LexiconSet({PositiveLexicon(), NegativeLexicon()});
}

SyntheticWorld MakeSyntheticWorld(const SyntheticOptions& options) {
  if (options.dictionary_size < 2 || options.filler_vocab < 1 || options.distractor_vocab < 1 ||
      options.signal_words < 1 || options.doc_length < options.signal_words ||
      !(options.distractor_rate >= 0.0 && options.distractor_rate <= 1.0)) {
    throw ValidationError("invalid synthetic corpus options");
  }
  std::mt19937_64 rng(options.seed);
  std::set<std::string> used;
  SyntheticWorld world;
  world.options = options;
  world.positive_words = DrawUnique(rng, options.dictionary_size, used);
  world.negative_words = DrawUnique(rng, options.dictionary_size, used);
  world.filler_words = DrawUnique(rng, options.filler_vocab, used);
  world.distractor_words = DrawUnique(rng, options.distractor_vocab, used);
  return world;
}

Corpus SampleSyntheticDocs(const SyntheticWorld& world, int count, std::uint64_t seed,
                           DictionarySlice slice, const std::string& id_prefix) {
  const SyntheticOptions& opt = world.options;
  std::mt19937_64 rng(seed);
  const std::size_t half = world.positive_words.size() / 2;
  std::size_t lo = 0, hi = world.positive_words.size();
  if (slice == DictionarySlice::kFirstHalf) hi = half;
  if (slice == DictionarySlice::kSecondHalf) lo = half;

  std::uniform_int_distribution<std::size_t> signal(lo, hi - 1);
  std::uniform_int_distribution<std::size_t> filler(0, world.filler_words.size() - 1);
  std::uniform_int_distribution<std::size_t> distractor(0, world.distractor_words.size() - 1);
  std::bernoulli_distribution is_distractor(opt.distractor_rate);

  Corpus corpus;
  for (int i = 0; i < count; ++i) {
    const int label = i % 2;
    const auto& dictionary = label == 1 ? world.positive_words : world.negative_words;
    std::vector<std::string> words;
    for (int k = 0; k < opt.signal_words; ++k) words.push_back(dictionary[signal(rng)]);
    for (int k = opt.signal_words; k < opt.doc_length; ++k) {
      words.push_back(is_distractor(rng) ? world.distractor_words[distractor(rng)]
                                         : world.filler_words[filler(rng)]);
    }
    std::shuffle(words.begin(), words.end(), rng);
    corpus.push_back({"", JoinTokens(words), label});
  }
  std::shuffle(corpus.begin(), corpus.end(), rng);
  for (std::size_t i = 0; i < corpus.size(); ++i) corpus[i].id = id_prefix + std::to_string(i);
  return corpus;
}

}  // namespace dascl
