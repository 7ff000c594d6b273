#ifndef BIASFORGE_INVENTORY_HPP
#define BIASFORGE_INVENTORY_HPP

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "biasforge/phonetics.hpp"

namespace biasforge {

// Decoding hypotheses for a set of utterances. Hypotheses are deduplicated
// per utterance on load.
struct HypothesisCorpus {
  struct Utterance {
    std::string utt_id;
    std::vector<std::vector<std::string>> hypotheses;
  };
  std::vector<Utterance> utterances;

  static HypothesisCorpus from_file(const std::string& path);
  static HypothesisCorpus parse(std::istream& in, const std::string& name);
  std::string serialize() const;
};

// Map from word n-gram to co-occurring alternative n-grams with counts.
// Counts are symmetric (count(a->b) == count(b->a)), self-pairs never occur,
// and stored counts are strictly positive. Phrases are space-joined token
// strings.
class FuzzyInventory {
 public:
  std::int64_t count(const std::string& phrase, const std::string& alt) const;

  // All alternatives of `phrase`, sorted by count descending then phrase
  // ascending. Empty if the phrase is absent.
  std::vector<std::pair<std::string, std::int64_t>> candidates(
      const std::string& phrase) const;

  // Adds c to both directions of the pair. a == b or c <= 0 is rejected.
  void add_pair(const std::string& a, const std::string& b, std::int64_t c);

  void merge(const FuzzyInventory& other);
  std::size_t num_phrases() const { return pairs_.size(); }
  bool symmetric() const;

  // `phrase<TAB>alternative<TAB>count`, sorted by (phrase, count desc,
  // alternative) for byte-stable files.
  std::string serialize() const;
  static FuzzyInventory from_file(const std::string& path);
  static FuzzyInventory parse(std::istream& in, const std::string& name);

 private:
  std::map<std::string, std::map<std::string, std::int64_t>> pairs_;
};

// Mines co-occurring n-gram pairs from every unordered hypothesis pair of
// every utterance: maximal common prefix, then maximal common suffix of the
// remainder; if both middle spans are non-empty, differ, and are at most
// max_ngram_len tokens, the pair is counted once per hypothesis pair.
// Result is independent of utterance order and thread count.
FuzzyInventory mine_pairs(const HypothesisCorpus& corpus, int max_ngram_len,
                          int threads = 1);

// Ranked fuzzy alternatives: inventory candidates filtered by
// phonetic_similarity(phrase, candidate) >= tau_phon, first k kept.
std::vector<std::string> fuzzy_alternatives(const FuzzyInventory& inv,
                                            const std::string& phrase, int k,
                                            double tau_phon, const Lexicon& lexicon,
                                            const PhonemeInventory& phonemes);

// Bundles the references a fuzzy query needs.
struct FuzzyLookup {
  const FuzzyInventory* inventory = nullptr;
  const Lexicon* lexicon = nullptr;
  const PhonemeInventory* phonemes = nullptr;

  std::vector<std::string> alternatives(const std::string& phrase, int k,
                                        double tau_phon) const {
    if (!inventory) return {};
    return fuzzy_alternatives(*inventory, phrase, k, tau_phon, *lexicon, *phonemes);
  }
};

}  // namespace biasforge

#endif  // BIASFORGE_INVENTORY_HPP
