#ifndef BIASFORGE_PHONETICS_HPP
#define BIASFORGE_PHONETICS_HPP

#include <array>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace biasforge {

enum class PhonemeClass { consonant, vowel };

// One entry of the phoneme feature table. Consonant feature slots are
// place/manner/voicing; vowel slots are height/backness/rounding.
struct Phoneme {
  std::string symbol;
  PhonemeClass cls;
  std::array<std::string, 3> features;
};

// Ordered list of phoneme ids, resolved against a PhonemeInventory.
struct PhonemeSeq {
  std::vector<int> ids;

  bool empty() const { return ids.empty(); }
  std::size_t size() const { return ids.size(); }
  bool operator==(const PhonemeSeq&) const = default;
};

// Fixed inventory of phoneme symbols with complete feature assignments.
// Substitution costs are precomputed at load: phonemes of the same class
// cost (#differing feature slots)/3, across the consonant/vowel boundary
// the cost is 1. Feature triples must be unique within a class so that
// cost(a,b) == 0 iff a == b; the loader rejects tables violating this.
class PhonemeInventory {
 public:
  // The built-in 39-symbol ARPAbet-style table.
  static const PhonemeInventory& builtin();
  static PhonemeInventory from_file(const std::string& path);
  static PhonemeInventory parse(std::istream& in, const std::string& name);

  std::size_t size() const { return phonemes_.size(); }
  const Phoneme& at(int id) const { return phonemes_[static_cast<std::size_t>(id)]; }

  // -1 if the symbol is not in the inventory.
  int find(const std::string& symbol) const;
  // Throws DataError on unknown symbol.
  int id(const std::string& symbol) const;

  double substitution_cost(int a, int b) const {
    return cost_[static_cast<std::size_t>(a) * phonemes_.size() +
                 static_cast<std::size_t>(b)];
  }

  PhonemeSeq seq(const std::vector<std::string>& symbols) const;
  std::string spell(const PhonemeSeq& seq) const;

 private:
  void finalize(const std::string& source_name);

  std::vector<Phoneme> phonemes_;
  std::map<std::string, int> index_;
  std::vector<double> cost_;
};

// word -> pronunciations. Words are lowercase and whitespace-free; duplicate
// words in a file accumulate pronunciations in file order.
class Lexicon {
 public:
  Lexicon() = default;
  static Lexicon from_file(const PhonemeInventory& inv, const std::string& path);
  static Lexicon parse(const PhonemeInventory& inv, std::istream& in,
                       const std::string& name);

  void add(const std::string& word, PhonemeSeq pron);

  // nullptr if the word has no entry.
  const std::vector<PhonemeSeq>* find(const std::string& word) const;
  std::vector<std::string> words() const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, std::vector<PhonemeSeq>> entries_;
};

// Pronunciation of a word n-gram: first-listed pronunciation per word,
// concatenated. Out-of-lexicon words go through the built-in deterministic
// letter rule table, so the function is total.
PhonemeSeq to_phonemes(const std::vector<std::string>& phrase,
                       const Lexicon& lexicon, const PhonemeInventory& inv);

// Weighted edit distance: substitution cost from the inventory,
// insertion/deletion cost 1.
double weighted_edit_distance(const PhonemeSeq& a, const PhonemeSeq& b,
                              const PhonemeInventory& inv);

// 1 - WED(a,b)/max(|a|,|b|); both sequences empty -> 1.
double phonetic_similarity(const PhonemeSeq& a, const PhonemeSeq& b,
                           const PhonemeInventory& inv);

}  // namespace biasforge

#endif  // BIASFORGE_PHONETICS_HPP
