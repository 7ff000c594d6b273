#ifndef BIASFORGE_BIASSET_HPP
#define BIASFORGE_BIASSET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "biasforge/inventory.hpp"
#include "biasforge/rng.hpp"
#include "biasforge/tagging.hpp"
#include "biasforge/text.hpp"

namespace biasforge {

enum class PhraseOrigin { reference, fuzzy, distractor };

struct BiasPhrase {
  std::vector<std::string> tokens;
  PhraseOrigin origin = PhraseOrigin::distractor;

  std::string text() const { return join(tokens); }
};

// Ordered set of bias phrases for one example. `truth` holds the sorted
// indices of phrases present in the reference transcript. Token sequences
// are unique within a set.
struct BiasSet {
  std::vector<BiasPhrase> phrases;
  std::vector<int> truth;

  bool empty() const { return phrases.empty(); }
  std::size_t size() const { return phrases.size(); }
  bool is_truth(int idx) const;
  std::string serialize_line(const std::string& utt_id) const;
};

enum class Scheme { vanilla, nnp, fuzzy, nnp_fuzzy };

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme s);
bool scheme_uses_nnp(Scheme s);
bool scheme_uses_fuzzy(Scheme s);

struct SchemeConfig {
  Scheme scheme = Scheme::nnp_fuzzy;
  int n_max = 64;
  int k_ref = 3;
  int k_fuzzy = 3;
  int max_ngram_len = 3;  // reference n-gram length for vanilla/fuzzy schemes
  double alpha_drop = 0.0;
  double tau_phon = 0.6;
  std::uint64_t rng_seed = 0;
  // Fuzzy alternatives for sampled distractors. Default matches the scheme
  // definitions: on for `fuzzy`, off for `nnp_fuzzy` unless overridden.
  bool fuzz_distractors_override = false;
  bool fuzz_distractors_value = false;

  bool fuzz_distractors() const {
    return fuzz_distractors_override ? fuzz_distractors_value
                                     : scheme == Scheme::fuzzy;
  }
  void validate() const;
};

// Shared phrase pool the scheme fills from; materialized once per run from
// the rest of the training corpus (NNP spans for nnp schemes, word n-grams
// otherwise).
struct DistractorPool {
  std::vector<std::vector<std::string>> phrases;
};

// One training example's bias set under the configured scheme. With
// probability alpha_drop the set is empty. Pure function of
// (inputs, rng state).
BiasSet build_training_bias_set(const std::vector<std::string>& transcript,
                                const TaggedTranscript& tags,
                                const DistractorPool& pool,
                                const FuzzyLookup& fuzzy, const SchemeConfig& cfg,
                                Rng& rng);

// Test-time set: the given correct phrases plus n_distractors sampled
// without replacement from the category list (clamped), shuffled. Truth
// marks the correct phrases by provenance.
BiasSet build_test_bias_set(const std::vector<std::vector<std::string>>& correct,
                            const std::vector<std::vector<std::string>>& distractors,
                            int n_distractors, Rng& rng);

}  // namespace biasforge

#endif  // BIASFORGE_BIASSET_HPP
