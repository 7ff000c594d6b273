#ifndef BIASFORGE_CORPUS_HPP
#define BIASFORGE_CORPUS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "biasforge/phonetics.hpp"
#include "biasforge/rng.hpp"
#include "biasforge/tagging.hpp"

namespace biasforge {

// Fixed-dimension sequence of synthetic audio frames.
struct FrameSeq {
  int dim = 0;
  std::vector<std::vector<double>> frames;

  std::size_t size() const { return frames.size(); }
  void validate() const;
};

struct SynthConfig {
  int frame_dim = 16;
  int dur_min = 1;
  int dur_max = 3;
  double noise_sigma = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

// Per-phoneme prototype frames. Each phoneme's class and feature values are
// encoded as one-hot blocks and projected through a Gaussian random matrix
// drawn from a fixed internal seed, so phonemes with shared features land
// near each other and the layout depends only on the inventory and the
// frame dimension.
class PhonemePrototypes {
 public:
  PhonemePrototypes(const PhonemeInventory& inv, int frame_dim);

  int dim() const { return dim_; }
  const std::vector<double>& prototype(int phoneme_id) const {
    return protos_[static_cast<std::size_t>(phoneme_id)];
  }

 private:
  int dim_;
  std::vector<std::vector<double>> protos_;
};

// Euclidean distance averaged over all prototype pairs of the two words'
// pronunciations.
double mean_prototype_distance(const std::string& word_a, const std::string& word_b,
                               const Lexicon& lexicon, const PhonemeInventory& inv,
                               const PhonemePrototypes& protos);

// Each phoneme of the transcript's pronunciation emits a uniformly random
// duration in [dur_min, dur_max] copies of its prototype plus i.i.d. Gaussian
// noise scaled by noise_sigma.
FrameSeq synth_audio(const std::vector<std::string>& transcript,
                     const Lexicon& lexicon, const PhonemeInventory& inv,
                     const PhonemePrototypes& protos, const SynthConfig& cfg,
                     Rng& rng);

// Simulated first-pass decoding. Hypothesis 1 is the transcript itself; each
// further candidate replaces one word by a lexicon word with
// phonetic_similarity >= min_similarity (nearest alternatives tried first),
// kept with probability confusion_rate, deduplicated, up to max_hyps total.
std::vector<std::vector<std::string>> synth_hypotheses(
    const std::vector<std::string>& transcript, const Lexicon& lexicon,
    const PhonemeInventory& inv, double confusion_rate, int max_hyps, Rng& rng,
    double min_similarity = 0.6);

// One generated utterance. Spans mark the slot fillers, which are proper
// nouns by construction.
struct DatasetExample {
  std::string utt_id;
  std::vector<std::string> transcript;
  std::vector<Span> nnp_spans;
  FrameSeq frames;
};

// slot name -> candidate filler phrases.
using EntityTable = std::map<std::string, std::vector<std::vector<std::string>>>;

// Template lines are token sequences; a token of the form <SLOT> is a
// placeholder filled from the entity table.
std::vector<std::vector<std::string>> load_templates(const std::string& path);
EntityTable load_entities(const std::string& path);
bool is_slot_token(const std::string& token);
std::string slot_name(const std::string& token);

// Uniform template instantiation: per example, pick a template, fill each
// slot uniformly from its entity list, then synthesize audio. Every example
// draws from its own seed derived from cfg.seed and the utt_id, so results
// are independent of generation order and thread count.
std::vector<DatasetExample> make_dataset(
    const std::vector<std::vector<std::string>>& templates,
    const EntityTable& entities, int size, const Lexicon& lexicon,
    const PhonemeInventory& inv, const SynthConfig& cfg, int threads = 1);

// Line format: utt_id, transcript, spans, frame dim, frames. Frames are
// hex floats so round-trips are byte-exact.
std::string serialize_example(const DatasetExample& ex);
DatasetExample parse_example(const std::string& line, const std::string& file,
                             int lineno);
void write_dataset(const std::string& path, const std::vector<DatasetExample>& ds);
std::vector<DatasetExample> read_dataset(const std::string& path);

// Composition summary as sorted key=value lines: example count, per-slot
// entity counts and usage, and per-slot confusable pair count (filler pairs
// with phonetic_similarity >= min_similarity).
std::string dataset_stats(const std::vector<DatasetExample>& ds,
                          const EntityTable& entities, const Lexicon& lexicon,
                          const PhonemeInventory& inv,
                          double min_similarity = 0.6);

}  // namespace biasforge

#endif  // BIASFORGE_CORPUS_HPP
