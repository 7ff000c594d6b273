#ifndef BIASFORGE_HARNESS_HPP
#define BIASFORGE_HARNESS_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "biasforge/biasset.hpp"
#include "biasforge/clas.hpp"
#include "biasforge/corpus.hpp"

namespace biasforge {

// Minimal word-level edit distance; wer = (S + D + I) / |ref|. Alignment
// ties prefer a substitution over a deletion-insertion pair.
struct WerResult {
  double wer = 0.0;
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  int ref_words = 0;
};

WerResult wer(const std::vector<std::string>& ref,
              const std::vector<std::string>& hyp);

// One test utterance with its prepared bias set. frames points into the
// dataset the set was built from.
struct TestExample {
  std::string utt_id;
  std::vector<std::string> transcript;
  const FrameSeq* frames = nullptr;
  BiasSet bias;
};

struct EvalOptions {
  int beam_width = 4;
  int threads = 1;
};

struct EvalRow {
  std::string model;
  std::string test_set;
  int utterances = 0;
  int ref_words = 0;
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  double wer = 0.0;
};

struct SweepPoint {
  int n_distractors = 0;
  double wer = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::vector<std::pair<std::string, std::vector<SweepPoint>>> sweeps;
};

// Tab-separated lines with hex-float WER values; parse(serialize(r))
// reproduces r exactly.
std::string serialize_report(const EvalReport& report);
EvalReport parse_report(const std::string& text);

// Decodes every utterance and aggregates the error counts. Model parameters
// are read-only. hyps, when non-null, receives the decoded texts in order.
EvalRow evaluate(const ModelParams& params, const std::vector<TestExample>& set,
                 const EvalOptions& opt, std::vector<std::string>* hyps = nullptr);

struct NamedModel {
  std::string name;
  const ModelParams* params = nullptr;
};

// Evaluates every model on every named test set. The models must share one
// architecture config, and every model sees the same bias sets.
EvalReport run_comparison(
    const std::vector<NamedModel>& models,
    const std::vector<std::pair<std::string, std::vector<TestExample>>>& sets,
    const EvalOptions& opt);

// Per-utterance sets: every tagged span becomes a correct phrase, plus
// n_distractors sampled from the pool.
std::vector<TestExample> make_test_set(const std::vector<DatasetExample>& data,
                                       const DistractorPool& pool,
                                       int n_distractors, std::uint64_t seed);

// Sets with the first tagged span as the single correct phrase, n_fuzzy
// phonetic alternatives (mined alternatives first, padded with the nearest
// lexicon words by similarity), and n_random pool distractors.
std::vector<TestExample> make_fuzzy_test_set(
    const std::vector<DatasetExample>& data, const FuzzyLookup& fuzzy,
    const DistractorPool& pool, int n_fuzzy, int n_random, double tau_phon,
    std::uint64_t seed);

// WER at each distractor count. Points must be sorted strictly ascending
// and start at 0; sets are rebuilt per point from derived seeds.
std::vector<SweepPoint> distractor_sweep(const ModelParams& params,
                                         const std::vector<DatasetExample>& data,
                                         const DistractorPool& pool,
                                         const std::vector<int>& points,
                                         std::uint64_t seed,
                                         const EvalOptions& opt);

struct AttentionUtt {
  std::string utt_id;
  double mass_on_truth = 0.0;
  double top1_truth_rate = 0.0;
  double entropy = 0.0;
};

struct AttentionReport {
  double mean_mass_on_truth = 0.0;
  double mean_top1_truth_rate = 0.0;
  double mean_entropy = 0.0;
  std::vector<AttentionUtt> utts;
};

// Bias-attention statistics of decoded hypotheses. mass_on_truth averages
// the summed truth-item weights over the steps emitting the truth phrase,
// located by exact substring match on the reference text; if no usable
// window remains the whole hypothesis counts. Entropy averages over all
// steps. trace_lines, when non-null, receives per-step weight records.
AttentionReport attention_metrics(const ModelParams& params,
                                  const std::vector<TestExample>& set,
                                  const EvalOptions& opt,
                                  std::vector<std::string>* trace_lines = nullptr);

// Distractor pools, sorted for run-to-run stability: the distinct tagged
// span phrases of a dataset, its distinct word n-grams up to max_len
// tokens, or one tokenized phrase per non-blank line of a file.
DistractorPool span_pool(const std::vector<DatasetExample>& data);
DistractorPool ngram_pool(const std::vector<DatasetExample>& data, int max_len);
DistractorPool pool_from_file(const std::string& path);

// 64-bit FNV-1a digests; evaluation must leave both unchanged.
std::uint64_t params_hash(const ModelParams& params);
std::uint64_t bias_sets_hash(const std::vector<TestExample>& set);

std::string comparison_csv(const EvalReport& report);
std::string sweep_csv(const EvalReport& report);
std::string sweep_svg(const EvalReport& report);
std::string trace_heatmap_svg(const AttentionTrace& trace);

// Writes comparison.csv, sweep.csv and sweep.svg under dir.
void emit_plots(const EvalReport& report, const std::string& dir);

}  // namespace biasforge

#endif  // BIASFORGE_HARNESS_HPP
