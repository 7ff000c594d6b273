#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "biasforge/biasset.hpp"
#include "biasforge/clas.hpp"
#include "biasforge/inventory.hpp"
#include "biasforge/parallel.hpp"
#include "biasforge/rng.hpp"

namespace bf = biasforge;

namespace {

// Hypothesis corpus with word-level confusions, big enough that the
// pairwise mining loop dominates.
const bf::HypothesisCorpus& mining_corpus() {
  static const bf::HypothesisCorpus corpus = [] {
    const std::vector<std::string> words = {"joan", "john", "jean", "carl",
                                            "carol", "erin", "aaron", "dana"};
    bf::HypothesisCorpus c;
    bf::Rng rng(17);
    for (int u = 0; u < 300; ++u) {
      bf::HypothesisCorpus::Utterance utt;
      utt.utt_id = "u" + std::to_string(u);
      for (int h = 0; h < 12; ++h) {
        std::vector<std::string> hyp = {"call", words[rng.uniform_u64(words.size())],
                                        "now"};
        if (rng.uniform_real() < 0.5) hyp.push_back("please");
        bool dup = false;
        for (const auto& prev : utt.hypotheses) dup = dup || prev == hyp;
        if (!dup) utt.hypotheses.push_back(std::move(hyp));
      }
      c.utterances.push_back(std::move(utt));
    }
    return c;
  }();
  return corpus;
}

void bench_mine_pairs(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  const bf::HypothesisCorpus& corpus = mining_corpus();
  for (auto _ : state) {
    bf::FuzzyInventory inv = bf::mine_pairs(corpus, 3, threads);
    benchmark::DoNotOptimize(inv.num_phrases());
  }
}

struct GradFixture {
  bf::ModelConfig cfg;
  bf::ModelParams params;
  std::vector<bf::FrameSeq> frames;
  std::vector<std::vector<int>> refs;
  std::vector<bf::BiasSet> sets;

  GradFixture() : params(make_params(cfg)) {
    bf::Rng rng(5);
    const std::vector<std::string> names = {"joan", "john", "carl", "erin"};
    for (int i = 0; i < 32; ++i) {
      bf::FrameSeq f;
      f.dim = cfg.frame_dim;
      for (int k = 0; k < 10; ++k) {
        std::vector<double> row(static_cast<std::size_t>(cfg.frame_dim));
        for (double& v : row) v = rng.gaussian();
        f.frames.push_back(std::move(row));
      }
      frames.push_back(std::move(f));
      const std::string& name = names[static_cast<std::size_t>(i) % names.size()];
      std::vector<int> ref = bf::Vocab::encode("call " + name);
      ref.push_back(bf::Vocab::kEnd);
      refs.push_back(std::move(ref));
      std::vector<std::vector<std::string>> distractors;
      for (const std::string& n : names) {
        if (n != name) distractors.push_back({n});
      }
      bf::Rng set_rng(bf::derive_seed(7, "set" + std::to_string(i)));
      sets.push_back(bf::build_test_bias_set({{name}}, distractors, 3, set_rng));
    }
  }

  static bf::ModelParams make_params(bf::ModelConfig& cfg) {
    cfg.frame_dim = 8;
    cfg.embed_dim = 8;
    cfg.enc_layers = 1;
    cfg.enc_width = 16;
    cfg.bias_enc_width = 16;
    cfg.dec_layers = 1;
    cfg.dec_width = 16;
    cfg.attn_dim = 8;
    bf::Rng rng(3);
    return bf::ModelParams::random_init(cfg, rng, 0.1);
  }
};

// Per-example gradient slots, exactly the shape of one training batch.
void bench_batch_gradients(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  static const GradFixture fx;
  const std::size_t n = fx.frames.size();
  std::vector<std::vector<double>> slots(n);
  std::vector<double> losses(n, 0.0);
  for (auto _ : state) {
    bf::parallel_for(n, threads, [&](std::size_t i) {
      bf::TrainingExample ex;
      ex.frames = &fx.frames[i];
      ex.reference = fx.refs[i];
      ex.bias = &fx.sets[i];
      losses[i] = bf::loss_and_gradients(ex, fx.params, slots[i]);
    });
    benchmark::DoNotOptimize(losses.data());
  }
}

}  // namespace

BENCHMARK(bench_mine_pairs)->Arg(1)->Arg(bf::hardware_threads())->Unit(benchmark::kMillisecond);
BENCHMARK(bench_batch_gradients)->Arg(1)->Arg(bf::hardware_threads())->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
