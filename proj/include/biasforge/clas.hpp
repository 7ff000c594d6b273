#ifndef BIASFORGE_CLAS_HPP
#define BIASFORGE_CLAS_HPP

#include <string>
#include <vector>

#include "biasforge/biasset.hpp"
#include "biasforge/corpus.hpp"
#include "biasforge/model.hpp"

namespace biasforge {

// Forward cache of one gated recurrent layer over a sequence. Rows of the
// flat buffers are time steps; h holds the post-update states, so the
// previous state of step k is row k-1 (zeros for k = 0).
struct GruLayerCache {
  int in_dim = 0;
  int hid = 0;
  int steps = 0;
  std::vector<double> x, h, z, r, n, un_h;

  void resize(int in, int hidden, int nsteps);
  double* row(std::vector<double>& v, int k, int width) {
    return v.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(width);
  }
};

// Audio encoder output: stacked unidirectional gated recurrent layers, one
// state per frame. layers.back().h is the attended representation.
struct EncodedAudio {
  int frames = 0;
  std::vector<GruLayerCache> layers;

  const std::vector<double>& top() const { return layers.back().h; }
};

// Bias encoder output. Item 0 is the learned no-bias embedding; items 1..N
// are final recurrent states over each phrase's graphemes, in the set's
// original order. canon lists item indices in the fixed reduction order
// (no-bias item first, then phrases sorted by text), which makes softmax
// and context sums independent of the presentation order of the phrases.
struct EncodedBias {
  int items = 0;
  int width = 0;
  std::vector<double> emb;  // items x width
  std::vector<int> canon;
  std::vector<std::vector<int>> phrase_ids;
  std::vector<GruLayerCache> phrase_caches;

  const double* item(int i) const {
    return emb.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(width);
  }
};

EncodedAudio encode_audio(const FrameSeq& frames, const ModelParams& params);
EncodedBias encode_bias(const BiasSet& set, const ModelParams& params);

// Inference-time decoder state: stacked cell states, the previous step's
// contexts (zeros before the first step), and precomputed attention keys.
struct DecoderState {
  std::vector<double> h;       // dec_layers x dec_width
  std::vector<double> cx, cz;  // previous contexts
  std::vector<double> keys_x;  // frames x attn_dim
  std::vector<double> keys_z;  // items x attn_dim
  int step = 0;
};

DecoderState make_decoder_state(const EncodedAudio& audio, const EncodedBias& bias,
                                const ModelParams& params);

struct StepOutput {
  std::vector<double> dist;           // over graphemes, sums to 1
  std::vector<double> alpha;          // bias attention, original item order
  std::vector<double> audio_weights;  // over frames
};

// One decoding step: advance the state with the previous grapheme and the
// previous contexts, attend to audio and bias items with the new state, and
// emit the grapheme distribution. Throws TrainingFault on non-finite
// intermediates.
StepOutput decode_step(DecoderState& state, const EncodedAudio& audio,
                       const EncodedBias& bias, int prev_label,
                       const ModelParams& params);

// One training example: frames, grapheme reference ending with the end
// symbol, and the bias set presented with it.
struct TrainingExample {
  const FrameSeq* frames = nullptr;
  std::vector<int> reference;
  const BiasSet* bias = nullptr;
};

// Teacher-forced negative log-likelihood of the reference.
double loss_only(const TrainingExample& ex, const ModelParams& params);

// Same value plus exact reverse-mode gradients for every parameter; grads is
// resized to the parameter count and overwritten.
double loss_and_gradients(const TrainingExample& ex, const ModelParams& params,
                          std::vector<double>& grads);

// Per-step attention rows of a decoded hypothesis. Bias columns follow the
// set's original order; labels[0] names the no-bias item.
struct AttentionTrace {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> bias_rows;
  std::vector<std::vector<double>> audio_rows;
};

struct DecodeResult {
  std::vector<int> ids;  // emitted graphemes, end symbol excluded
  std::string text;
  double score = 0.0;  // log-probability / emitted length
  AttentionTrace trace;
};

// Length-normalized beam search; beam_width 1 is greedy argmax. max_len 0
// means 4x the frame count. Candidate ties break by higher accumulated
// log-probability, then parent beam order, then grapheme id.
DecodeResult decode(const FrameSeq& frames, const BiasSet& set,
                    const ModelParams& params, int beam_width, int max_len = 0);

struct TrainConfig {
  int epochs = 10;
  int batch_size = 16;
  double lr = 0.1;
  double clip_norm = 5.0;
  double init_scale = 0.1;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct TrainLogRow {
  int step = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
};

std::string train_log_csv(const std::vector<TrainLogRow>& log);

struct TrainResult {
  ModelParams params;
  std::vector<TrainLogRow> log;
};

// Mini-batch gradient descent with norm clipping. Bias sets are rebuilt
// every epoch from per-example derived seeds; example order is reshuffled
// per epoch. Batch gradients are computed into per-example slots and summed
// in example order, so results are identical for any thread count. Throws
// TrainingFault (with the log so far attached) if the loss goes non-finite.
TrainResult train(const std::vector<DatasetExample>& dataset,
                  const DistractorPool& pool, const FuzzyLookup& fuzzy,
                  const SchemeConfig& scheme, const ModelConfig& mcfg,
                  const TrainConfig& tcfg);

}  // namespace biasforge

#endif  // BIASFORGE_CLAS_HPP
