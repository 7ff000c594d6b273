#ifndef BIASFORGE_MODEL_HPP
#define BIASFORGE_MODEL_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "biasforge/rng.hpp"

namespace biasforge {

// Grapheme vocabulary: start, end, space, apostrophe, a..z.
struct Vocab {
  static constexpr int kStart = 0;
  static constexpr int kEnd = 1;
  static constexpr int kSpace = 2;
  static constexpr int kApostrophe = 3;
  static constexpr int kLetterBase = 4;

  static constexpr int size() { return kLetterBase + 26; }

  // Throws DataError on characters outside the vocabulary.
  static int encode_char(char c);
  // Grapheme ids of the text, without start/end markers.
  static std::vector<int> encode(const std::string& text);
  // Renders printable graphemes; start/end ids are skipped.
  static std::string decode(const std::vector<int>& ids);
};

struct ModelConfig {
  int frame_dim = 16;
  int embed_dim = 16;
  int enc_layers = 2;
  int enc_width = 64;
  int bias_enc_width = 64;
  int dec_layers = 1;
  int dec_width = 64;
  int attn_dim = 64;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

struct TensorSpec {
  std::string name;
  int rows = 0;
  int cols = 0;  // 1 for vectors
  std::size_t offset = 0;

  std::size_t count() const {
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }
};

// All model weights in one flat vector, addressed through a registry of
// named tensors. The registry layout is a pure function of ModelConfig, so
// flat indices are stable across runs and the whole vector doubles as the
// gradient layout.
class ModelParams {
 public:
  explicit ModelParams(const ModelConfig& cfg);
  static ModelParams random_init(const ModelConfig& cfg, Rng& rng,
                                 double scale = 0.1);

  const ModelConfig& config() const { return cfg_; }
  std::size_t size() const { return data_.size(); }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  const std::vector<TensorSpec>& tensors() const { return specs_; }
  const TensorSpec& spec(const std::string& name) const;
  double* tensor(const std::string& name);
  const double* tensor(const std::string& name) const;

  // Throws DataError on any non-finite weight.
  void validate_finite() const;

  void save(const std::string& path) const;
  static ModelParams load(const std::string& path);

 private:
  ModelConfig cfg_;
  std::vector<double> data_;
  std::vector<TensorSpec> specs_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace biasforge

#endif  // BIASFORGE_MODEL_HPP
