#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "biasforge/errors.hpp"
#include "biasforge/model.hpp"
#include "biasforge/rng.hpp"
#include "doctest.h"

using namespace biasforge;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(static_cast<bool>(f));
  return std::string((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  REQUIRE(static_cast<bool>(f));
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.frame_dim = 4;
  cfg.embed_dim = 3;
  cfg.enc_layers = 1;
  cfg.enc_width = 5;
  cfg.bias_enc_width = 6;
  cfg.dec_layers = 1;
  cfg.dec_width = 7;
  cfg.attn_dim = 2;
  return cfg;
}

}  // namespace

TEST_CASE("grapheme vocabulary round-trips printable text") {
  CHECK(Vocab::size() == 30);
  CHECK(Vocab::encode_char(' ') == Vocab::kSpace);
  CHECK(Vocab::encode_char('\'') == Vocab::kApostrophe);
  CHECK(Vocab::encode_char('a') == Vocab::kLetterBase);
  CHECK(Vocab::encode_char('z') == Vocab::kLetterBase + 25);

  const std::string text = "call o'brien now";
  auto ids = Vocab::encode(text);
  CHECK(ids.size() == text.size());
  CHECK(Vocab::decode(ids) == text);

  // Start/end markers vanish on decode.
  std::vector<int> framed = {Vocab::kStart};
  framed.insert(framed.end(), ids.begin(), ids.end());
  framed.push_back(Vocab::kEnd);
  CHECK(Vocab::decode(framed) == text);

  CHECK(Vocab::encode("").empty());
  CHECK(Vocab::decode({}) == "");
}

TEST_CASE("grapheme vocabulary rejects out-of-range input") {
  CHECK_THROWS_AS(Vocab::encode_char('A'), DataError);
  CHECK_THROWS_AS(Vocab::encode_char('0'), DataError);
  CHECK_THROWS_AS(Vocab::encode_char('-'), DataError);
  CHECK_THROWS_AS(Vocab::encode("call\tjoan"), DataError);
  CHECK_THROWS_AS(Vocab::decode({Vocab::size()}), DataError);
  CHECK_THROWS_AS(Vocab::decode({-1}), DataError);
}

TEST_CASE("model config validation requires positive dimensions") {
  ModelConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  for (int* dim : {&cfg.frame_dim, &cfg.embed_dim, &cfg.enc_layers,
                   &cfg.enc_width, &cfg.bias_enc_width, &cfg.dec_layers,
                   &cfg.dec_width, &cfg.attn_dim}) {
    int saved = *dim;
    *dim = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    *dim = -3;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    *dim = saved;
  }
  CHECK_THROWS_AS(ModelParams(ModelConfig{.enc_width = 0}), ConfigError);
}

TEST_CASE("registry layout is a pure function of the config") {
  ModelConfig cfg = tiny_config();
  ModelParams a(cfg);
  ModelParams b(cfg);

  REQUIRE(a.tensors().size() == b.tensors().size());
  for (std::size_t i = 0; i < a.tensors().size(); ++i) {
    CHECK(a.tensors()[i].name == b.tensors()[i].name);
    CHECK(a.tensors()[i].rows == b.tensors()[i].rows);
    CHECK(a.tensors()[i].cols == b.tensors()[i].cols);
    CHECK(a.tensors()[i].offset == b.tensors()[i].offset);
  }

  // Offsets tile the flat vector with no gaps.
  std::size_t expect = 0;
  for (const auto& s : a.tensors()) {
    CHECK(s.offset == expect);
    expect += s.count();
  }
  CHECK(a.size() == expect);

  // Hand count for the tiny config: embed 30x3, audio GRU(4,5),
  // bias GRU(3,6) + n/a vector, two attention heads (q 7, dim 2),
  // decoder GRU(3+5+6,7), readout 30x(7+5+6)+30.
  const std::size_t gru_a = 3 * (5 * 4 + 5 * 5 + 5);
  const std::size_t gru_b = 3 * (6 * 3 + 6 * 6 + 6);
  const std::size_t gru_d = 3 * (7 * 14 + 7 * 7 + 7);
  const std::size_t attn = (2 * 7 + 2 * 5 + 2) + (2 * 7 + 2 * 6 + 2);
  CHECK(a.size() == 90 + gru_a + gru_b + 6 + attn + gru_d + 540 + 30);
  CHECK(a.size() == 1512);

  CHECK(a.spec("embed").offset == 0);
  CHECK(a.spec("embed").rows == Vocab::size());
  CHECK(a.spec("embed").cols == cfg.embed_dim);
  CHECK(a.spec("bias_na").rows == cfg.bias_enc_width);
  CHECK(a.spec("bias_na").cols == 1);
  CHECK(a.spec("attz.wh").cols == cfg.bias_enc_width);
  CHECK(a.spec("attx.wh").cols == cfg.enc_width);
  CHECK(a.spec("out.w").rows == Vocab::size());
  CHECK(a.spec("dec0.wz").cols == cfg.embed_dim + cfg.enc_width + cfg.bias_enc_width);
  CHECK_THROWS_AS(a.spec("nope"), DataError);
  CHECK_THROWS_AS(a.tensor("aenc2.wz"), DataError);

  CHECK(a.tensor("bias_na") == a.data().data() + a.spec("bias_na").offset);

  // Two-layer audio encoder stacks on the first layer's width.
  cfg.enc_layers = 2;
  ModelParams c(cfg);
  CHECK(c.spec("aenc0.wz").cols == cfg.frame_dim);
  CHECK(c.spec("aenc1.wz").cols == cfg.enc_width);

  // The experiment configuration (narrow audio path, wide bias path)
  // stays desk sized.
  ModelConfig bench;
  bench.frame_dim = 8;
  bench.embed_dim = 10;
  bench.enc_width = 20;
  bench.dec_width = 20;
  CHECK(ModelParams(bench).size() <= 100000);
}

TEST_CASE("random init is seed deterministic") {
  ModelConfig cfg = tiny_config();
  Rng r1(77), r2(77), r3(78);
  ModelParams a = ModelParams::random_init(cfg, r1);
  ModelParams b = ModelParams::random_init(cfg, r2);
  ModelParams c = ModelParams::random_init(cfg, r3);
  CHECK(a.data() == b.data());
  CHECK(a.data() != c.data());

  Rng r4(77);
  ModelParams z = ModelParams::random_init(cfg, r4, 0.0);
  for (double v : z.data()) CHECK(v == 0.0);

  double max_abs = 0.0;
  for (double v : a.data()) max_abs = std::max(max_abs, std::abs(v));
  CHECK(max_abs > 0.0);
  CHECK(max_abs < 1.0);  // scale 0.1 keeps draws small
  a.validate_finite();
}

TEST_CASE("checkpoint save and load round-trip byte exactly") {
  ModelConfig cfg = tiny_config();
  Rng rng(2024);
  ModelParams p = ModelParams::random_init(cfg, rng);
  // Values that expose any text formatting or float narrowing.
  p.data()[0] = -0.0;
  p.data()[1] = 0x1.fffffffffffffp-3;
  p.data()[2] = std::numeric_limits<double>::denorm_min();
  p.data()[3] = 1e300;

  const std::string path1 = "/tmp/biasforge_test_ckpt1.bin";
  const std::string path2 = "/tmp/biasforge_test_ckpt2.bin";
  p.save(path1);
  ModelParams q = ModelParams::load(path1);
  CHECK(q.config() == p.config());
  REQUIRE(q.size() == p.size());
  CHECK(q.data() == p.data());
  CHECK(std::signbit(q.data()[0]));

  q.save(path2);
  CHECK(slurp(path1) == slurp(path2));
  std::remove(path1.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("checkpoint load rejects malformed files") {
  CHECK_THROWS_AS(ModelParams::load("/tmp/biasforge_no_such_ckpt.bin"),
                  ParseError);

  ModelConfig cfg = tiny_config();
  Rng rng(5);
  ModelParams p = ModelParams::random_init(cfg, rng);
  const std::string path = "/tmp/biasforge_test_ckpt_bad.bin";
  p.save(path);
  const std::string good = slurp(path);

  spit(path, good.substr(0, good.size() - 5));
  CHECK_THROWS_AS(ModelParams::load(path), ParseError);

  spit(path, good + "xx");
  CHECK_THROWS_AS(ModelParams::load(path), ParseError);

  std::string magic = good;
  magic[0] = 'X';
  spit(path, magic);
  CHECK_THROWS_AS(ModelParams::load(path), ParseError);

  std::string version = good;
  version[4] = 9;
  spit(path, version);
  CHECK_THROWS_AS(ModelParams::load(path), ParseError);

  std::remove(path.c_str());
}

TEST_CASE("non-finite weights are rejected") {
  ModelParams p{tiny_config()};
  CHECK_NOTHROW(p.validate_finite());
  p.tensor("out.b")[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(p.validate_finite(), DataError);
  p.tensor("out.b")[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(p.validate_finite(), DataError);
  p.tensor("out.b")[0] = 0.0;
  CHECK_NOTHROW(p.validate_finite());
}
