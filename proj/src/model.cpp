#include "biasforge/model.hpp"

#include <bit>
#include <cmath>
#include <fstream>

#include "biasforge/errors.hpp"

namespace biasforge {

int Vocab::encode_char(char c) {
  if (c == ' ') return kSpace;
  if (c == '\'') return kApostrophe;
  if (c >= 'a' && c <= 'z') return kLetterBase + (c - 'a');
  throw DataError("character '" + std::string(1, c) +
                  "' outside grapheme vocabulary");
}

std::vector<int> Vocab::encode(const std::string& text) {
  std::vector<int> ids;
  ids.reserve(text.size());
  for (char c : text) ids.push_back(encode_char(c));
  return ids;
}

std::string Vocab::decode(const std::vector<int>& ids) {
  std::string out;
  for (int id : ids) {
    if (id == kStart || id == kEnd) continue;
    if (id == kSpace) {
      out.push_back(' ');
    } else if (id == kApostrophe) {
      out.push_back('\'');
    } else if (id >= kLetterBase && id < size()) {
      out.push_back(static_cast<char>('a' + (id - kLetterBase)));
    } else {
      throw DataError("grapheme id " + std::to_string(id) + " out of range");
    }
  }
  return out;
}

void ModelConfig::validate() const {
  if (frame_dim < 1 || embed_dim < 1 || enc_layers < 1 || enc_width < 1 ||
      bias_enc_width < 1 || dec_layers < 1 || dec_width < 1 || attn_dim < 1) {
    throw ConfigError("all model dimensions must be >= 1");
  }
}

namespace {

void add_gru(std::vector<TensorSpec>& specs, const std::string& prefix, int in,
             int hid) {
  specs.push_back({prefix + ".wz", hid, in, 0});
  specs.push_back({prefix + ".uz", hid, hid, 0});
  specs.push_back({prefix + ".bz", hid, 1, 0});
  specs.push_back({prefix + ".wr", hid, in, 0});
  specs.push_back({prefix + ".ur", hid, hid, 0});
  specs.push_back({prefix + ".br", hid, 1, 0});
  specs.push_back({prefix + ".wn", hid, in, 0});
  specs.push_back({prefix + ".un", hid, hid, 0});
  specs.push_back({prefix + ".bn", hid, 1, 0});
}

}  // namespace

ModelParams::ModelParams(const ModelConfig& cfg) : cfg_(cfg) {
  cfg.validate();
  specs_.push_back({"embed", Vocab::size(), cfg.embed_dim, 0});
  for (int l = 0; l < cfg.enc_layers; ++l) {
    add_gru(specs_, "aenc" + std::to_string(l),
            l == 0 ? cfg.frame_dim : cfg.enc_width, cfg.enc_width);
  }
  add_gru(specs_, "benc", cfg.embed_dim, cfg.bias_enc_width);
  specs_.push_back({"bias_na", cfg.bias_enc_width, 1, 0});
  specs_.push_back({"attx.wq", cfg.attn_dim, cfg.dec_width, 0});
  specs_.push_back({"attx.wh", cfg.attn_dim, cfg.enc_width, 0});
  specs_.push_back({"attx.v", cfg.attn_dim, 1, 0});
  specs_.push_back({"attz.wq", cfg.attn_dim, cfg.dec_width, 0});
  specs_.push_back({"attz.wh", cfg.attn_dim, cfg.bias_enc_width, 0});
  specs_.push_back({"attz.v", cfg.attn_dim, 1, 0});
  const int dec_in = cfg.embed_dim + cfg.enc_width + cfg.bias_enc_width;
  for (int l = 0; l < cfg.dec_layers; ++l) {
    add_gru(specs_, "dec" + std::to_string(l), l == 0 ? dec_in : cfg.dec_width,
            cfg.dec_width);
  }
  const int out_in = cfg.dec_width + cfg.enc_width + cfg.bias_enc_width;
  specs_.push_back({"out.w", Vocab::size(), out_in, 0});
  specs_.push_back({"out.b", Vocab::size(), 1, 0});

  std::size_t offset = 0;
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    specs_[i].offset = offset;
    offset += specs_[i].count();
    index_[specs_[i].name] = i;
  }
  data_.assign(offset, 0.0);
}

ModelParams ModelParams::random_init(const ModelConfig& cfg, Rng& rng,
                                     double scale) {
  ModelParams p(cfg);
  for (auto& x : p.data_) x = rng.gaussian() * scale;
  return p;
}

const TensorSpec& ModelParams::spec(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw DataError("unknown tensor '" + name + "'");
  return specs_[it->second];
}

double* ModelParams::tensor(const std::string& name) {
  return data_.data() + spec(name).offset;
}

const double* ModelParams::tensor(const std::string& name) const {
  return data_.data() + spec(name).offset;
}

void ModelParams::validate_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) throw DataError("non-finite model parameter");
  }
}

namespace {

constexpr char kMagic[4] = {'B', 'F', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

struct ByteReader {
  const std::string& buf;
  const std::string& path;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size()) {
      throw ParseError(path, 0, "truncated checkpoint at byte " + std::to_string(pos));
    }
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + static_cast<std::size_t>(i)]))
           << (8 * i);
    }
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + static_cast<std::size_t>(i)]))
           << (8 * i);
    }
    pos += 8;
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

}  // namespace

void ModelParams::save(const std::string& path) const {
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(cfg_.frame_dim));
  put_u32(out, static_cast<std::uint32_t>(cfg_.embed_dim));
  put_u32(out, static_cast<std::uint32_t>(cfg_.enc_layers));
  put_u32(out, static_cast<std::uint32_t>(cfg_.enc_width));
  put_u32(out, static_cast<std::uint32_t>(cfg_.bias_enc_width));
  put_u32(out, static_cast<std::uint32_t>(cfg_.dec_layers));
  put_u32(out, static_cast<std::uint32_t>(cfg_.dec_width));
  put_u32(out, static_cast<std::uint32_t>(cfg_.attn_dim));
  put_u32(out, static_cast<std::uint32_t>(specs_.size()));
  for (const auto& s : specs_) {
    put_u32(out, static_cast<std::uint32_t>(s.name.size()));
    out += s.name;
    put_u32(out, static_cast<std::uint32_t>(s.rows));
    put_u32(out, static_cast<std::uint32_t>(s.cols));
    for (std::size_t i = 0; i < s.count(); ++i) {
      put_u64(out, std::bit_cast<std::uint64_t>(data_[s.offset + i]));
    }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f || !f.write(out.data(), static_cast<std::streamsize>(out.size()))) {
    throw DataError("cannot write checkpoint " + path);
  }
}

ModelParams ModelParams::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError(path, 0, "cannot open checkpoint");
  std::string buf((std::istreambuf_iterator<char>(f)),
                  std::istreambuf_iterator<char>());
  ByteReader r{buf, path};
  if (r.bytes(4) != std::string(kMagic, 4)) {
    throw ParseError(path, 0, "not a checkpoint file");
  }
  if (r.u32() != kVersion) throw ParseError(path, 0, "unsupported checkpoint version");
  ModelConfig cfg;
  cfg.frame_dim = static_cast<int>(r.u32());
  cfg.embed_dim = static_cast<int>(r.u32());
  cfg.enc_layers = static_cast<int>(r.u32());
  cfg.enc_width = static_cast<int>(r.u32());
  cfg.bias_enc_width = static_cast<int>(r.u32());
  cfg.dec_layers = static_cast<int>(r.u32());
  cfg.dec_width = static_cast<int>(r.u32());
  cfg.attn_dim = static_cast<int>(r.u32());
  ModelParams p(cfg);
  const std::uint32_t count = r.u32();
  if (count != p.specs_.size()) {
    throw ParseError(path, 0, "tensor count mismatch");
  }
  for (const auto& s : p.specs_) {
    const std::uint32_t name_len = r.u32();
    if (r.bytes(name_len) != s.name) {
      throw ParseError(path, 0, "tensor name mismatch, expected '" + s.name + "'");
    }
    if (static_cast<int>(r.u32()) != s.rows || static_cast<int>(r.u32()) != s.cols) {
      throw ParseError(path, 0, "tensor shape mismatch for '" + s.name + "'");
    }
    for (std::size_t i = 0; i < s.count(); ++i) {
      p.data_[s.offset + i] = std::bit_cast<double>(r.u64());
    }
  }
  if (r.pos != buf.size()) throw ParseError(path, 0, "trailing bytes in checkpoint");
  return p;
}

}  // namespace biasforge
