#include "biasforge/clas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "biasforge/errors.hpp"

namespace biasforge {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double dot(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// y = W x
void matvec(const double* w, const double* x, double* y, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    y[r] = dot(w + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols), x, cols);
  }
}

// y += W x
void matvec_add(const double* w, const double* x, double* y, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    y[r] += dot(w + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols), x, cols);
  }
}

// y += W^T g
void matvec_t_add(const double* w, const double* g, double* y, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const double gr = g[r];
    const double* wr = w + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols);
    for (int c = 0; c < cols; ++c) y[c] += wr[c] * gr;
  }
}

// G += g x^T
void outer_add(double* gw, const double* g, const double* x, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const double gr = g[r];
    double* row = gw + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols);
    for (int c = 0; c < cols; ++c) row[c] += gr * x[c];
  }
}

struct GruW {
  const double *wz, *uz, *bz, *wr, *ur, *br, *wn, *un, *bn;
  int in, hid;
};

GruW gru_w(const ModelParams& p, const std::string& prefix) {
  GruW w{};
  w.wz = p.tensor(prefix + ".wz");
  w.uz = p.tensor(prefix + ".uz");
  w.bz = p.tensor(prefix + ".bz");
  w.wr = p.tensor(prefix + ".wr");
  w.ur = p.tensor(prefix + ".ur");
  w.br = p.tensor(prefix + ".br");
  w.wn = p.tensor(prefix + ".wn");
  w.un = p.tensor(prefix + ".un");
  w.bn = p.tensor(prefix + ".bn");
  const TensorSpec& s = p.spec(prefix + ".wz");
  w.in = s.cols;
  w.hid = s.rows;
  return w;
}

struct GruG {
  double *wz, *uz, *bz, *wr, *ur, *br, *wn, *un, *bn;
};

GruG gru_g(const ModelParams& p, std::vector<double>& grads,
           const std::string& prefix) {
  GruG g{};
  g.wz = grads.data() + p.spec(prefix + ".wz").offset;
  g.uz = grads.data() + p.spec(prefix + ".uz").offset;
  g.bz = grads.data() + p.spec(prefix + ".bz").offset;
  g.wr = grads.data() + p.spec(prefix + ".wr").offset;
  g.ur = grads.data() + p.spec(prefix + ".ur").offset;
  g.br = grads.data() + p.spec(prefix + ".br").offset;
  g.wn = grads.data() + p.spec(prefix + ".wn").offset;
  g.un = grads.data() + p.spec(prefix + ".un").offset;
  g.bn = grads.data() + p.spec(prefix + ".bn").offset;
  return g;
}

// z = sigma(Wz x + Uz hp + bz), r = sigma(Wr x + Ur hp + br),
// n = tanh(Wn x + r * (Un hp) + bn), h = (1 - z) * n + z * hp.
// A null hp stands for the zero initial state. h_out may alias hp: the final
// update reads and writes element-wise.
void gru_step(const GruW& w, const double* x, const double* hp, double* z,
              double* r, double* n, double* unh, double* h_out) {
  const int H = w.hid;
  for (int j = 0; j < H; ++j) z[j] = w.bz[j];
  matvec_add(w.wz, x, z, H, w.in);
  if (hp) matvec_add(w.uz, hp, z, H, H);
  for (int j = 0; j < H; ++j) z[j] = sigmoid(z[j]);

  for (int j = 0; j < H; ++j) r[j] = w.br[j];
  matvec_add(w.wr, x, r, H, w.in);
  if (hp) matvec_add(w.ur, hp, r, H, H);
  for (int j = 0; j < H; ++j) r[j] = sigmoid(r[j]);

  if (hp) {
    matvec(w.un, hp, unh, H, H);
  } else {
    std::fill(unh, unh + H, 0.0);
  }

  for (int j = 0; j < H; ++j) n[j] = w.bn[j] + r[j] * unh[j];
  matvec_add(w.wn, x, n, H, w.in);
  for (int j = 0; j < H; ++j) n[j] = std::tanh(n[j]);

  for (int j = 0; j < H; ++j) {
    h_out[j] = (1.0 - z[j]) * n[j] + (hp ? z[j] * hp[j] : 0.0);
  }
}

// Reverse of gru_step at step k of a cached layer. dh is the full gradient
// on h_k; dx is overwritten, dhp accumulated (null when k == 0, where the
// previous state is the constant zero vector).
void gru_step_backward(const GruW& w, const GruG& g, GruLayerCache& c, int k,
                       const double* dh, double* dx, double* dhp) {
  const int H = w.hid;
  const int I = w.in;
  const double* x = c.row(c.x, k, I);
  const double* hp = k > 0 ? c.row(c.h, k - 1, H) : nullptr;
  const double* z = c.row(c.z, k, H);
  const double* r = c.row(c.r, k, H);
  const double* n = c.row(c.n, k, H);
  const double* unh = c.row(c.un_h, k, H);

  std::vector<double> dan(static_cast<std::size_t>(H));
  std::vector<double> dar(static_cast<std::size_t>(H));
  std::vector<double> daz(static_cast<std::size_t>(H));
  std::vector<double> dunh(static_cast<std::size_t>(H));
  for (int j = 0; j < H; ++j) {
    const double hpj = hp ? hp[j] : 0.0;
    const double dz = dh[j] * (hpj - n[j]);
    const double dn = dh[j] * (1.0 - z[j]);
    if (dhp) dhp[j] += dh[j] * z[j];
    dan[static_cast<std::size_t>(j)] = dn * (1.0 - n[j] * n[j]);
    daz[static_cast<std::size_t>(j)] = dz * z[j] * (1.0 - z[j]);
  }
  for (int j = 0; j < H; ++j) {
    const double dr = dan[static_cast<std::size_t>(j)] * unh[j];
    dar[static_cast<std::size_t>(j)] = dr * r[j] * (1.0 - r[j]);
    dunh[static_cast<std::size_t>(j)] = dan[static_cast<std::size_t>(j)] * r[j];
  }

  std::fill(dx, dx + I, 0.0);
  outer_add(g.wn, dan.data(), x, H, I);
  for (int j = 0; j < H; ++j) g.bn[j] += dan[static_cast<std::size_t>(j)];
  matvec_t_add(w.wn, dan.data(), dx, H, I);
  if (hp) {
    outer_add(g.un, dunh.data(), hp, H, H);
    matvec_t_add(w.un, dunh.data(), dhp, H, H);
  }

  outer_add(g.wr, dar.data(), x, H, I);
  for (int j = 0; j < H; ++j) g.br[j] += dar[static_cast<std::size_t>(j)];
  matvec_t_add(w.wr, dar.data(), dx, H, I);
  if (hp) {
    outer_add(g.ur, dar.data(), hp, H, H);
    matvec_t_add(w.ur, dar.data(), dhp, H, H);
  }

  outer_add(g.wz, daz.data(), x, H, I);
  for (int j = 0; j < H; ++j) g.bz[j] += daz[static_cast<std::size_t>(j)];
  matvec_t_add(w.wz, daz.data(), dx, H, I);
  if (hp) {
    outer_add(g.uz, daz.data(), hp, H, H);
    matvec_t_add(w.uz, daz.data(), dhp, H, H);
  }
}

void gru_layer_forward(const GruW& w, const double* input, int steps,
                       GruLayerCache& c) {
  c.resize(w.in, w.hid, steps);
  std::copy(input,
            input + static_cast<std::size_t>(steps) * static_cast<std::size_t>(w.in),
            c.x.begin());
  for (int k = 0; k < steps; ++k) {
    gru_step(w, c.row(c.x, k, w.in), k > 0 ? c.row(c.h, k - 1, w.hid) : nullptr,
             c.row(c.z, k, w.hid), c.row(c.r, k, w.hid), c.row(c.n, k, w.hid),
             c.row(c.un_h, k, w.hid), c.row(c.h, k, w.hid));
  }
}

// dh_out: steps x hid gradient on the layer outputs; dx_out: steps x in,
// overwritten with the gradient on the layer inputs.
void gru_layer_backward(const GruW& w, const GruG& g, GruLayerCache& c,
                        const double* dh_out, double* dx_out) {
  std::vector<double> carry(static_cast<std::size_t>(w.hid), 0.0);
  std::vector<double> next(static_cast<std::size_t>(w.hid), 0.0);
  std::vector<double> total(static_cast<std::size_t>(w.hid));
  for (int k = c.steps - 1; k >= 0; --k) {
    for (int j = 0; j < w.hid; ++j) {
      total[static_cast<std::size_t>(j)] =
          dh_out[static_cast<std::size_t>(k) * static_cast<std::size_t>(w.hid) +
                 static_cast<std::size_t>(j)] +
          carry[static_cast<std::size_t>(j)];
    }
    std::fill(next.begin(), next.end(), 0.0);
    gru_step_backward(w, g, c, k, total.data(),
                      dx_out + static_cast<std::size_t>(k) * static_cast<std::size_t>(w.in),
                      k > 0 ? next.data() : nullptr);
    carry.swap(next);
  }
}

struct AttnW {
  const double* wq;
  const double* wh;
  const double* v;
  int attn, qdim, hdim;
};

AttnW attn_w(const ModelParams& p, const std::string& prefix) {
  AttnW w{};
  w.wq = p.tensor(prefix + ".wq");
  w.wh = p.tensor(prefix + ".wh");
  w.v = p.tensor(prefix + ".v");
  w.attn = p.spec(prefix + ".wq").rows;
  w.qdim = p.spec(prefix + ".wq").cols;
  w.hdim = p.spec(prefix + ".wh").cols;
  return w;
}

// Additive attention over `items` entries. score_i = v . tanh(Wq q + key_i)
// with key_i = Wh h_i precomputed. The softmax and context reductions run in
// `order` (null = natural), which pins the summation order. weights and ctx
// are overwritten; tanh_out (items x attn) is filled when non-null.
void attend_forward(const AttnW& w, const double* keys, const double* values,
                    int items, int vdim, const int* order, const double* q,
                    double* weights, double* ctx, double* tanh_out) {
  std::vector<double> wqq(static_cast<std::size_t>(w.attn));
  matvec(w.wq, q, wqq.data(), w.attn, w.qdim);
  std::vector<double> scores(static_cast<std::size_t>(items));
  std::vector<double> tlocal(static_cast<std::size_t>(w.attn));
  for (int i = 0; i < items; ++i) {
    double* t = tanh_out
                    ? tanh_out + static_cast<std::size_t>(i) * static_cast<std::size_t>(w.attn)
                    : tlocal.data();
    const double* key = keys + static_cast<std::size_t>(i) * static_cast<std::size_t>(w.attn);
    for (int a = 0; a < w.attn; ++a) {
      t[a] = std::tanh(wqq[static_cast<std::size_t>(a)] + key[a]);
    }
    scores[static_cast<std::size_t>(i)] = dot(w.v, t, w.attn);
  }
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < items; ++i) {
    const int idx = order ? order[i] : i;
    m = std::max(m, scores[static_cast<std::size_t>(idx)]);
  }
  double sum = 0.0;
  for (int i = 0; i < items; ++i) {
    const int idx = order ? order[i] : i;
    weights[idx] = std::exp(scores[static_cast<std::size_t>(idx)] - m);
    sum += weights[idx];
  }
  for (int i = 0; i < items; ++i) {
    const int idx = order ? order[i] : i;
    weights[idx] /= sum;
  }
  std::fill(ctx, ctx + vdim, 0.0);
  for (int i = 0; i < items; ++i) {
    const int idx = order ? order[i] : i;
    const double* val = values + static_cast<std::size_t>(idx) * static_cast<std::size_t>(vdim);
    const double wi = weights[idx];
    for (int c = 0; c < vdim; ++c) ctx[c] += wi * val[c];
  }
}

// Reverse of attend_forward for one query. Gradients on the values and keys
// accumulate into caller buffers; the key gradients are folded into Wh and
// the encoder states once per utterance, after all steps.
void attend_backward(const AttnW& w, const double* values, int items, int vdim,
                     const int* order, const double* q, const double* weights,
                     const double* tanh_out, const double* dctx, double* dvalues,
                     double* dkeys, double* gwq, double* gv, double* dq) {
  std::vector<double> dwts(static_cast<std::size_t>(items));
  for (int i = 0; i < items; ++i) {
    const int idx = order ? order[i] : i;
    dwts[static_cast<std::size_t>(idx)] =
        dot(dctx, values + static_cast<std::size_t>(idx) * static_cast<std::size_t>(vdim),
            vdim);
  }
  double dots = 0.0;
  for (int i = 0; i < items; ++i) {
    const int idx = order ? order[i] : i;
    dots += weights[idx] * dwts[static_cast<std::size_t>(idx)];
  }
  std::vector<double> dpre(static_cast<std::size_t>(w.attn));
  for (int i = 0; i < items; ++i) {
    const int idx = order ? order[i] : i;
    double* dval = dvalues + static_cast<std::size_t>(idx) * static_cast<std::size_t>(vdim);
    const double wi = weights[idx];
    for (int c = 0; c < vdim; ++c) dval[c] += wi * dctx[c];

    const double ds = wi * (dwts[static_cast<std::size_t>(idx)] - dots);
    const double* t = tanh_out + static_cast<std::size_t>(idx) * static_cast<std::size_t>(w.attn);
    for (int a = 0; a < w.attn; ++a) {
      gv[a] += ds * t[a];
      dpre[static_cast<std::size_t>(a)] = (1.0 - t[a] * t[a]) * ds * w.v[a];
    }
    outer_add(gwq, dpre.data(), q, w.attn, w.qdim);
    matvec_t_add(w.wq, dpre.data(), dq, w.attn, w.qdim);
    double* dkey = dkeys + static_cast<std::size_t>(idx) * static_cast<std::size_t>(w.attn);
    for (int a = 0; a < w.attn; ++a) dkey[a] += dpre[static_cast<std::size_t>(a)];
  }
}

void softmax_inplace(double* x, int n) {
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) m = std::max(m, x[i]);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    x[i] = std::exp(x[i] - m);
    sum += x[i];
  }
  for (int i = 0; i < n; ++i) x[i] /= sum;
}

}  // namespace

void GruLayerCache::resize(int in, int hidden, int nsteps) {
  in_dim = in;
  hid = hidden;
  steps = nsteps;
  const std::size_t si = static_cast<std::size_t>(nsteps) * static_cast<std::size_t>(in);
  const std::size_t sh = static_cast<std::size_t>(nsteps) * static_cast<std::size_t>(hidden);
  x.assign(si, 0.0);
  h.assign(sh, 0.0);
  z.assign(sh, 0.0);
  r.assign(sh, 0.0);
  n.assign(sh, 0.0);
  un_h.assign(sh, 0.0);
}

EncodedAudio encode_audio(const FrameSeq& frames, const ModelParams& params) {
  frames.validate();
  const ModelConfig& cfg = params.config();
  if (frames.dim != cfg.frame_dim) {
    throw ConfigError("frame dimension " + std::to_string(frames.dim) +
                      " does not match model frame_dim " +
                      std::to_string(cfg.frame_dim));
  }
  if (frames.frames.empty()) throw DataError("audio must have at least one frame");

  EncodedAudio out;
  out.frames = static_cast<int>(frames.frames.size());
  std::vector<double> input(static_cast<std::size_t>(out.frames) *
                            static_cast<std::size_t>(cfg.frame_dim));
  for (int k = 0; k < out.frames; ++k) {
    std::copy(frames.frames[static_cast<std::size_t>(k)].begin(),
              frames.frames[static_cast<std::size_t>(k)].end(),
              input.begin() +
                  static_cast<std::size_t>(k) * static_cast<std::size_t>(cfg.frame_dim));
  }
  out.layers.resize(static_cast<std::size_t>(cfg.enc_layers));
  for (int l = 0; l < cfg.enc_layers; ++l) {
    const GruW w = gru_w(params, "aenc" + std::to_string(l));
    const double* in_ptr =
        l == 0 ? input.data() : out.layers[static_cast<std::size_t>(l - 1)].h.data();
    gru_layer_forward(w, in_ptr, out.frames, out.layers[static_cast<std::size_t>(l)]);
  }
  return out;
}

EncodedBias encode_bias(const BiasSet& set, const ModelParams& params) {
  const ModelConfig& cfg = params.config();
  const int n = static_cast<int>(set.phrases.size());

  EncodedBias out;
  out.items = n + 1;
  out.width = cfg.bias_enc_width;
  out.emb.assign(static_cast<std::size_t>(out.items) * static_cast<std::size_t>(out.width),
                 0.0);
  const double* na = params.tensor("bias_na");
  std::copy(na, na + out.width, out.emb.begin());

  const GruW w = gru_w(params, "benc");
  const double* embed = params.tensor("embed");
  out.phrase_ids.resize(static_cast<std::size_t>(n));
  out.phrase_caches.resize(static_cast<std::size_t>(n));
  std::vector<std::string> texts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    texts[static_cast<std::size_t>(i)] = set.phrases[static_cast<std::size_t>(i)].text();
    const std::vector<int> ids = Vocab::encode(texts[static_cast<std::size_t>(i)]);
    if (ids.empty()) throw DataError("empty bias phrase");
    const int len = static_cast<int>(ids.size());
    std::vector<double> input(static_cast<std::size_t>(len) *
                              static_cast<std::size_t>(cfg.embed_dim));
    for (int k = 0; k < len; ++k) {
      const double* row = embed + static_cast<std::size_t>(ids[static_cast<std::size_t>(k)]) *
                                      static_cast<std::size_t>(cfg.embed_dim);
      std::copy(row, row + cfg.embed_dim,
                input.begin() +
                    static_cast<std::size_t>(k) * static_cast<std::size_t>(cfg.embed_dim));
    }
    GruLayerCache& cache = out.phrase_caches[static_cast<std::size_t>(i)];
    gru_layer_forward(w, input.data(), len, cache);
    const double* final_h = cache.row(cache.h, len - 1, out.width);
    std::copy(final_h, final_h + out.width,
              out.emb.begin() +
                  static_cast<std::size_t>(i + 1) * static_cast<std::size_t>(out.width));
    out.phrase_ids[static_cast<std::size_t>(i)] = ids;
  }

  out.canon.resize(static_cast<std::size_t>(out.items));
  for (int i = 0; i < out.items; ++i) out.canon[static_cast<std::size_t>(i)] = i;
  std::sort(out.canon.begin() + 1, out.canon.end(), [&](int a, int b) {
    const std::string& ta = texts[static_cast<std::size_t>(a - 1)];
    const std::string& tb = texts[static_cast<std::size_t>(b - 1)];
    return ta != tb ? ta < tb : a < b;
  });
  return out;
}

DecoderState make_decoder_state(const EncodedAudio& audio, const EncodedBias& bias,
                                const ModelParams& params) {
  const ModelConfig& cfg = params.config();
  DecoderState st;
  st.h.assign(static_cast<std::size_t>(cfg.dec_layers) *
                  static_cast<std::size_t>(cfg.dec_width),
              0.0);
  st.cx.assign(static_cast<std::size_t>(cfg.enc_width), 0.0);
  st.cz.assign(static_cast<std::size_t>(cfg.bias_enc_width), 0.0);

  const AttnW ax = attn_w(params, "attx");
  st.keys_x.assign(static_cast<std::size_t>(audio.frames) *
                       static_cast<std::size_t>(ax.attn),
                   0.0);
  for (int k = 0; k < audio.frames; ++k) {
    matvec(ax.wh,
           audio.top().data() +
               static_cast<std::size_t>(k) * static_cast<std::size_t>(cfg.enc_width),
           st.keys_x.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(ax.attn),
           ax.attn, ax.hdim);
  }
  const AttnW az = attn_w(params, "attz");
  st.keys_z.assign(static_cast<std::size_t>(bias.items) *
                       static_cast<std::size_t>(az.attn),
                   0.0);
  for (int i = 0; i < bias.items; ++i) {
    matvec(az.wh, bias.item(i),
           st.keys_z.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(az.attn),
           az.attn, az.hdim);
  }
  return st;
}

StepOutput decode_step(DecoderState& state, const EncodedAudio& audio,
                       const EncodedBias& bias, int prev_label,
                       const ModelParams& params) {
  const ModelConfig& cfg = params.config();
  if (prev_label < 0 || prev_label >= Vocab::size()) {
    throw DataError("grapheme id " + std::to_string(prev_label) + " out of range");
  }

  // Recurrence input: previous grapheme embedding and previous contexts.
  const int in_dim = cfg.embed_dim + cfg.enc_width + cfg.bias_enc_width;
  std::vector<double> u(static_cast<std::size_t>(in_dim));
  const double* embed_row =
      params.tensor("embed") +
      static_cast<std::size_t>(prev_label) * static_cast<std::size_t>(cfg.embed_dim);
  std::copy(embed_row, embed_row + cfg.embed_dim, u.begin());
  std::copy(state.cx.begin(), state.cx.end(), u.begin() + cfg.embed_dim);
  std::copy(state.cz.begin(), state.cz.end(),
            u.begin() + cfg.embed_dim + cfg.enc_width);

  std::vector<double> zb(static_cast<std::size_t>(cfg.dec_width));
  std::vector<double> rb(static_cast<std::size_t>(cfg.dec_width));
  std::vector<double> nb(static_cast<std::size_t>(cfg.dec_width));
  std::vector<double> ub(static_cast<std::size_t>(cfg.dec_width));
  const double* layer_in = u.data();
  for (int l = 0; l < cfg.dec_layers; ++l) {
    const GruW w = gru_w(params, "dec" + std::to_string(l));
    double* h = state.h.data() +
                static_cast<std::size_t>(l) * static_cast<std::size_t>(cfg.dec_width);
    const double* hp = state.step > 0 ? h : nullptr;
    gru_step(w, layer_in, hp, zb.data(), rb.data(), nb.data(), ub.data(), h);
    layer_in = h;
  }
  const double* q = state.h.data() + static_cast<std::size_t>(cfg.dec_layers - 1) *
                                         static_cast<std::size_t>(cfg.dec_width);

  StepOutput out;
  out.audio_weights.assign(static_cast<std::size_t>(audio.frames), 0.0);
  out.alpha.assign(static_cast<std::size_t>(bias.items), 0.0);
  const AttnW ax = attn_w(params, "attx");
  attend_forward(ax, state.keys_x.data(), audio.top().data(), audio.frames,
                 cfg.enc_width, nullptr, q, out.audio_weights.data(),
                 state.cx.data(), nullptr);
  const AttnW az = attn_w(params, "attz");
  attend_forward(az, state.keys_z.data(), bias.emb.data(), bias.items,
                 cfg.bias_enc_width, bias.canon.data(), q, out.alpha.data(),
                 state.cz.data(), nullptr);

  const int out_in = cfg.dec_width + cfg.enc_width + cfg.bias_enc_width;
  std::vector<double> u2(static_cast<std::size_t>(out_in));
  std::copy(q, q + cfg.dec_width, u2.begin());
  std::copy(state.cx.begin(), state.cx.end(), u2.begin() + cfg.dec_width);
  std::copy(state.cz.begin(), state.cz.end(),
            u2.begin() + cfg.dec_width + cfg.enc_width);
  out.dist.assign(static_cast<std::size_t>(Vocab::size()), 0.0);
  const double* bo = params.tensor("out.b");
  std::copy(bo, bo + Vocab::size(), out.dist.begin());
  matvec_add(params.tensor("out.w"), u2.data(), out.dist.data(), Vocab::size(), out_in);
  softmax_inplace(out.dist.data(), Vocab::size());

  ++state.step;
  for (double p : out.dist) {
    if (!std::isfinite(p)) {
      throw TrainingFault(state.step, "non-finite output distribution");
    }
  }
  return out;
}

namespace {

// Everything the backward pass needs from one teacher-forced forward run.
struct ForwardCache {
  EncodedAudio audio;
  EncodedBias bias;
  std::vector<double> keys_x, keys_z;
  std::vector<GruLayerCache> dec;
  std::vector<double> cx, cz;            // T x enc_width, T x bias_width
  std::vector<double> ax_tanh, az_tanh;  // T x frames x attn, T x items x attn
  std::vector<double> ax_w, az_w;        // T x frames, T x items
  std::vector<double> probs;             // T x vocab
  int T = 0;
};

void validate_reference(const std::vector<int>& ref) {
  if (ref.empty()) throw DataError("empty reference");
  if (ref.back() != Vocab::kEnd) throw DataError("reference must end with end symbol");
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const int id = ref[i];
    if (id < 0 || id >= Vocab::size()) {
      throw DataError("grapheme id " + std::to_string(id) + " out of range");
    }
    if (id == Vocab::kStart) throw DataError("start symbol inside reference");
    if (id == Vocab::kEnd && i + 1 != ref.size()) {
      throw DataError("end symbol before end of reference");
    }
  }
}

double forward_pass(const TrainingExample& ex, const ModelParams& params,
                    ForwardCache& c) {
  if (!ex.frames || !ex.bias) throw DataError("training example missing frames or bias set");
  validate_reference(ex.reference);
  const ModelConfig& cfg = params.config();
  params.validate_finite();

  c.audio = encode_audio(*ex.frames, params);
  c.bias = encode_bias(*ex.bias, params);
  const int K = c.audio.frames;
  const int items = c.bias.items;
  const int T = static_cast<int>(ex.reference.size());
  c.T = T;

  const AttnW ax = attn_w(params, "attx");
  const AttnW az = attn_w(params, "attz");
  c.keys_x.assign(static_cast<std::size_t>(K) * static_cast<std::size_t>(ax.attn), 0.0);
  for (int k = 0; k < K; ++k) {
    matvec(ax.wh,
           c.audio.top().data() +
               static_cast<std::size_t>(k) * static_cast<std::size_t>(cfg.enc_width),
           c.keys_x.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(ax.attn),
           ax.attn, ax.hdim);
  }
  c.keys_z.assign(static_cast<std::size_t>(items) * static_cast<std::size_t>(az.attn),
                  0.0);
  for (int i = 0; i < items; ++i) {
    matvec(az.wh, c.bias.item(i),
           c.keys_z.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(az.attn),
           az.attn, az.hdim);
  }

  const int dec_in = cfg.embed_dim + cfg.enc_width + cfg.bias_enc_width;
  c.dec.resize(static_cast<std::size_t>(cfg.dec_layers));
  for (int l = 0; l < cfg.dec_layers; ++l) {
    c.dec[static_cast<std::size_t>(l)].resize(l == 0 ? dec_in : cfg.dec_width,
                                              cfg.dec_width, T);
  }
  c.cx.assign(static_cast<std::size_t>(T) * static_cast<std::size_t>(cfg.enc_width), 0.0);
  c.cz.assign(static_cast<std::size_t>(T) * static_cast<std::size_t>(cfg.bias_enc_width),
              0.0);
  c.ax_tanh.assign(static_cast<std::size_t>(T) * static_cast<std::size_t>(K) *
                       static_cast<std::size_t>(ax.attn),
                   0.0);
  c.az_tanh.assign(static_cast<std::size_t>(T) * static_cast<std::size_t>(items) *
                       static_cast<std::size_t>(az.attn),
                   0.0);
  c.ax_w.assign(static_cast<std::size_t>(T) * static_cast<std::size_t>(K), 0.0);
  c.az_w.assign(static_cast<std::size_t>(T) * static_cast<std::size_t>(items), 0.0);
  c.probs.assign(static_cast<std::size_t>(T) * static_cast<std::size_t>(Vocab::size()),
                 0.0);

  const double* embed = params.tensor("embed");
  const double* wo = params.tensor("out.w");
  const double* bo = params.tensor("out.b");
  const int out_in = cfg.dec_width + cfg.enc_width + cfg.bias_enc_width;
  std::vector<double> u2(static_cast<std::size_t>(out_in));
  double loss = 0.0;

  for (int t = 0; t < T; ++t) {
    const int prev = t == 0 ? Vocab::kStart : ex.reference[static_cast<std::size_t>(t - 1)];
    // Layer-0 input: previous grapheme embedding and step t-1 contexts.
    GruLayerCache& d0 = c.dec[0];
    double* u = d0.row(d0.x, t, d0.in_dim);
    const double* erow =
        embed + static_cast<std::size_t>(prev) * static_cast<std::size_t>(cfg.embed_dim);
    std::copy(erow, erow + cfg.embed_dim, u);
    if (t > 0) {
      const double* pcx = c.cx.data() + static_cast<std::size_t>(t - 1) *
                                            static_cast<std::size_t>(cfg.enc_width);
      const double* pcz = c.cz.data() + static_cast<std::size_t>(t - 1) *
                                            static_cast<std::size_t>(cfg.bias_enc_width);
      std::copy(pcx, pcx + cfg.enc_width, u + cfg.embed_dim);
      std::copy(pcz, pcz + cfg.bias_enc_width, u + cfg.embed_dim + cfg.enc_width);
    } else {
      std::fill(u + cfg.embed_dim, u + d0.in_dim, 0.0);
    }

    for (int l = 0; l < cfg.dec_layers; ++l) {
      GruLayerCache& d = c.dec[static_cast<std::size_t>(l)];
      if (l > 0) {
        GruLayerCache& below = c.dec[static_cast<std::size_t>(l - 1)];
        std::copy(below.row(below.h, t, cfg.dec_width),
                  below.row(below.h, t, cfg.dec_width) + cfg.dec_width,
                  d.row(d.x, t, cfg.dec_width));
      }
      const GruW w = gru_w(params, "dec" + std::to_string(l));
      gru_step(w, d.row(d.x, t, d.in_dim),
               t > 0 ? d.row(d.h, t - 1, cfg.dec_width) : nullptr,
               d.row(d.z, t, cfg.dec_width), d.row(d.r, t, cfg.dec_width),
               d.row(d.n, t, cfg.dec_width), d.row(d.un_h, t, cfg.dec_width),
               d.row(d.h, t, cfg.dec_width));
    }
    GruLayerCache& dtop = c.dec.back();
    const double* q = dtop.row(dtop.h, t, cfg.dec_width);

    double* cx_t =
        c.cx.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(cfg.enc_width);
    double* cz_t = c.cz.data() + static_cast<std::size_t>(t) *
                                     static_cast<std::size_t>(cfg.bias_enc_width);
    attend_forward(ax, c.keys_x.data(), c.audio.top().data(), K, cfg.enc_width, nullptr,
                   q, c.ax_w.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(K),
                   cx_t,
                   c.ax_tanh.data() + static_cast<std::size_t>(t) *
                                          static_cast<std::size_t>(K) *
                                          static_cast<std::size_t>(ax.attn));
    attend_forward(az, c.keys_z.data(), c.bias.emb.data(), items, cfg.bias_enc_width,
                   c.bias.canon.data(), q,
                   c.az_w.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(items),
                   cz_t,
                   c.az_tanh.data() + static_cast<std::size_t>(t) *
                                          static_cast<std::size_t>(items) *
                                          static_cast<std::size_t>(az.attn));

    std::copy(q, q + cfg.dec_width, u2.begin());
    std::copy(cx_t, cx_t + cfg.enc_width, u2.begin() + cfg.dec_width);
    std::copy(cz_t, cz_t + cfg.bias_enc_width,
              u2.begin() + cfg.dec_width + cfg.enc_width);
    double* probs =
        c.probs.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(Vocab::size());
    std::copy(bo, bo + Vocab::size(), probs);
    matvec_add(wo, u2.data(), probs, Vocab::size(), out_in);
    softmax_inplace(probs, Vocab::size());

    const double p = probs[static_cast<std::size_t>(ex.reference[static_cast<std::size_t>(t)])];
    const double term = -std::log(p);
    if (!std::isfinite(term)) {
      throw TrainingFault(t + 1, "non-finite loss term");
    }
    loss += term;
  }
  return loss;
}

void backward_pass(const TrainingExample& ex, const ModelParams& params,
                   ForwardCache& c, std::vector<double>& grads) {
  const ModelConfig& cfg = params.config();
  const int K = c.audio.frames;
  const int items = c.bias.items;
  const int T = c.T;
  const AttnW ax = attn_w(params, "attx");
  const AttnW az = attn_w(params, "attz");

  grads.assign(params.size(), 0.0);
  double* gembed = grads.data() + params.spec("embed").offset;
  double* gwo = grads.data() + params.spec("out.w").offset;
  double* gbo = grads.data() + params.spec("out.b").offset;
  double* gwq_x = grads.data() + params.spec("attx.wq").offset;
  double* gv_x = grads.data() + params.spec("attx.v").offset;
  double* gwh_x = grads.data() + params.spec("attx.wh").offset;
  double* gwq_z = grads.data() + params.spec("attz.wq").offset;
  double* gv_z = grads.data() + params.spec("attz.v").offset;
  double* gwh_z = grads.data() + params.spec("attz.wh").offset;

  std::vector<double> dHx(static_cast<std::size_t>(K) *
                              static_cast<std::size_t>(cfg.enc_width),
                          0.0);
  std::vector<double> dHz(static_cast<std::size_t>(items) *
                              static_cast<std::size_t>(cfg.bias_enc_width),
                          0.0);
  std::vector<double> dKx(static_cast<std::size_t>(K) * static_cast<std::size_t>(ax.attn),
                          0.0);
  std::vector<double> dKz(static_cast<std::size_t>(items) *
                              static_cast<std::size_t>(az.attn),
                          0.0);

  std::vector<std::vector<double>> carry(
      static_cast<std::size_t>(cfg.dec_layers),
      std::vector<double>(static_cast<std::size_t>(cfg.dec_width), 0.0));
  std::vector<double> dcx_pend(static_cast<std::size_t>(cfg.enc_width), 0.0);
  std::vector<double> dcz_pend(static_cast<std::size_t>(cfg.bias_enc_width), 0.0);

  const int out_in = cfg.dec_width + cfg.enc_width + cfg.bias_enc_width;
  const int dec_in = cfg.embed_dim + cfg.enc_width + cfg.bias_enc_width;
  const double* wo = params.tensor("out.w");
  std::vector<double> dlogits(static_cast<std::size_t>(Vocab::size()));
  std::vector<double> u2(static_cast<std::size_t>(out_in));
  std::vector<double> du2(static_cast<std::size_t>(out_in));
  std::vector<double> dd_top(static_cast<std::size_t>(cfg.dec_width));
  std::vector<double> dcx_t(static_cast<std::size_t>(cfg.enc_width));
  std::vector<double> dcz_t(static_cast<std::size_t>(cfg.bias_enc_width));
  std::vector<double> dh_total(static_cast<std::size_t>(cfg.dec_width));
  std::vector<double> dx_upper(static_cast<std::size_t>(cfg.dec_width));
  std::vector<double> du(static_cast<std::size_t>(dec_in));
  std::vector<double> next_carry(static_cast<std::size_t>(cfg.dec_width));

  for (int t = T - 1; t >= 0; --t) {
    const int y = ex.reference[static_cast<std::size_t>(t)];
    const int prev = t == 0 ? Vocab::kStart : ex.reference[static_cast<std::size_t>(t - 1)];
    GruLayerCache& dtop = c.dec.back();
    const double* q = dtop.row(dtop.h, t, cfg.dec_width);
    const double* cx_t =
        c.cx.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(cfg.enc_width);
    const double* cz_t = c.cz.data() + static_cast<std::size_t>(t) *
                                           static_cast<std::size_t>(cfg.bias_enc_width);

    // Output projection: dlogits = probs - onehot(y).
    const double* probs =
        c.probs.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(Vocab::size());
    std::copy(probs, probs + Vocab::size(), dlogits.begin());
    dlogits[static_cast<std::size_t>(y)] -= 1.0;
    std::copy(q, q + cfg.dec_width, u2.begin());
    std::copy(cx_t, cx_t + cfg.enc_width, u2.begin() + cfg.dec_width);
    std::copy(cz_t, cz_t + cfg.bias_enc_width,
              u2.begin() + cfg.dec_width + cfg.enc_width);
    outer_add(gwo, dlogits.data(), u2.data(), Vocab::size(), out_in);
    for (int i = 0; i < Vocab::size(); ++i) gbo[i] += dlogits[static_cast<std::size_t>(i)];
    std::fill(du2.begin(), du2.end(), 0.0);
    matvec_t_add(wo, dlogits.data(), du2.data(), Vocab::size(), out_in);
    std::copy(du2.begin(), du2.begin() + cfg.dec_width, dd_top.begin());
    for (int i = 0; i < cfg.enc_width; ++i) {
      dcx_t[static_cast<std::size_t>(i)] =
          du2[static_cast<std::size_t>(cfg.dec_width + i)] +
          dcx_pend[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < cfg.bias_enc_width; ++i) {
      dcz_t[static_cast<std::size_t>(i)] =
          du2[static_cast<std::size_t>(cfg.dec_width + cfg.enc_width + i)] +
          dcz_pend[static_cast<std::size_t>(i)];
    }

    // Attention backward; key gradients accumulate and fold in after the loop.
    attend_backward(ax, c.audio.top().data(), K, cfg.enc_width, nullptr, q,
                    c.ax_w.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(K),
                    c.ax_tanh.data() + static_cast<std::size_t>(t) *
                                           static_cast<std::size_t>(K) *
                                           static_cast<std::size_t>(ax.attn),
                    dcx_t.data(), dHx.data(), dKx.data(), gwq_x, gv_x, dd_top.data());
    attend_backward(az, c.bias.emb.data(), items, cfg.bias_enc_width,
                    c.bias.canon.data(), q,
                    c.az_w.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(items),
                    c.az_tanh.data() + static_cast<std::size_t>(t) *
                                           static_cast<std::size_t>(items) *
                                           static_cast<std::size_t>(az.attn),
                    dcz_t.data(), dHz.data(), dKz.data(), gwq_z, gv_z, dd_top.data());

    // Decoder stack, top to bottom.
    const double* dh_from_above = dd_top.data();
    for (int l = cfg.dec_layers - 1; l >= 0; --l) {
      GruLayerCache& d = c.dec[static_cast<std::size_t>(l)];
      for (int j = 0; j < cfg.dec_width; ++j) {
        dh_total[static_cast<std::size_t>(j)] =
            dh_from_above[j] + carry[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)];
      }
      std::fill(next_carry.begin(), next_carry.end(), 0.0);
      const GruW w = gru_w(params, "dec" + std::to_string(l));
      const GruG g = gru_g(params, grads, "dec" + std::to_string(l));
      double* dx = l == 0 ? du.data() : dx_upper.data();
      gru_step_backward(w, g, d, t, dh_total.data(), dx,
                        t > 0 ? next_carry.data() : nullptr);
      carry[static_cast<std::size_t>(l)] = next_carry;
      dh_from_above = dx_upper.data();
    }

    // Layer-0 input gradient: embedding row and the step t-1 contexts.
    double* erow = gembed + static_cast<std::size_t>(prev) *
                                static_cast<std::size_t>(cfg.embed_dim);
    for (int i = 0; i < cfg.embed_dim; ++i) erow[i] += du[static_cast<std::size_t>(i)];
    std::copy(du.begin() + cfg.embed_dim, du.begin() + cfg.embed_dim + cfg.enc_width,
              dcx_pend.begin());
    std::copy(du.begin() + cfg.embed_dim + cfg.enc_width, du.end(), dcz_pend.begin());
  }
  // dcx_pend / dcz_pend now refer to the constant zero initial contexts.

  // Fold attention key gradients into Wh and the encoder states.
  for (int k = 0; k < K; ++k) {
    const double* dkey = dKx.data() + static_cast<std::size_t>(k) *
                                          static_cast<std::size_t>(ax.attn);
    const double* h = c.audio.top().data() +
                      static_cast<std::size_t>(k) * static_cast<std::size_t>(cfg.enc_width);
    outer_add(gwh_x, dkey, h, ax.attn, cfg.enc_width);
    matvec_t_add(ax.wh, dkey,
                 dHx.data() + static_cast<std::size_t>(k) *
                                  static_cast<std::size_t>(cfg.enc_width),
                 ax.attn, cfg.enc_width);
  }
  for (int i = 0; i < items; ++i) {
    const int idx = c.bias.canon[static_cast<std::size_t>(i)];
    const double* dkey = dKz.data() + static_cast<std::size_t>(idx) *
                                          static_cast<std::size_t>(az.attn);
    outer_add(gwh_z, dkey, c.bias.item(idx), az.attn, cfg.bias_enc_width);
    matvec_t_add(az.wh, dkey,
                 dHz.data() + static_cast<std::size_t>(idx) *
                                  static_cast<std::size_t>(cfg.bias_enc_width),
                 az.attn, cfg.bias_enc_width);
  }

  // No-bias embedding and bias encoder.
  double* gna = grads.data() + params.spec("bias_na").offset;
  for (int i = 0; i < cfg.bias_enc_width; ++i) gna[i] += dHz[static_cast<std::size_t>(i)];
  {
    const GruW w = gru_w(params, "benc");
    const GruG g = gru_g(params, grads, "benc");
    for (std::size_t ph = 0; ph < c.bias.phrase_caches.size(); ++ph) {
      GruLayerCache& cache = c.bias.phrase_caches[ph];
      const int len = cache.steps;
      std::vector<double> dh(static_cast<std::size_t>(len) *
                                 static_cast<std::size_t>(cfg.bias_enc_width),
                             0.0);
      const double* src = dHz.data() + (ph + 1) * static_cast<std::size_t>(cfg.bias_enc_width);
      std::copy(src, src + cfg.bias_enc_width,
                dh.begin() + static_cast<std::size_t>(len - 1) *
                                 static_cast<std::size_t>(cfg.bias_enc_width));
      std::vector<double> dx(static_cast<std::size_t>(len) *
                                 static_cast<std::size_t>(cfg.embed_dim),
                             0.0);
      gru_layer_backward(w, g, cache, dh.data(), dx.data());
      const auto& ids = c.bias.phrase_ids[ph];
      for (int k = 0; k < len; ++k) {
        double* erow = gembed + static_cast<std::size_t>(ids[static_cast<std::size_t>(k)]) *
                                    static_cast<std::size_t>(cfg.embed_dim);
        const double* dxk =
            dx.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(cfg.embed_dim);
        for (int i = 0; i < cfg.embed_dim; ++i) erow[i] += dxk[i];
      }
    }
  }

  // Audio encoder, top layer down; the bottom layer's input gradient is the
  // gradient on the frames and is discarded.
  std::vector<double> dh_cur = dHx;
  for (int l = cfg.enc_layers - 1; l >= 0; --l) {
    GruLayerCache& cache = c.audio.layers[static_cast<std::size_t>(l)];
    const GruW w = gru_w(params, "aenc" + std::to_string(l));
    const GruG g = gru_g(params, grads, "aenc" + std::to_string(l));
    std::vector<double> dx(static_cast<std::size_t>(cache.steps) *
                               static_cast<std::size_t>(cache.in_dim),
                           0.0);
    gru_layer_backward(w, g, cache, dh_cur.data(), dx.data());
    if (l > 0) dh_cur = std::move(dx);
  }
}

}  // namespace

double loss_only(const TrainingExample& ex, const ModelParams& params) {
  ForwardCache c;
  return forward_pass(ex, params, c);
}

double loss_and_gradients(const TrainingExample& ex, const ModelParams& params,
                          std::vector<double>& grads) {
  ForwardCache c;
  const double loss = forward_pass(ex, params, c);
  backward_pass(ex, params, c, grads);
  return loss;
}

namespace {

struct BeamHyp {
  DecoderState state;
  double logp = 0.0;
  std::vector<int> ids;
  std::vector<std::vector<double>> bias_rows;
  std::vector<std::vector<double>> audio_rows;
};

struct FinishedHyp {
  double score = 0.0;
  std::vector<int> ids;
  std::vector<std::vector<double>> bias_rows;
  std::vector<std::vector<double>> audio_rows;
};

}  // namespace

DecodeResult decode(const FrameSeq& frames, const BiasSet& set,
                    const ModelParams& params, int beam_width, int max_len) {
  if (beam_width < 1) throw ConfigError("beam_width must be >= 1");
  const EncodedAudio audio = encode_audio(frames, params);
  const EncodedBias bias = encode_bias(set, params);
  if (max_len == 0) max_len = 4 * audio.frames;
  if (max_len < 1) throw ConfigError("max_len must be >= 1");

  std::vector<BeamHyp> live(1);
  live[0].state = make_decoder_state(audio, bias, params);
  std::vector<FinishedHyp> finished;

  for (int step = 0; step < max_len && !live.empty(); ++step) {
    // Advance every live hypothesis once; its children share the result.
    std::vector<StepOutput> outs(live.size());
    for (std::size_t h = 0; h < live.size(); ++h) {
      const int prev = live[h].ids.empty() ? Vocab::kStart : live[h].ids.back();
      outs[h] = decode_step(live[h].state, audio, bias, prev, params);
      live[h].bias_rows.push_back(outs[h].alpha);
      live[h].audio_rows.push_back(outs[h].audio_weights);
    }

    struct Cand {
      double logp;
      int parent;
      int token;
    };
    std::vector<Cand> cands;
    cands.reserve(live.size() * static_cast<std::size_t>(Vocab::size()));
    for (std::size_t h = 0; h < live.size(); ++h) {
      for (int v = 0; v < Vocab::size(); ++v) {
        if (v == Vocab::kStart) continue;
        cands.push_back({live[h].logp + std::log(outs[h].dist[static_cast<std::size_t>(v)]),
                         static_cast<int>(h), v});
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      if (a.logp != b.logp) return a.logp > b.logp;
      if (a.parent != b.parent) return a.parent < b.parent;
      return a.token < b.token;
    });
    if (static_cast<int>(cands.size()) > beam_width) {
      cands.resize(static_cast<std::size_t>(beam_width));
    }

    std::vector<BeamHyp> next;
    for (const Cand& cand : cands) {
      const BeamHyp& parent = live[static_cast<std::size_t>(cand.parent)];
      if (cand.token == Vocab::kEnd) {
        FinishedHyp f;
        f.ids = parent.ids;
        f.bias_rows = parent.bias_rows;
        f.audio_rows = parent.audio_rows;
        f.score = cand.logp / static_cast<double>(f.ids.size() + 1);
        finished.push_back(std::move(f));
      } else {
        BeamHyp child;
        child.state = parent.state;
        child.logp = cand.logp;
        child.ids = parent.ids;
        child.ids.push_back(cand.token);
        child.bias_rows = parent.bias_rows;
        child.audio_rows = parent.audio_rows;
        next.push_back(std::move(child));
      }
    }
    live = std::move(next);
  }

  // Hypotheses still alive at the length cap compete without an end symbol.
  for (BeamHyp& h : live) {
    FinishedHyp f;
    f.score = h.logp / static_cast<double>(h.ids.size());
    f.ids = std::move(h.ids);
    f.bias_rows = std::move(h.bias_rows);
    f.audio_rows = std::move(h.audio_rows);
    finished.push_back(std::move(f));
  }
  if (finished.empty()) throw DataError("decode produced no hypotheses");

  std::size_t best = 0;
  for (std::size_t i = 1; i < finished.size(); ++i) {
    if (finished[i].score > finished[best].score ||
        (finished[i].score == finished[best].score && finished[i].ids < finished[best].ids)) {
      best = i;
    }
  }

  DecodeResult res;
  res.ids = std::move(finished[best].ids);
  res.text = Vocab::decode(res.ids);
  res.score = finished[best].score;
  res.trace.labels.push_back("<n/a>");
  for (const auto& p : set.phrases) res.trace.labels.push_back(p.text());
  res.trace.bias_rows = std::move(finished[best].bias_rows);
  res.trace.audio_rows = std::move(finished[best].audio_rows);
  return res;
}

}  // namespace biasforge
