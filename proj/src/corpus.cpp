#include "biasforge/corpus.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>

#include "biasforge/errors.hpp"
#include "biasforge/parallel.hpp"
#include "biasforge/text.hpp"

namespace biasforge {

void FrameSeq::validate() const {
  if (dim < 1) throw DataError("frame dimension must be >= 1");
  for (const auto& f : frames) {
    if (static_cast<int>(f.size()) != dim) {
      throw DataError("frame width " + std::to_string(f.size()) +
                      " does not match dimension " + std::to_string(dim));
    }
    for (double v : f) {
      if (!std::isfinite(v)) throw DataError("non-finite frame value");
    }
  }
}

void SynthConfig::validate() const {
  if (frame_dim < 1) throw ConfigError("frame_dim must be >= 1");
  if (dur_min < 1) throw ConfigError("dur_min must be >= 1");
  if (dur_max < dur_min) throw ConfigError("dur_max must be >= dur_min");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
}

PhonemePrototypes::PhonemePrototypes(const PhonemeInventory& inv, int frame_dim)
    : dim_(frame_dim) {
  if (frame_dim < 1) throw ConfigError("frame_dim must be >= 1");

  // Distinct feature values per class and slot, sorted, as one-hot blocks.
  std::array<std::array<std::vector<std::string>, 3>, 2> values;
  for (std::size_t p = 0; p < inv.size(); ++p) {
    const Phoneme& ph = inv.at(static_cast<int>(p));
    const int c = ph.cls == PhonemeClass::vowel ? 1 : 0;
    for (int s = 0; s < 3; ++s) {
      auto& vals = values[static_cast<std::size_t>(c)][static_cast<std::size_t>(s)];
      if (std::find(vals.begin(), vals.end(), ph.features[static_cast<std::size_t>(s)]) ==
          vals.end()) {
        vals.push_back(ph.features[static_cast<std::size_t>(s)]);
      }
    }
  }
  for (auto& per_class : values) {
    for (auto& vals : per_class) std::sort(vals.begin(), vals.end());
  }

  int onehot = 2;  // class bit first
  std::array<std::array<int, 3>, 2> offset{};
  for (int c = 0; c < 2; ++c) {
    for (int s = 0; s < 3; ++s) {
      offset[static_cast<std::size_t>(c)][static_cast<std::size_t>(s)] = onehot;
      onehot += static_cast<int>(
          values[static_cast<std::size_t>(c)][static_cast<std::size_t>(s)].size());
    }
  }

  // Projection matrix from a fixed internal seed: the prototype layout is a
  // pure function of the inventory and frame_dim.
  Rng rng(derive_seed(0xB1A5F063u, "prototype-projection"));
  std::vector<double> proj(static_cast<std::size_t>(frame_dim) *
                           static_cast<std::size_t>(onehot));
  for (auto& x : proj) x = rng.gaussian();

  protos_.resize(inv.size());
  for (std::size_t p = 0; p < inv.size(); ++p) {
    const Phoneme& ph = inv.at(static_cast<int>(p));
    const int c = ph.cls == PhonemeClass::vowel ? 1 : 0;
    std::vector<int> active{c};
    for (int s = 0; s < 3; ++s) {
      const auto& vals = values[static_cast<std::size_t>(c)][static_cast<std::size_t>(s)];
      const auto it =
          std::find(vals.begin(), vals.end(), ph.features[static_cast<std::size_t>(s)]);
      active.push_back(offset[static_cast<std::size_t>(c)][static_cast<std::size_t>(s)] +
                       static_cast<int>(it - vals.begin()));
    }
    auto& proto = protos_[p];
    proto.assign(static_cast<std::size_t>(frame_dim), 0.0);
    for (int j = 0; j < frame_dim; ++j) {
      double sum = 0.0;
      for (int k : active) {
        sum += proj[static_cast<std::size_t>(j) * static_cast<std::size_t>(onehot) +
                    static_cast<std::size_t>(k)];
      }
      proto[static_cast<std::size_t>(j)] = 0.5 * sum;
    }
  }
}

namespace {

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return std::sqrt(sq);
}

}  // namespace

double mean_prototype_distance(const std::string& word_a, const std::string& word_b,
                               const Lexicon& lexicon, const PhonemeInventory& inv,
                               const PhonemePrototypes& protos) {
  const PhonemeSeq a = to_phonemes({word_a}, lexicon, inv);
  const PhonemeSeq b = to_phonemes({word_b}, lexicon, inv);
  if (a.empty() || b.empty()) throw DataError("word with empty pronunciation");
  double total = 0.0;
  for (int pa : a.ids) {
    for (int pb : b.ids) {
      total += euclidean(protos.prototype(pa), protos.prototype(pb));
    }
  }
  return total / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

FrameSeq synth_audio(const std::vector<std::string>& transcript,
                     const Lexicon& lexicon, const PhonemeInventory& inv,
                     const PhonemePrototypes& protos, const SynthConfig& cfg,
                     Rng& rng) {
  cfg.validate();
  if (protos.dim() != cfg.frame_dim) {
    throw ConfigError("prototype dimension " + std::to_string(protos.dim()) +
                      " does not match frame_dim " + std::to_string(cfg.frame_dim));
  }
  const PhonemeSeq seq = to_phonemes(transcript, lexicon, inv);
  FrameSeq out;
  out.dim = cfg.frame_dim;
  const std::uint64_t dur_span =
      static_cast<std::uint64_t>(cfg.dur_max - cfg.dur_min + 1);
  for (int id : seq.ids) {
    const auto& proto = protos.prototype(id);
    const int dur = cfg.dur_min + static_cast<int>(rng.uniform_u64(dur_span));
    for (int d = 0; d < dur; ++d) {
      std::vector<double> frame(static_cast<std::size_t>(cfg.frame_dim));
      for (int j = 0; j < cfg.frame_dim; ++j) {
        frame[static_cast<std::size_t>(j)] =
            proto[static_cast<std::size_t>(j)] + rng.gaussian() * cfg.noise_sigma;
      }
      out.frames.push_back(std::move(frame));
    }
  }
  return out;
}

std::vector<std::vector<std::string>> synth_hypotheses(
    const std::vector<std::string>& transcript, const Lexicon& lexicon,
    const PhonemeInventory& inv, double confusion_rate, int max_hyps, Rng& rng,
    double min_similarity) {
  if (confusion_rate < 0.0 || confusion_rate > 1.0) {
    throw ConfigError("confusion_rate must be in [0,1]");
  }
  if (max_hyps < 1) throw ConfigError("max_hyps must be >= 1");

  std::vector<std::vector<std::string>> hyps{transcript};
  std::set<std::string> seen{join(transcript)};

  // Confusable lexicon words per distinct transcript word, most similar
  // first, ties by spelling.
  std::map<std::string, std::vector<std::string>> confusables;
  for (const auto& w : transcript) {
    if (confusables.count(w)) continue;
    const PhonemeSeq pw = to_phonemes({w}, lexicon, inv);
    std::vector<std::pair<double, std::string>> scored;
    for (const auto& cand : lexicon.words()) {
      if (cand == w) continue;
      const double sim = phonetic_similarity(pw, to_phonemes({cand}, lexicon, inv), inv);
      if (sim >= min_similarity) scored.emplace_back(-sim, cand);
    }
    std::sort(scored.begin(), scored.end());
    auto& list = confusables[w];
    for (auto& [neg_sim, cand] : scored) list.push_back(std::move(cand));
  }

  for (std::size_t round = 0; static_cast<int>(hyps.size()) < max_hyps; ++round) {
    bool any = false;
    for (std::size_t i = 0;
         i < transcript.size() && static_cast<int>(hyps.size()) < max_hyps; ++i) {
      const auto& list = confusables[transcript[i]];
      if (round >= list.size()) continue;
      any = true;
      if (rng.uniform_real() < confusion_rate) {
        auto hyp = transcript;
        hyp[i] = list[round];
        if (seen.insert(join(hyp)).second) hyps.push_back(std::move(hyp));
      }
    }
    if (!any) break;
  }
  return hyps;
}

bool is_slot_token(const std::string& token) {
  return token.size() >= 3 && token.front() == '<' && token.back() == '>';
}

std::string slot_name(const std::string& token) {
  return token.substr(1, token.size() - 2);
}

std::vector<std::vector<std::string>> load_templates(const std::string& path) {
  std::vector<std::vector<std::string>> templates;
  int lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    templates.push_back(tokenize(line));
  }
  if (templates.empty()) throw ConfigError("no templates in " + path);
  return templates;
}

EntityTable load_entities(const std::string& path) {
  EntityTable table;
  int lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw ParseError(path, lineno, "expected SLOT<TAB>phrase");
    }
    table[fields[0]].push_back(tokenize(fields[1]));
  }
  if (table.empty()) throw ConfigError("no entities in " + path);
  return table;
}

std::vector<DatasetExample> make_dataset(
    const std::vector<std::vector<std::string>>& templates,
    const EntityTable& entities, int size, const Lexicon& lexicon,
    const PhonemeInventory& inv, const SynthConfig& cfg, int threads) {
  cfg.validate();
  if (size < 0) throw ConfigError("dataset size must be >= 0");
  if (templates.empty()) throw ConfigError("template list is empty");
  for (const auto& tmpl : templates) {
    if (tmpl.empty()) throw ConfigError("empty template");
    for (const auto& tok : tmpl) {
      if (!is_slot_token(tok)) continue;
      auto it = entities.find(slot_name(tok));
      if (it == entities.end() || it->second.empty()) {
        throw ConfigError("no entities for slot " + tok);
      }
    }
  }

  const PhonemePrototypes protos(inv, cfg.frame_dim);
  std::vector<DatasetExample> ds(static_cast<std::size_t>(size));
  parallel_for(ds.size(), threads, [&](std::size_t i) {
    DatasetExample& ex = ds[i];
    char buf[16];
    std::snprintf(buf, sizeof buf, "u%06zu", i);
    ex.utt_id = buf;
    Rng rng(derive_seed(cfg.seed, ex.utt_id));
    const auto& tmpl = templates[rng.uniform_u64(templates.size())];
    for (const auto& tok : tmpl) {
      if (is_slot_token(tok)) {
        const auto& list = entities.at(slot_name(tok));
        const auto& filler = list[rng.uniform_u64(list.size())];
        const int start = static_cast<int>(ex.transcript.size());
        ex.transcript.insert(ex.transcript.end(), filler.begin(), filler.end());
        ex.nnp_spans.emplace_back(start, start + static_cast<int>(filler.size()));
      } else {
        ex.transcript.push_back(tok);
      }
    }
    ex.frames = synth_audio(ex.transcript, lexicon, inv, protos, cfg, rng);
  });
  return ds;
}

namespace {

std::string hex_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& file, int lineno) {
  if (s.empty()) throw ParseError(file, lineno, "empty number");
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end != begin + s.size()) {
    throw ParseError(file, lineno, "bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::string serialize_example(const DatasetExample& ex) {
  std::string out = ex.utt_id + "\t" + join(ex.transcript) + "\t" +
                    format_spans(ex.nnp_spans) + "\t" +
                    std::to_string(ex.frames.dim) + "\t";
  for (std::size_t i = 0; i < ex.frames.frames.size(); ++i) {
    if (i) out.push_back('|');
    const auto& frame = ex.frames.frames[i];
    for (std::size_t j = 0; j < frame.size(); ++j) {
      if (j) out.push_back(',');
      out += hex_double(frame[j]);
    }
  }
  return out;
}

DatasetExample parse_example(const std::string& line, const std::string& file,
                             int lineno) {
  auto fields = split(line, '\t');
  if (fields.size() != 5 || fields[0].empty()) {
    throw ParseError(file, lineno,
                     "expected utt_id, transcript, spans, dim, frames");
  }
  DatasetExample ex;
  ex.utt_id = fields[0];
  ex.transcript = tokenize(fields[1]);
  ex.nnp_spans = parse_spans(fields[2], file, lineno);
  try {
    ex.frames.dim = std::stoi(fields[3]);
  } catch (const std::exception&) {
    throw ParseError(file, lineno, "bad frame dimension '" + fields[3] + "'");
  }
  if (!fields[4].empty()) {
    for (const auto& frame_text : split(fields[4], '|')) {
      std::vector<double> frame;
      for (const auto& comp : split(frame_text, ',')) {
        frame.push_back(parse_double(comp, file, lineno));
      }
      ex.frames.frames.push_back(std::move(frame));
    }
  }
  try {
    ex.frames.validate();
    TaggedTranscript t{ex.transcript, ex.nnp_spans};
    validate_spans(t);
  } catch (const DataError& e) {
    throw ParseError(file, lineno, e.what());
  }
  return ex;
}

void write_dataset(const std::string& path, const std::vector<DatasetExample>& ds) {
  std::string out;
  for (const auto& ex : ds) {
    out += serialize_example(ex);
    out.push_back('\n');
  }
  write_text_file(path, out);
}

std::vector<DatasetExample> read_dataset(const std::string& path) {
  std::vector<DatasetExample> ds;
  int lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    ds.push_back(parse_example(line, path, lineno));
  }
  return ds;
}

std::string dataset_stats(const std::vector<DatasetExample>& ds,
                          const EntityTable& entities, const Lexicon& lexicon,
                          const PhonemeInventory& inv, double min_similarity) {
  std::string out = "examples=" + std::to_string(ds.size()) + "\n";

  std::set<std::string> transcripts;
  for (const auto& ex : ds) transcripts.insert(join(ex.transcript));
  out += "distinct_transcripts=" + std::to_string(transcripts.size()) + "\n";

  // Span phrases seen in the data, for per-slot usage counts.
  std::set<std::string> used_phrases;
  for (const auto& ex : ds) {
    TaggedTranscript t{ex.transcript, ex.nnp_spans};
    for (std::size_t s = 0; s < t.nnp_spans.size(); ++s) {
      used_phrases.insert(join(t.span_phrase(s)));
    }
  }

  for (const auto& [slot, phrases] : entities) {
    std::set<std::string> distinct;
    for (const auto& p : phrases) distinct.insert(join(p));
    int used = 0;
    for (const auto& p : distinct) {
      if (used_phrases.count(p)) ++used;
    }
    int confusable_pairs = 0;
    std::vector<std::string> sorted(distinct.begin(), distinct.end());
    for (std::size_t a = 0; a < sorted.size(); ++a) {
      const PhonemeSeq pa = to_phonemes(tokenize(sorted[a]), lexicon, inv);
      for (std::size_t b = a + 1; b < sorted.size(); ++b) {
        const PhonemeSeq pb = to_phonemes(tokenize(sorted[b]), lexicon, inv);
        if (phonetic_similarity(pa, pb, inv) >= min_similarity) ++confusable_pairs;
      }
    }
    out += "slot." + slot + ".entities=" + std::to_string(distinct.size()) + "\n";
    out += "slot." + slot + ".used=" + std::to_string(used) + "\n";
    out += "slot." + slot + ".confusable_pairs=" + std::to_string(confusable_pairs) +
           "\n";
  }
  return out;
}

}  // namespace biasforge
