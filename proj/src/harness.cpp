#include "biasforge/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <set>

#include "biasforge/errors.hpp"
#include "biasforge/parallel.hpp"
#include "biasforge/rng.hpp"
#include "biasforge/text.hpp"

namespace biasforge {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

std::string hex_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_double_field(const std::string& s, int lineno) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + s.size() || s.empty()) {
    throw ParseError("report", lineno, "bad number '" + s + "'");
  }
  return v;
}

long parse_int_field(const std::string& s, int lineno) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const long v = std::strtol(begin, &end, 10);
  if (end != begin + s.size() || s.empty()) {
    throw ParseError("report", lineno, "bad integer '" + s + "'");
  }
  return v;
}

std::vector<std::string> span_tokens(const DatasetExample& ex, const Span& sp) {
  const int n = static_cast<int>(ex.transcript.size());
  if (sp.first < 0 || sp.second > n || sp.first >= sp.second) {
    throw DataError("utterance " + ex.utt_id + ": span out of range");
  }
  return std::vector<std::string>(ex.transcript.begin() + sp.first,
                                  ex.transcript.begin() + sp.second);
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

}  // namespace

WerResult wer(const std::vector<std::string>& ref,
              const std::vector<std::string>& hyp) {
  if (ref.empty()) throw DataError("reference must be non-empty");
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();

  struct Cell {
    int dist, s, d, i;
  };
  std::vector<Cell> dp((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> Cell& {
    return dp[i * (m + 1) + j];
  };
  at(0, 0) = {0, 0, 0, 0};
  for (std::size_t i = 1; i <= n; ++i) {
    at(i, 0) = {static_cast<int>(i), 0, static_cast<int>(i), 0};
  }
  for (std::size_t j = 1; j <= m; ++j) {
    at(0, j) = {static_cast<int>(j), 0, 0, static_cast<int>(j)};
  }
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const bool match = ref[i - 1] == hyp[j - 1];
      // Candidates in preference order on ties: substitution/match first.
      Cell best = at(i - 1, j - 1);
      best.dist += match ? 0 : 1;
      best.s += match ? 0 : 1;
      Cell del = at(i - 1, j);
      del.dist += 1;
      del.d += 1;
      if (del.dist < best.dist) best = del;
      Cell ins = at(i, j - 1);
      ins.dist += 1;
      ins.i += 1;
      if (ins.dist < best.dist) best = ins;
      at(i, j) = best;
    }
  }
  const Cell& c = at(n, m);
  WerResult r;
  r.substitutions = c.s;
  r.deletions = c.d;
  r.insertions = c.i;
  r.ref_words = static_cast<int>(n);
  r.wer = static_cast<double>(c.dist) / static_cast<double>(n);
  return r;
}

std::string serialize_report(const EvalReport& report) {
  std::string out;
  for (const EvalRow& r : report.rows) {
    out += "row\t" + r.model + "\t" + r.test_set + "\t" +
           std::to_string(r.utterances) + "\t" + std::to_string(r.ref_words) +
           "\t" + std::to_string(r.substitutions) + "\t" +
           std::to_string(r.deletions) + "\t" + std::to_string(r.insertions) +
           "\t" + hex_double(r.wer) + "\n";
  }
  for (const auto& [model, curve] : report.sweeps) {
    for (const SweepPoint& p : curve) {
      out += "sweep\t" + model + "\t" + std::to_string(p.n_distractors) + "\t" +
             hex_double(p.wer) + "\n";
    }
  }
  return out;
}

EvalReport parse_report(const std::string& text) {
  EvalReport rep;
  const std::vector<std::string> lines = split(text, '\n');
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const int lineno = static_cast<int>(li) + 1;
    if (lines[li].empty()) continue;
    const std::vector<std::string> f = split(lines[li], '\t');
    if (f[0] == "row") {
      if (f.size() != 9) throw ParseError("report", lineno, "expected 9 fields");
      EvalRow r;
      r.model = f[1];
      r.test_set = f[2];
      r.utterances = static_cast<int>(parse_int_field(f[3], lineno));
      r.ref_words = static_cast<int>(parse_int_field(f[4], lineno));
      r.substitutions = static_cast<int>(parse_int_field(f[5], lineno));
      r.deletions = static_cast<int>(parse_int_field(f[6], lineno));
      r.insertions = static_cast<int>(parse_int_field(f[7], lineno));
      r.wer = parse_double_field(f[8], lineno);
      rep.rows.push_back(std::move(r));
    } else if (f[0] == "sweep") {
      if (f.size() != 4) throw ParseError("report", lineno, "expected 4 fields");
      SweepPoint p;
      p.n_distractors = static_cast<int>(parse_int_field(f[2], lineno));
      p.wer = parse_double_field(f[3], lineno);
      auto it = std::find_if(rep.sweeps.begin(), rep.sweeps.end(),
                             [&](const auto& s) { return s.first == f[1]; });
      if (it == rep.sweeps.end()) {
        rep.sweeps.emplace_back(f[1], std::vector<SweepPoint>{p});
      } else {
        it->second.push_back(p);
      }
    } else {
      throw ParseError("report", lineno, "unknown record '" + f[0] + "'");
    }
  }
  return rep;
}

EvalRow evaluate(const ModelParams& params, const std::vector<TestExample>& set,
                 const EvalOptions& opt, std::vector<std::string>* hyps) {
  if (set.empty()) throw DataError("empty test set");
  if (opt.beam_width < 1) throw ConfigError("beam_width must be >= 1");
  if (opt.threads < 1) throw ConfigError("threads must be >= 1");

  const std::size_t n = set.size();
  std::vector<WerResult> per(n);
  std::vector<std::string> texts(n);
  std::vector<std::string> errs(n);
  parallel_for(n, opt.threads, [&](std::size_t i) {
    try {
      if (!set[i].frames) throw DataError("missing frames");
      if (set[i].transcript.empty()) throw DataError("empty transcript");
      const DecodeResult r =
          decode(*set[i].frames, set[i].bias, params, opt.beam_width);
      texts[i] = r.text;
      per[i] = wer(set[i].transcript, tokenize(r.text));
    } catch (const std::exception& e) {
      errs[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (!errs[i].empty()) {
      throw DataError("utterance " + set[i].utt_id + ": " + errs[i]);
    }
  }

  EvalRow row;
  row.utterances = static_cast<int>(n);
  for (const WerResult& r : per) {
    row.ref_words += r.ref_words;
    row.substitutions += r.substitutions;
    row.deletions += r.deletions;
    row.insertions += r.insertions;
  }
  row.wer = static_cast<double>(row.substitutions + row.deletions +
                                row.insertions) /
            static_cast<double>(row.ref_words);
  if (hyps) *hyps = std::move(texts);
  return row;
}

EvalReport run_comparison(
    const std::vector<NamedModel>& models,
    const std::vector<std::pair<std::string, std::vector<TestExample>>>& sets,
    const EvalOptions& opt) {
  if (models.empty()) throw ConfigError("no models to compare");
  for (const NamedModel& m : models) {
    if (!m.params) throw ConfigError("model '" + m.name + "' has no parameters");
    if (!(m.params->config() == models[0].params->config())) {
      throw ConfigError("model '" + m.name +
                        "' differs in architecture from '" + models[0].name + "'");
    }
  }

  EvalReport rep;
  for (const auto& [set_name, examples] : sets) {
    const std::uint64_t h = bias_sets_hash(examples);
    for (const NamedModel& m : models) {
      if (bias_sets_hash(examples) != h) {
        throw DataError("bias sets for '" + set_name +
                        "' changed between model evaluations");
      }
      EvalRow row = evaluate(*m.params, examples, opt);
      row.model = m.name;
      row.test_set = set_name;
      rep.rows.push_back(std::move(row));
    }
  }
  return rep;
}

std::vector<TestExample> make_test_set(const std::vector<DatasetExample>& data,
                                       const DistractorPool& pool,
                                       int n_distractors, std::uint64_t seed) {
  if (n_distractors < 0) throw ConfigError("n_distractors must be >= 0");
  std::vector<TestExample> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const DatasetExample& ex = data[i];
    if (ex.nnp_spans.empty()) {
      throw DataError("utterance " + ex.utt_id + " has no tagged spans");
    }
    std::vector<std::vector<std::string>> correct;
    for (const Span& sp : ex.nnp_spans) correct.push_back(span_tokens(ex, sp));
    Rng rng(derive_seed(seed, "test|" + ex.utt_id));
    out[i].utt_id = ex.utt_id;
    out[i].transcript = ex.transcript;
    out[i].frames = &ex.frames;
    out[i].bias = build_test_bias_set(correct, pool.phrases, n_distractors, rng);
  }
  return out;
}

std::vector<TestExample> make_fuzzy_test_set(
    const std::vector<DatasetExample>& data, const FuzzyLookup& fuzzy,
    const DistractorPool& pool, int n_fuzzy, int n_random, double tau_phon,
    std::uint64_t seed) {
  if (n_fuzzy < 0 || n_random < 0) {
    throw ConfigError("fuzzy and random counts must be >= 0");
  }
  std::vector<TestExample> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const DatasetExample& ex = data[i];
    if (ex.nnp_spans.empty()) {
      throw DataError("utterance " + ex.utt_id + " has no tagged spans");
    }
    const std::vector<std::string> truth = span_tokens(ex, ex.nnp_spans[0]);
    const std::string truth_text = join(truth);

    std::vector<std::string> alts =
        fuzzy.alternatives(truth_text, n_fuzzy, tau_phon);
    if (static_cast<int>(alts.size()) < n_fuzzy && fuzzy.lexicon &&
        fuzzy.phonemes) {
      // Pad with the phonetically nearest lexicon words so every set ends
      // up with the same number of confusable phrases.
      std::set<std::string> have(alts.begin(), alts.end());
      have.insert(truth_text);
      const PhonemeSeq target = to_phonemes(truth, *fuzzy.lexicon, *fuzzy.phonemes);
      std::vector<std::pair<double, std::string>> ranked;
      for (const std::string& w : fuzzy.lexicon->words()) {
        if (have.count(w)) continue;
        const PhonemeSeq cand = to_phonemes({w}, *fuzzy.lexicon, *fuzzy.phonemes);
        ranked.emplace_back(phonetic_similarity(target, cand, *fuzzy.phonemes), w);
      }
      std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
      });
      for (const auto& [sim, w] : ranked) {
        if (static_cast<int>(alts.size()) >= n_fuzzy) break;
        alts.push_back(w);
      }
    }

    std::vector<std::vector<std::string>> distractors;
    std::set<std::string> taken;
    taken.insert(truth_text);
    for (const std::string& a : alts) {
      distractors.push_back(tokenize(a));
      taken.insert(a);
    }
    Rng rng(derive_seed(seed, "ftest|" + ex.utt_id));
    if (n_random > 0 && !pool.phrases.empty()) {
      const std::vector<std::size_t> order =
          rng.sample_indices(pool.phrases.size(), pool.phrases.size());
      int added = 0;
      for (std::size_t idx : order) {
        if (added >= n_random) break;
        const std::string text = join(pool.phrases[idx]);
        if (!taken.insert(text).second) continue;
        distractors.push_back(pool.phrases[idx]);
        ++added;
      }
    }

    out[i].utt_id = ex.utt_id;
    out[i].transcript = ex.transcript;
    out[i].frames = &ex.frames;
    out[i].bias = build_test_bias_set({truth}, distractors,
                                      static_cast<int>(distractors.size()), rng);
  }
  return out;
}

std::vector<SweepPoint> distractor_sweep(const ModelParams& params,
                                         const std::vector<DatasetExample>& data,
                                         const DistractorPool& pool,
                                         const std::vector<int>& points,
                                         std::uint64_t seed,
                                         const EvalOptions& opt) {
  if (points.empty()) throw ConfigError("no sweep points");
  if (points.front() != 0) throw ConfigError("sweep points must start at 0");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i] <= points[i - 1]) {
      throw ConfigError("sweep points must be strictly ascending");
    }
  }

  std::vector<SweepPoint> curve;
  for (int n : points) {
    const std::vector<TestExample> set =
        make_test_set(data, pool, n, derive_seed(seed, "sweep|" + std::to_string(n)));
    const EvalRow row = evaluate(params, set, opt);
    curve.push_back({n, row.wer});
  }
  return curve;
}

AttentionReport attention_metrics(const ModelParams& params,
                                  const std::vector<TestExample>& set,
                                  const EvalOptions& opt,
                                  std::vector<std::string>* trace_lines) {
  if (set.empty()) throw DataError("empty test set");
  const std::size_t n = set.size();
  std::vector<AttentionUtt> utts(n);
  std::vector<std::vector<std::string>> traces(n);
  std::vector<std::string> errs(n);

  parallel_for(n, opt.threads, [&](std::size_t i) {
    try {
      const TestExample& ex = set[i];
      if (!ex.frames) throw DataError("missing frames");
      const DecodeResult r = decode(*ex.frames, ex.bias, params, opt.beam_width);
      const std::size_t steps = r.trace.bias_rows.size();
      if (steps == 0) throw DataError("decode produced no steps");

      std::vector<int> truth_items;
      for (int t : ex.bias.truth) truth_items.push_back(t + 1);

      // Emission window: character span of the first truth phrase inside
      // the reference text, 1-based steps, clamped to the decoded length.
      std::size_t lo = 1, hi = steps;
      if (!ex.bias.truth.empty()) {
        const std::string ref_text = join(ex.transcript);
        const std::string truth_text =
            ex.bias.phrases[static_cast<std::size_t>(ex.bias.truth[0])].text();
        const std::size_t pos = ref_text.find(truth_text);
        if (pos != std::string::npos) {
          const std::size_t a = pos + 1;
          const std::size_t b = pos + truth_text.size();
          if (a <= steps) {
            lo = a;
            hi = std::min(b, steps);
          }
        }
      }

      double mass = 0.0, top1 = 0.0, entropy = 0.0;
      for (std::size_t s = 0; s < steps; ++s) {
        const std::vector<double>& row = r.trace.bias_rows[s];
        for (double p : row) {
          if (p > 0.0) entropy -= p * std::log(p);
        }
      }
      entropy /= static_cast<double>(steps);
      const std::size_t wn = hi - lo + 1;
      for (std::size_t s = lo; s <= hi; ++s) {
        const std::vector<double>& row = r.trace.bias_rows[s - 1];
        double m = 0.0;
        for (int item : truth_items) m += row[static_cast<std::size_t>(item)];
        mass += m;
        const std::size_t arg = static_cast<std::size_t>(
            std::max_element(row.begin(), row.end()) - row.begin());
        if (std::find(truth_items.begin(), truth_items.end(),
                      static_cast<int>(arg)) != truth_items.end()) {
          top1 += 1.0;
        }
      }
      utts[i].utt_id = ex.utt_id;
      utts[i].mass_on_truth = mass / static_cast<double>(wn);
      utts[i].top1_truth_rate = top1 / static_cast<double>(wn);
      utts[i].entropy = entropy;

      if (trace_lines) {
        std::vector<std::string>& out = traces[i];
        std::string labels = "labels\t" + ex.utt_id + "\t";
        for (std::size_t k = 0; k < r.trace.labels.size(); ++k) {
          if (k) labels += '|';
          labels += r.trace.labels[k];
        }
        out.push_back(std::move(labels));
        char buf[48];
        for (std::size_t s = 0; s < steps; ++s) {
          std::string line = "alpha\t" + ex.utt_id + "\t" + std::to_string(s + 1) + "\t";
          const std::vector<double>& row = r.trace.bias_rows[s];
          for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) line += ',';
            std::snprintf(buf, sizeof buf, "%a", row[k]);
            line += buf;
          }
          out.push_back(std::move(line));
        }
      }
    } catch (const std::exception& e) {
      errs[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (!errs[i].empty()) {
      throw DataError("utterance " + set[i].utt_id + ": " + errs[i]);
    }
  }

  AttentionReport rep;
  rep.utts = std::move(utts);
  for (const AttentionUtt& u : rep.utts) {
    rep.mean_mass_on_truth += u.mass_on_truth;
    rep.mean_top1_truth_rate += u.top1_truth_rate;
    rep.mean_entropy += u.entropy;
  }
  rep.mean_mass_on_truth /= static_cast<double>(n);
  rep.mean_top1_truth_rate /= static_cast<double>(n);
  rep.mean_entropy /= static_cast<double>(n);
  if (trace_lines) {
    for (std::vector<std::string>& t : traces) {
      for (std::string& line : t) trace_lines->push_back(std::move(line));
    }
  }
  return rep;
}

DistractorPool span_pool(const std::vector<DatasetExample>& data) {
  std::set<std::vector<std::string>> seen;
  for (const DatasetExample& ex : data) {
    for (const Span& sp : ex.nnp_spans) seen.insert(span_tokens(ex, sp));
  }
  DistractorPool pool;
  pool.phrases.assign(seen.begin(), seen.end());
  return pool;
}

DistractorPool ngram_pool(const std::vector<DatasetExample>& data, int max_len) {
  if (max_len < 1) throw ConfigError("max_len must be >= 1");
  std::set<std::vector<std::string>> seen;
  for (const DatasetExample& ex : data) {
    const int n = static_cast<int>(ex.transcript.size());
    for (int len = 1; len <= max_len; ++len) {
      for (int start = 0; start + len <= n; ++start) {
        seen.insert(std::vector<std::string>(ex.transcript.begin() + start,
                                             ex.transcript.begin() + start + len));
      }
    }
  }
  DistractorPool pool;
  pool.phrases.assign(seen.begin(), seen.end());
  return pool;
}

DistractorPool pool_from_file(const std::string& path) {
  DistractorPool pool;
  const std::vector<std::string> lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i][0] == '#') continue;
    const std::vector<std::string> tokens = tokenize(lines[i]);
    if (!tokens.empty()) pool.phrases.push_back(tokens);
  }
  if (pool.phrases.empty()) {
    throw ParseError(path, 0, "no phrases in pool file");
  }
  return pool;
}

std::uint64_t params_hash(const ModelParams& params) {
  const std::vector<double>& d = params.data();
  return fnv1a(kFnvOffset, d.data(), d.size() * sizeof(double));
}

std::uint64_t bias_sets_hash(const std::vector<TestExample>& set) {
  std::uint64_t h = kFnvOffset;
  for (const TestExample& ex : set) {
    const std::string line = ex.bias.serialize_line(ex.utt_id);
    h = fnv1a(h, line.data(), line.size());
  }
  return h;
}

std::string comparison_csv(const EvalReport& report) {
  std::string out = "model,test_set,utterances,ref_words,substitutions,deletions,insertions,wer\n";
  char buf[64];
  for (const EvalRow& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%.6f", r.wer);
    out += r.model + "," + r.test_set + "," + std::to_string(r.utterances) + "," +
           std::to_string(r.ref_words) + "," + std::to_string(r.substitutions) +
           "," + std::to_string(r.deletions) + "," + std::to_string(r.insertions) +
           "," + buf + "\n";
  }
  return out;
}

std::string sweep_csv(const EvalReport& report) {
  std::string out = "model,n_distractors,wer\n";
  char buf[64];
  for (const auto& [model, curve] : report.sweeps) {
    for (const SweepPoint& p : curve) {
      std::snprintf(buf, sizeof buf, "%.6f", p.wer);
      out += model + "," + std::to_string(p.n_distractors) + "," + buf + "\n";
    }
  }
  return out;
}

std::string sweep_svg(const EvalReport& report) {
  const double W = 640, H = 420, L = 70, R = 20, T = 20, B = 50;
  const double pw = W - L - R, ph = H - T - B;
  int max_n = 1;
  double max_w = 0.0;
  for (const auto& [model, curve] : report.sweeps) {
    for (const SweepPoint& p : curve) {
      max_n = std::max(max_n, p.n_distractors);
      max_w = std::max(max_w, p.wer);
    }
  }
  const double ymax = std::max(0.05, max_w * 1.1);
  auto xf = [&](double n) { return L + pw * n / max_n; };
  auto yf = [&](double v) { return T + ph - ph * v / ymax; };

  char buf[256];
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\">\n";
  svg += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                L, T + ph, L + pw, T + ph);
  svg += buf;
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                L, T, L, T + ph);
  svg += buf;
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = ymax * tick / 4.0;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"end\">%.3f</text>\n",
                  L - 6, yf(v) + 4, v);
    svg += buf;
  }
  std::set<int> xs;
  for (const auto& [model, curve] : report.sweeps) {
    for (const SweepPoint& p : curve) xs.insert(p.n_distractors);
  }
  for (int x : xs) {
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"middle\">%d</text>\n",
                  xf(x), T + ph + 16, x);
    svg += buf;
  }
  svg += "<text x=\"320\" y=\"410\" font-size=\"12\" text-anchor=\"middle\">bias phrases added</text>\n";
  svg += "<text x=\"16\" y=\"210\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 210)\">WER</text>\n";

  std::size_t mi = 0;
  for (const auto& [model, curve] : report.sweeps) {
    const char* color = kPalette[mi % 6];
    std::string pts;
    for (const SweepPoint& p : curve) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", xf(p.n_distractors), yf(p.wer));
      pts += buf;
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" fill=\"%s\">%s</text>\n",
                  L + 10, T + 16 + 16.0 * static_cast<double>(mi), color,
                  xml_escape(model).c_str());
    svg += buf;
    ++mi;
  }
  svg += "</svg>\n";
  return svg;
}

std::string trace_heatmap_svg(const AttentionTrace& trace) {
  const int items = static_cast<int>(trace.labels.size());
  const int steps = static_cast<int>(trace.bias_rows.size());
  const double cell = 20.0, left = 46.0, top = 110.0;
  const double W = left + items * cell + 16, H = top + steps * cell + 16;

  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\">\n",
                W, H);
  std::string svg = buf;
  std::snprintf(buf, sizeof buf, "<rect width=\"%.0f\" height=\"%.0f\" fill=\"white\"/>\n",
                W, H);
  svg += buf;
  for (int j = 0; j < items; ++j) {
    const double x = left + j * cell + cell / 2;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"10\" text-anchor=\"start\" "
                  "transform=\"rotate(-60 %.2f %.2f)\">%s</text>\n",
                  x, top - 6, x, top - 6,
                  xml_escape(trace.labels[static_cast<std::size_t>(j)]).c_str());
    svg += buf;
  }
  for (int s = 0; s < steps; ++s) {
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"9\" text-anchor=\"end\">%d</text>\n",
                  left - 4, top + s * cell + cell / 2 + 3, s + 1);
    svg += buf;
    const std::vector<double>& row = trace.bias_rows[static_cast<std::size_t>(s)];
    for (int j = 0; j < items && j < static_cast<int>(row.size()); ++j) {
      const double w = std::clamp(row[static_cast<std::size_t>(j)], 0.0, 1.0);
      const int shade = 255 - static_cast<int>(std::lround(w * 255.0));
      std::snprintf(buf, sizeof buf,
                    "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
                    "fill=\"rgb(%d,%d,%d)\" stroke=\"#ddd\"/>\n",
                    left + j * cell, top + s * cell, cell, cell, shade, shade, shade);
      svg += buf;
    }
  }
  svg += "</svg>\n";
  return svg;
}

void emit_plots(const EvalReport& report, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir + ": " + ec.message());
  write_text_file(dir + "/comparison.csv", comparison_csv(report));
  write_text_file(dir + "/sweep.csv", sweep_csv(report));
  write_text_file(dir + "/sweep.svg", sweep_svg(report));
}

}  // namespace biasforge
