#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "biasforge/biasset.hpp"
#include "biasforge/clas.hpp"
#include "biasforge/corpus.hpp"
#include "biasforge/errors.hpp"
#include "biasforge/harness.hpp"
#include "biasforge/inventory.hpp"
#include "biasforge/phonetics.hpp"
#include "biasforge/rng.hpp"
#include "biasforge/tagging.hpp"
#include "biasforge/text.hpp"

namespace bf = biasforge;

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void make_run_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw bf::DataError("cannot create run directory " + dir + ": " + ec.message());
}

// Every run records its resolved settings, sorted by key.
void write_config(const std::string& dir,
                  std::vector<std::pair<std::string, std::string>> kv) {
  std::sort(kv.begin(), kv.end());
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  bf::write_text_file(dir + "/config.txt", out);
}

struct SchemeFlags {
  std::string scheme = "nnp_fuzzy";
  int n_max = 64;
  int k_ref = 3;
  int k_fuzzy = 3;
  int max_ngram_len = 3;
  double alpha_drop = 0.0;
  double tau_phon = 0.6;

  void add(CLI::App* sub) {
    sub->add_option("--scheme", scheme, "vanilla | nnp | fuzzy | nnp_fuzzy");
    sub->add_option("--n-max", n_max, "bias set size cap");
    sub->add_option("--k-ref", k_ref, "reference phrases per set");
    sub->add_option("--k-fuzzy", k_fuzzy, "fuzzy alternatives per reference phrase");
    sub->add_option("--max-ngram-len", max_ngram_len, "reference n-gram length cap");
    sub->add_option("--alpha-drop", alpha_drop, "probability of an empty bias set");
    sub->add_option("--tau-phon", tau_phon, "phonetic similarity threshold");
  }

  bf::SchemeConfig config(std::uint64_t seed) const {
    bf::SchemeConfig cfg;
    cfg.scheme = bf::parse_scheme(scheme);
    cfg.n_max = n_max;
    cfg.k_ref = k_ref;
    cfg.k_fuzzy = k_fuzzy;
    cfg.max_ngram_len = max_ngram_len;
    cfg.alpha_drop = alpha_drop;
    cfg.tau_phon = tau_phon;
    cfg.rng_seed = seed;
    cfg.validate();
    return cfg;
  }

  std::vector<std::pair<std::string, std::string>> dump() const {
    return {{"scheme", scheme},
            {"n-max", std::to_string(n_max)},
            {"k-ref", std::to_string(k_ref)},
            {"k-fuzzy", std::to_string(k_fuzzy)},
            {"max-ngram-len", std::to_string(max_ngram_len)},
            {"alpha-drop", fmt_double(alpha_drop)},
            {"tau-phon", fmt_double(tau_phon)}};
  }
};

bf::DistractorPool resolve_pool(const std::string& pool_path,
                                const std::vector<bf::DatasetExample>& ds,
                                bool nnp, int max_ngram_len) {
  if (!pool_path.empty()) return bf::pool_from_file(pool_path);
  return nnp ? bf::span_pool(ds) : bf::ngram_pool(ds, max_ngram_len);
}

// gen-data ------------------------------------------------------------------

struct GenDataArgs {
  std::string templates, entities, lexicon, out;
  int size = 200;
  int frame_dim = 16;
  int dur_min = 1;
  int dur_max = 3;
  double noise_sigma = 0.1;
  double confusion_rate = 0.5;
  int max_hyps = 8;
  double min_similarity = 0.6;
  std::uint64_t seed = 0;
  int threads = 1;
};

int run_gen_data(const GenDataArgs& a) {
  const bf::PhonemeInventory& inv = bf::PhonemeInventory::builtin();
  const bf::Lexicon lex = bf::Lexicon::from_file(inv, a.lexicon);
  const auto templates = bf::load_templates(a.templates);
  const bf::EntityTable entities = bf::load_entities(a.entities);

  bf::SynthConfig scfg;
  scfg.frame_dim = a.frame_dim;
  scfg.dur_min = a.dur_min;
  scfg.dur_max = a.dur_max;
  scfg.noise_sigma = a.noise_sigma;
  scfg.seed = a.seed;

  make_run_dir(a.out);
  write_config(a.out, [&] {
    auto kv = std::vector<std::pair<std::string, std::string>>{
        {"templates", a.templates},    {"entities", a.entities},
        {"lexicon", a.lexicon},        {"size", std::to_string(a.size)},
        {"frame-dim", std::to_string(a.frame_dim)},
        {"dur-min", std::to_string(a.dur_min)},
        {"dur-max", std::to_string(a.dur_max)},
        {"noise-sigma", fmt_double(a.noise_sigma)},
        {"confusion-rate", fmt_double(a.confusion_rate)},
        {"max-hyps", std::to_string(a.max_hyps)},
        {"min-similarity", fmt_double(a.min_similarity)},
        {"seed", std::to_string(a.seed)},
        {"threads", std::to_string(a.threads)}};
    return kv;
  }());

  const auto ds = bf::make_dataset(templates, entities, a.size, lex, inv, scfg,
                                   a.threads);
  bf::write_dataset(a.out + "/dataset.tsv", ds);
  bf::write_text_file(a.out + "/stats.txt",
                      bf::dataset_stats(ds, entities, lex, inv, a.min_similarity));

  if (a.max_hyps > 1) {
    bf::HypothesisCorpus hc;
    for (const bf::DatasetExample& ex : ds) {
      bf::Rng rng(bf::derive_seed(a.seed, "hyps|" + ex.utt_id));
      hc.utterances.push_back({ex.utt_id,
                               bf::synth_hypotheses(ex.transcript, lex, inv,
                                                    a.confusion_rate, a.max_hyps,
                                                    rng, a.min_similarity)});
    }
    bf::write_text_file(a.out + "/hyps.tsv", hc.serialize());
  }

  std::set<std::vector<std::string>> phrases;
  for (const auto& [slot, list] : entities) {
    for (const auto& p : list) phrases.insert(p);
  }
  std::string gaz;
  for (const auto& p : phrases) gaz += bf::join(p) + "\n";
  bf::write_text_file(a.out + "/gazetteer.txt", gaz);

  std::cout << "wrote " << a.out << "/dataset.tsv (" << ds.size() << " examples)\n";
  return 0;
}

// build-inventory -----------------------------------------------------------

struct BuildInvArgs {
  std::string hyps, out;
  int max_ngram_len = 3;
  int threads = 1;
};

int run_build_inventory(const BuildInvArgs& a) {
  make_run_dir(a.out);
  write_config(a.out, {{"hyps", a.hyps},
                       {"max-ngram-len", std::to_string(a.max_ngram_len)},
                       {"threads", std::to_string(a.threads)}});
  const bf::HypothesisCorpus corpus = bf::HypothesisCorpus::from_file(a.hyps);
  const bf::FuzzyInventory inv =
      bf::mine_pairs(corpus, a.max_ngram_len, a.threads);
  bf::write_text_file(a.out + "/inventory.tsv", inv.serialize());
  std::cout << "wrote " << a.out << "/inventory.tsv (" << inv.num_phrases()
            << " phrases)\n";
  return 0;
}

// tag -----------------------------------------------------------------------

struct TagArgs {
  std::string dataset, gazetteer, out;
};

int run_tag(const TagArgs& a) {
  make_run_dir(a.out);
  write_config(a.out, {{"dataset", a.dataset}, {"gazetteer", a.gazetteer}});
  const auto ds = bf::read_dataset(a.dataset);
  bf::Gazetteer gaz;
  if (!a.gazetteer.empty()) gaz = bf::Gazetteer::from_file(a.gazetteer);
  const bf::RuleTagger tagger(std::move(gaz));

  bf::SidecarTagger sidecar;
  std::size_t tagged = 0;
  for (const bf::DatasetExample& ex : ds) {
    const bf::TaggedTranscript t =
        bf::detect_proper_nouns(ex.utt_id, ex.transcript, tagger);
    if (!t.nnp_spans.empty()) ++tagged;
    sidecar.set(ex.utt_id, t.nnp_spans);
  }
  bf::write_text_file(a.out + "/tags.tsv", sidecar.serialize());
  std::cout << "wrote " << a.out << "/tags.tsv (" << tagged << "/" << ds.size()
            << " utterances with spans)\n";
  return 0;
}

// make-bias-sets ------------------------------------------------------------

struct MakeBiasArgs {
  std::string dataset, tags, inventory, lexicon, pool, out;
  SchemeFlags scheme;
  std::uint64_t seed = 0;
  int threads = 1;
};

int run_make_bias_sets(const MakeBiasArgs& a) {
  make_run_dir(a.out);
  {
    auto kv = a.scheme.dump();
    kv.insert(kv.end(), {{"dataset", a.dataset},
                         {"tags", a.tags},
                         {"inventory", a.inventory},
                         {"lexicon", a.lexicon},
                         {"pool", a.pool},
                         {"seed", std::to_string(a.seed)},
                         {"threads", std::to_string(a.threads)}});
    write_config(a.out, std::move(kv));
  }
  const bf::SchemeConfig cfg = a.scheme.config(a.seed);
  const auto ds = bf::read_dataset(a.dataset);

  const bf::PhonemeInventory& phon = bf::PhonemeInventory::builtin();
  bf::FuzzyInventory finv;
  bf::Lexicon lex;
  bf::FuzzyLookup fuzzy;
  if (bf::scheme_uses_fuzzy(cfg.scheme)) {
    if (a.inventory.empty() || a.lexicon.empty()) {
      throw bf::ConfigError("--inventory and --lexicon are required for scheme " +
                            a.scheme.scheme);
    }
    finv = bf::FuzzyInventory::from_file(a.inventory);
    lex = bf::Lexicon::from_file(phon, a.lexicon);
    fuzzy = {&finv, &lex, &phon};
  }

  const bf::DistractorPool pool = resolve_pool(
      a.pool, ds, bf::scheme_uses_nnp(cfg.scheme), cfg.max_ngram_len);

  std::unique_ptr<bf::SidecarTagger> sidecar;
  if (!a.tags.empty()) {
    sidecar = std::make_unique<bf::SidecarTagger>(bf::SidecarTagger::from_file(a.tags));
  }

  std::string out_lines;
  for (const bf::DatasetExample& ex : ds) {
    bf::TaggedTranscript tags;
    if (sidecar) {
      tags = sidecar->tag(ex.utt_id, ex.transcript);
    } else {
      tags.tokens = ex.transcript;
      tags.nnp_spans = ex.nnp_spans;
    }
    bf::Rng rng(bf::derive_seed(a.seed, "bias|e0|" + ex.utt_id));
    const bf::BiasSet set =
        bf::build_training_bias_set(ex.transcript, tags, pool, fuzzy, cfg, rng);
    out_lines += set.serialize_line(ex.utt_id) + "\n";
  }
  bf::write_text_file(a.out + "/bias_sets.tsv", out_lines);
  std::cout << "wrote " << a.out << "/bias_sets.tsv (" << ds.size() << " sets)\n";
  return 0;
}

// train ---------------------------------------------------------------------

struct TrainArgs {
  std::string dataset, inventory, lexicon, pool, out;
  SchemeFlags scheme;
  int embed_dim = 16;
  int enc_layers = 2;
  int enc_width = 64;
  int bias_enc_width = 64;
  int dec_layers = 1;
  int dec_width = 64;
  int attn_dim = 64;
  int epochs = 10;
  int batch_size = 16;
  double lr = 0.1;
  double clip_norm = 5.0;
  double init_scale = 0.1;
  std::uint64_t seed = 0;
  int threads = 1;
};

int run_train(const TrainArgs& a) {
  make_run_dir(a.out);
  {
    auto kv = a.scheme.dump();
    kv.insert(kv.end(),
              {{"dataset", a.dataset},
               {"inventory", a.inventory},
               {"lexicon", a.lexicon},
               {"pool", a.pool},
               {"embed-dim", std::to_string(a.embed_dim)},
               {"enc-layers", std::to_string(a.enc_layers)},
               {"enc-width", std::to_string(a.enc_width)},
               {"bias-enc-width", std::to_string(a.bias_enc_width)},
               {"dec-layers", std::to_string(a.dec_layers)},
               {"dec-width", std::to_string(a.dec_width)},
               {"attn-dim", std::to_string(a.attn_dim)},
               {"epochs", std::to_string(a.epochs)},
               {"batch-size", std::to_string(a.batch_size)},
               {"lr", fmt_double(a.lr)},
               {"clip-norm", fmt_double(a.clip_norm)},
               {"init-scale", fmt_double(a.init_scale)},
               {"seed", std::to_string(a.seed)},
               {"threads", std::to_string(a.threads)}});
    write_config(a.out, std::move(kv));
  }
  const bf::SchemeConfig cfg = a.scheme.config(a.seed);
  const auto ds = bf::read_dataset(a.dataset);
  if (ds.empty()) throw bf::DataError("empty dataset " + a.dataset);

  const bf::PhonemeInventory& phon = bf::PhonemeInventory::builtin();
  bf::FuzzyInventory finv;
  bf::Lexicon lex;
  bf::FuzzyLookup fuzzy;
  if (bf::scheme_uses_fuzzy(cfg.scheme)) {
    if (a.inventory.empty() || a.lexicon.empty()) {
      throw bf::ConfigError("--inventory and --lexicon are required for scheme " +
                            a.scheme.scheme);
    }
    finv = bf::FuzzyInventory::from_file(a.inventory);
    lex = bf::Lexicon::from_file(phon, a.lexicon);
    fuzzy = {&finv, &lex, &phon};
  }
  const bf::DistractorPool pool = resolve_pool(
      a.pool, ds, bf::scheme_uses_nnp(cfg.scheme), cfg.max_ngram_len);

  bf::ModelConfig mcfg;
  mcfg.frame_dim = ds[0].frames.dim;
  mcfg.embed_dim = a.embed_dim;
  mcfg.enc_layers = a.enc_layers;
  mcfg.enc_width = a.enc_width;
  mcfg.bias_enc_width = a.bias_enc_width;
  mcfg.dec_layers = a.dec_layers;
  mcfg.dec_width = a.dec_width;
  mcfg.attn_dim = a.attn_dim;

  bf::TrainConfig tcfg;
  tcfg.epochs = a.epochs;
  tcfg.batch_size = a.batch_size;
  tcfg.lr = a.lr;
  tcfg.clip_norm = a.clip_norm;
  tcfg.init_scale = a.init_scale;
  tcfg.seed = a.seed;
  tcfg.threads = a.threads;

  try {
    const bf::TrainResult res = bf::train(ds, pool, fuzzy, cfg, mcfg, tcfg);
    res.params.save(a.out + "/model.bin");
    bf::write_text_file(a.out + "/train_log.csv", bf::train_log_csv(res.log));
  } catch (const bf::TrainingFault& f) {
    bf::write_text_file(a.out + "/train_log.csv", f.log());
    throw;
  }
  std::cout << "wrote " << a.out << "/model.bin\n";
  return 0;
}

// eval ----------------------------------------------------------------------

struct EvalArgs {
  std::string model, dataset, pool, out;
  std::string name = "model";
  std::string set_name = "test";
  int n_distractors = 10;
  int beam_width = 4;
  std::uint64_t seed = 0;
  int threads = 1;
};

int run_eval(const EvalArgs& a) {
  make_run_dir(a.out);
  write_config(a.out, {{"model", a.model},
                       {"dataset", a.dataset},
                       {"pool", a.pool},
                       {"name", a.name},
                       {"set-name", a.set_name},
                       {"n-distractors", std::to_string(a.n_distractors)},
                       {"beam-width", std::to_string(a.beam_width)},
                       {"seed", std::to_string(a.seed)},
                       {"threads", std::to_string(a.threads)}});
  const bf::ModelParams params = bf::ModelParams::load(a.model);
  const auto ds = bf::read_dataset(a.dataset);
  const bf::DistractorPool pool = resolve_pool(a.pool, ds, true, 3);
  const auto set = bf::make_test_set(ds, pool, a.n_distractors, a.seed);

  bf::EvalOptions opt;
  opt.beam_width = a.beam_width;
  opt.threads = a.threads;
  std::vector<std::string> hyps;
  bf::EvalRow row = bf::evaluate(params, set, opt, &hyps);
  row.model = a.name;
  row.test_set = a.set_name;

  bf::EvalReport rep;
  rep.rows.push_back(row);
  bf::write_text_file(a.out + "/report.tsv", bf::serialize_report(rep));
  bf::write_text_file(a.out + "/comparison.csv", bf::comparison_csv(rep));
  std::string hyp_lines;
  for (std::size_t i = 0; i < set.size(); ++i) {
    hyp_lines += set[i].utt_id + "\t" + hyps[i] + "\n";
  }
  bf::write_text_file(a.out + "/hyps.tsv", hyp_lines);

  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", row.wer);
  std::cout << "wer " << buf << " over " << row.utterances << " utterances\n";
  return 0;
}

// sweep ---------------------------------------------------------------------

struct SweepArgs {
  std::string model, dataset, pool, out;
  std::string name = "model";
  std::string points = "0,10,20,40";
  int beam_width = 4;
  std::uint64_t seed = 0;
  int threads = 1;
};

int run_sweep(const SweepArgs& a) {
  make_run_dir(a.out);
  write_config(a.out, {{"model", a.model},
                       {"dataset", a.dataset},
                       {"pool", a.pool},
                       {"name", a.name},
                       {"points", a.points},
                       {"beam-width", std::to_string(a.beam_width)},
                       {"seed", std::to_string(a.seed)},
                       {"threads", std::to_string(a.threads)}});
  std::vector<int> points;
  for (const std::string& tok : bf::split(a.points, ',')) {
    try {
      points.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw bf::ConfigError("bad sweep point '" + tok + "'");
    }
  }
  const bf::ModelParams params = bf::ModelParams::load(a.model);
  const auto ds = bf::read_dataset(a.dataset);
  const bf::DistractorPool pool = resolve_pool(a.pool, ds, true, 3);

  bf::EvalOptions opt;
  opt.beam_width = a.beam_width;
  opt.threads = a.threads;
  const auto curve = bf::distractor_sweep(params, ds, pool, points, a.seed, opt);

  bf::EvalReport rep;
  rep.sweeps.emplace_back(a.name, curve);
  bf::write_text_file(a.out + "/report.tsv", bf::serialize_report(rep));
  bf::emit_plots(rep, a.out);
  std::cout << "wrote " << a.out << "/sweep.csv (" << curve.size() << " points)\n";
  return 0;
}

// attention -----------------------------------------------------------------

struct AttentionArgs {
  std::string model, dataset, inventory, lexicon, pool, out;
  int n_fuzzy = 9;
  int n_random = 0;
  double tau_phon = 0.6;
  int beam_width = 4;
  int heatmaps = 3;
  std::uint64_t seed = 0;
  int threads = 1;
};

int run_attention(const AttentionArgs& a) {
  make_run_dir(a.out);
  write_config(a.out, {{"model", a.model},
                       {"dataset", a.dataset},
                       {"inventory", a.inventory},
                       {"lexicon", a.lexicon},
                       {"pool", a.pool},
                       {"n-fuzzy", std::to_string(a.n_fuzzy)},
                       {"n-random", std::to_string(a.n_random)},
                       {"tau-phon", fmt_double(a.tau_phon)},
                       {"beam-width", std::to_string(a.beam_width)},
                       {"heatmaps", std::to_string(a.heatmaps)},
                       {"seed", std::to_string(a.seed)},
                       {"threads", std::to_string(a.threads)}});
  const bf::ModelParams params = bf::ModelParams::load(a.model);
  const auto ds = bf::read_dataset(a.dataset);

  const bf::PhonemeInventory& phon = bf::PhonemeInventory::builtin();
  if (a.inventory.empty() || a.lexicon.empty()) {
    throw bf::ConfigError("--inventory and --lexicon are required");
  }
  const bf::FuzzyInventory finv = bf::FuzzyInventory::from_file(a.inventory);
  const bf::Lexicon lex = bf::Lexicon::from_file(phon, a.lexicon);
  const bf::FuzzyLookup fuzzy{&finv, &lex, &phon};

  bf::DistractorPool pool;
  if (a.n_random > 0) pool = resolve_pool(a.pool, ds, true, 3);
  const auto set = bf::make_fuzzy_test_set(ds, fuzzy, pool, a.n_fuzzy,
                                           a.n_random, a.tau_phon, a.seed);

  bf::EvalOptions opt;
  opt.beam_width = a.beam_width;
  opt.threads = a.threads;
  std::vector<std::string> trace_lines;
  const bf::AttentionReport rep =
      bf::attention_metrics(params, set, opt, &trace_lines);

  char buf[48];
  std::string metrics;
  for (const bf::AttentionUtt& u : rep.utts) {
    metrics += u.utt_id;
    std::snprintf(buf, sizeof buf, "\t%a\t%a\t%a\n", u.mass_on_truth,
                  u.top1_truth_rate, u.entropy);
    metrics += buf;
  }
  std::snprintf(buf, sizeof buf, "%a", rep.mean_mass_on_truth);
  metrics += std::string("mean_mass_on_truth=") + buf + "\n";
  std::snprintf(buf, sizeof buf, "%a", rep.mean_top1_truth_rate);
  metrics += std::string("mean_top1_truth_rate=") + buf + "\n";
  std::snprintf(buf, sizeof buf, "%a", rep.mean_entropy);
  metrics += std::string("mean_entropy=") + buf + "\n";
  bf::write_text_file(a.out + "/metrics.tsv", metrics);

  std::string traces;
  for (const std::string& line : trace_lines) traces += line + "\n";
  bf::write_text_file(a.out + "/traces.tsv", traces);

  const int hm = std::min<int>(a.heatmaps, static_cast<int>(set.size()));
  for (int i = 0; i < hm; ++i) {
    const bf::DecodeResult r =
        bf::decode(*set[static_cast<std::size_t>(i)].frames,
                   set[static_cast<std::size_t>(i)].bias, params, a.beam_width);
    bf::write_text_file(a.out + "/trace_" + set[static_cast<std::size_t>(i)].utt_id + ".svg",
                        bf::trace_heatmap_svg(r.trace));
  }

  std::snprintf(buf, sizeof buf, "%.4f", rep.mean_mass_on_truth);
  std::cout << "mean mass_on_truth " << buf << " over " << rep.utts.size()
            << " utterances\n";
  return 0;
}

// plot ----------------------------------------------------------------------

struct PlotArgs {
  std::string report, traces, utt, out;
};

int run_plot(const PlotArgs& a) {
  make_run_dir(a.out);
  write_config(a.out, {{"report", a.report}, {"traces", a.traces}, {"utt", a.utt}});
  if (a.report.empty() && a.traces.empty()) {
    throw bf::ConfigError("need --report or --traces");
  }
  if (!a.report.empty()) {
    const bf::EvalReport rep = bf::parse_report(bf::read_text_file(a.report));
    bf::emit_plots(rep, a.out);
    std::cout << "wrote " << a.out << "/comparison.csv, sweep.csv, sweep.svg\n";
  }
  if (!a.traces.empty()) {
    // Rebuild the per-step weight rows of one utterance from the trace file.
    bf::AttentionTrace trace;
    std::string want = a.utt;
    const std::vector<std::string> lines = bf::read_lines(a.traces);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      const auto f = bf::split(lines[i], '\t');
      const int lineno = static_cast<int>(i) + 1;
      if (f.size() < 3) throw bf::ParseError(a.traces, lineno, "short record");
      if (want.empty()) want = f[1];
      if (f[1] != want) continue;
      if (f[0] == "labels") {
        trace.labels = bf::split(f[2], '|');
      } else if (f[0] == "alpha") {
        if (f.size() != 4) throw bf::ParseError(a.traces, lineno, "expected 4 fields");
        std::vector<double> row;
        for (const std::string& v : bf::split(f[3], ',')) {
          char* end = nullptr;
          const double x = std::strtod(v.c_str(), &end);
          if (end != v.c_str() + v.size() || v.empty()) {
            throw bf::ParseError(a.traces, lineno, "bad weight '" + v + "'");
          }
          row.push_back(x);
        }
        trace.bias_rows.push_back(std::move(row));
      } else {
        throw bf::ParseError(a.traces, lineno, "unknown record '" + f[0] + "'");
      }
    }
    if (trace.bias_rows.empty()) {
      throw bf::DataError("no trace rows for utterance '" + want + "' in " + a.traces);
    }
    bf::write_text_file(a.out + "/trace_" + want + ".svg",
                        bf::trace_heatmap_svg(trace));
    std::cout << "wrote " << a.out << "/trace_" << want << ".svg\n";
  }
  return 0;
}

// wer -----------------------------------------------------------------------

struct WerArgs {
  std::string ref, hyp;
};

int run_wer(const WerArgs& a) {
  const std::vector<std::string> ref = bf::tokenize(bf::read_text_file(a.ref));
  const std::vector<std::string> hyp = bf::tokenize(bf::read_text_file(a.hyp));
  const bf::WerResult r = bf::wer(ref, hyp);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", r.wer);
  std::cout << buf << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"difficult-negative bias-set pipeline for contextual speech recognition"};
  app.require_subcommand(1);

  GenDataArgs gen;
  CLI::App* g = app.add_subcommand("gen-data", "synthesize a dataset from templates");
  g->set_config("--config");
  g->add_option("--templates", gen.templates, "template file")->required();
  g->add_option("--entities", gen.entities, "slot entity table")->required();
  g->add_option("--lexicon", gen.lexicon, "pronunciation lexicon")->required();
  g->add_option("--out", gen.out, "run directory")->required();
  g->add_option("--size", gen.size, "number of utterances");
  g->add_option("--frame-dim", gen.frame_dim, "audio frame dimension");
  g->add_option("--dur-min", gen.dur_min, "min frames per phoneme");
  g->add_option("--dur-max", gen.dur_max, "max frames per phoneme");
  g->add_option("--noise-sigma", gen.noise_sigma, "frame noise scale");
  g->add_option("--confusion-rate", gen.confusion_rate, "hypothesis confusion rate");
  g->add_option("--max-hyps", gen.max_hyps, "hypotheses per utterance");
  g->add_option("--min-similarity", gen.min_similarity, "confusable similarity floor");
  g->add_option("--seed", gen.seed, "rng seed")->envname("BIASFORGE_SEED");
  g->add_option("--threads", gen.threads, "worker threads");

  BuildInvArgs binv;
  CLI::App* b = app.add_subcommand("build-inventory", "mine fuzzy pairs from hypotheses");
  b->set_config("--config");
  b->add_option("--hyps", binv.hyps, "hypothesis corpus file")->required();
  b->add_option("--out", binv.out, "run directory")->required();
  b->add_option("--max-ngram-len", binv.max_ngram_len, "n-gram length cap");
  b->add_option("--threads", binv.threads, "worker threads");

  TagArgs tag;
  CLI::App* t = app.add_subcommand("tag", "detect proper-noun spans");
  t->set_config("--config");
  t->add_option("--dataset", tag.dataset, "dataset file")->required();
  t->add_option("--out", tag.out, "run directory")->required();
  t->add_option("--gazetteer", tag.gazetteer, "known proper-noun phrases");

  MakeBiasArgs mb;
  CLI::App* m = app.add_subcommand("make-bias-sets", "materialize training bias sets");
  m->set_config("--config");
  m->add_option("--dataset", mb.dataset, "dataset file")->required();
  m->add_option("--out", mb.out, "run directory")->required();
  m->add_option("--tags", mb.tags, "sidecar span file");
  m->add_option("--inventory", mb.inventory, "fuzzy inventory file");
  m->add_option("--lexicon", mb.lexicon, "pronunciation lexicon");
  m->add_option("--pool", mb.pool, "distractor phrase file");
  mb.scheme.add(m);
  m->add_option("--seed", mb.seed, "rng seed")->envname("BIASFORGE_SEED");
  m->add_option("--threads", mb.threads, "worker threads");

  TrainArgs tr;
  CLI::App* r = app.add_subcommand("train", "train a biasing model");
  r->set_config("--config");
  r->add_option("--dataset", tr.dataset, "dataset file")->required();
  r->add_option("--out", tr.out, "run directory")->required();
  r->add_option("--inventory", tr.inventory, "fuzzy inventory file");
  r->add_option("--lexicon", tr.lexicon, "pronunciation lexicon");
  r->add_option("--pool", tr.pool, "distractor phrase file");
  tr.scheme.add(r);
  r->add_option("--embed-dim", tr.embed_dim, "grapheme embedding width");
  r->add_option("--enc-layers", tr.enc_layers, "audio encoder layers");
  r->add_option("--enc-width", tr.enc_width, "audio encoder width");
  r->add_option("--bias-enc-width", tr.bias_enc_width, "bias encoder width");
  r->add_option("--dec-layers", tr.dec_layers, "decoder layers");
  r->add_option("--dec-width", tr.dec_width, "decoder width");
  r->add_option("--attn-dim", tr.attn_dim, "attention projection width");
  r->add_option("--epochs", tr.epochs, "training epochs");
  r->add_option("--batch-size", tr.batch_size, "examples per batch");
  r->add_option("--lr", tr.lr, "learning rate");
  r->add_option("--clip-norm", tr.clip_norm, "gradient norm clip");
  r->add_option("--init-scale", tr.init_scale, "init weight scale");
  r->add_option("--seed", tr.seed, "rng seed")->envname("BIASFORGE_SEED");
  r->add_option("--threads", tr.threads, "worker threads");

  EvalArgs ev;
  CLI::App* e = app.add_subcommand("eval", "decode a test set and report error rates");
  e->set_config("--config");
  e->add_option("--model", ev.model, "model checkpoint")->required();
  e->add_option("--dataset", ev.dataset, "test dataset file")->required();
  e->add_option("--out", ev.out, "run directory")->required();
  e->add_option("--pool", ev.pool, "distractor phrase file");
  e->add_option("--name", ev.name, "model label");
  e->add_option("--set-name", ev.set_name, "test set label");
  e->add_option("--n-distractors", ev.n_distractors, "distractors per bias set");
  e->add_option("--beam-width", ev.beam_width, "beam width");
  e->add_option("--seed", ev.seed, "rng seed")->envname("BIASFORGE_SEED");
  e->add_option("--threads", ev.threads, "worker threads");

  SweepArgs sw;
  CLI::App* s = app.add_subcommand("sweep", "error rate vs bias set size");
  s->set_config("--config");
  s->add_option("--model", sw.model, "model checkpoint")->required();
  s->add_option("--dataset", sw.dataset, "test dataset file")->required();
  s->add_option("--out", sw.out, "run directory")->required();
  s->add_option("--pool", sw.pool, "distractor phrase file");
  s->add_option("--name", sw.name, "model label");
  s->add_option("--points", sw.points, "comma-separated distractor counts");
  s->add_option("--beam-width", sw.beam_width, "beam width");
  s->add_option("--seed", sw.seed, "rng seed")->envname("BIASFORGE_SEED");
  s->add_option("--threads", sw.threads, "worker threads");

  AttentionArgs at;
  CLI::App* n = app.add_subcommand("attention", "bias-attention statistics and traces");
  n->set_config("--config");
  n->add_option("--model", at.model, "model checkpoint")->required();
  n->add_option("--dataset", at.dataset, "test dataset file")->required();
  n->add_option("--out", at.out, "run directory")->required();
  n->add_option("--inventory", at.inventory, "fuzzy inventory file")->required();
  n->add_option("--lexicon", at.lexicon, "pronunciation lexicon")->required();
  n->add_option("--pool", at.pool, "distractor phrase file");
  n->add_option("--n-fuzzy", at.n_fuzzy, "fuzzy alternatives per set");
  n->add_option("--n-random", at.n_random, "random distractors per set");
  n->add_option("--tau-phon", at.tau_phon, "phonetic similarity threshold");
  n->add_option("--beam-width", at.beam_width, "beam width");
  n->add_option("--heatmaps", at.heatmaps, "per-utterance heatmap files to write");
  n->add_option("--seed", at.seed, "rng seed")->envname("BIASFORGE_SEED");
  n->add_option("--threads", at.threads, "worker threads");

  PlotArgs pl;
  CLI::App* p = app.add_subcommand("plot", "render report or trace files");
  p->set_config("--config");
  p->add_option("--out", pl.out, "run directory")->required();
  p->add_option("--report", pl.report, "serialized report file");
  p->add_option("--traces", pl.traces, "trace file");
  p->add_option("--utt", pl.utt, "utterance id to plot");

  WerArgs wa;
  CLI::App* w = app.add_subcommand("wer", "word error rate between two text files");
  w->add_option("--ref", wa.ref, "reference text file")->required();
  w->add_option("--hyp", wa.hyp, "hypothesis text file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e2) {
    return app.exit(e2);
  } catch (const CLI::ParseError& e2) {
    app.exit(e2);
    return 1;
  }

  try {
    if (g->parsed()) return run_gen_data(gen);
    if (b->parsed()) return run_build_inventory(binv);
    if (t->parsed()) return run_tag(tag);
    if (m->parsed()) return run_make_bias_sets(mb);
    if (r->parsed()) return run_train(tr);
    if (e->parsed()) return run_eval(ev);
    if (s->parsed()) return run_sweep(sw);
    if (n->parsed()) return run_attention(at);
    if (p->parsed()) return run_plot(pl);
    if (w->parsed()) return run_wer(wa);
  } catch (const bf::ConfigError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 1;
}
