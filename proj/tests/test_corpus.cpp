#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "biasforge/corpus.hpp"
#include "biasforge/errors.hpp"
#include "biasforge/rng.hpp"
#include "biasforge/text.hpp"
#include "doctest.h"

using namespace biasforge;

namespace {

const char* kDataDir = BIASFORGE_DATA_DIR;

struct Shipped {
  const PhonemeInventory& inv = PhonemeInventory::builtin();
  Lexicon lex = Lexicon::from_file(inv, std::string(kDataDir) + "/lexicon.tsv");
  std::vector<std::vector<std::string>> templates =
      load_templates(std::string(kDataDir) + "/templates_contacts.txt");
  EntityTable entities =
      load_entities(std::string(kDataDir) + "/entities_contacts.tsv");
};

double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("frame and synth config validation") {
  FrameSeq fs;
  fs.dim = 2;
  fs.frames = {{0.0, 1.0}, {2.0, 3.0}};
  CHECK_NOTHROW(fs.validate());
  fs.frames.push_back({1.0});
  CHECK_THROWS_AS(fs.validate(), DataError);

  SynthConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  SynthConfig bad = cfg;
  bad.frame_dim = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.dur_min = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.dur_min = 3;
  bad.dur_max = 2;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.noise_sigma = -0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("prototypes depend only on inventory and dimension") {
  const auto& inv = PhonemeInventory::builtin();
  PhonemePrototypes a(inv, 12), b(inv, 12);
  for (int p = 0; p < static_cast<int>(inv.size()); ++p) {
    CHECK(a.prototype(p) == b.prototype(p));
    CHECK(a.prototype(p).size() == 12);
  }
  // Feature sharing shows up geometrically: P and B (one differing slot)
  // sit closer than P and a vowel.
  double d_pb = euclid(a.prototype(inv.id("P")), a.prototype(inv.id("B")));
  double d_pa = euclid(a.prototype(inv.id("P")), a.prototype(inv.id("AA")));
  CHECK(d_pb < d_pa);
}

TEST_CASE("noiseless synthesis emits exact prototype copies") {
  Shipped s;
  PhonemePrototypes protos(s.inv, 8);
  SynthConfig cfg;
  cfg.frame_dim = 8;
  cfg.dur_min = 2;
  cfg.dur_max = 2;
  cfg.noise_sigma = 0.0;

  std::vector<std::string> words = {"call", "joan"};
  PhonemeSeq prons = to_phonemes(words, s.lex, s.inv);
  Rng rng(3);
  FrameSeq fs = synth_audio(words, s.lex, s.inv, protos, cfg, rng);
  REQUIRE(fs.size() == prons.size() * 2);
  for (std::size_t i = 0; i < prons.size(); ++i) {
    CHECK(fs.frames[2 * i] == protos.prototype(prons.ids[i]));
    CHECK(fs.frames[2 * i + 1] == protos.prototype(prons.ids[i]));
  }

  // Variable durations stay within bounds.
  cfg.dur_min = 1;
  cfg.dur_max = 3;
  Rng rng2(4);
  FrameSeq vs = synth_audio(words, s.lex, s.inv, protos, cfg, rng2);
  CHECK(vs.size() >= prons.size());
  CHECK(vs.size() <= prons.size() * 3);
}

TEST_CASE("prototype distance anti-correlates with phonetic similarity") {
  Shipped s;
  PhonemePrototypes protos(s.inv, 16);
  auto words = s.lex.words();
  Rng rng(11);
  std::vector<std::pair<double, double>> pts;  // (similarity, distance)
  for (int t = 0; t < 150; ++t) {
    const std::string& a = words[rng.uniform_u64(words.size())];
    const std::string& b = words[rng.uniform_u64(words.size())];
    if (a == b) continue;
    double sim = phonetic_similarity(to_phonemes({a}, s.lex, s.inv),
                                     to_phonemes({b}, s.lex, s.inv), s.inv);
    double dist = mean_prototype_distance(a, b, s.lex, s.inv, protos);
    pts.emplace_back(sim, dist);
  }
  REQUIRE(pts.size() >= 100);
  // Spearman rank correlation.
  auto ranks = [](std::vector<double> v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto x, auto y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
    return r;
  };
  std::vector<double> sims, dists;
  for (auto& [x, y] : pts) {
    sims.push_back(x);
    dists.push_back(y);
  }
  auto rs = ranks(sims), rd = ranks(dists);
  double n = static_cast<double>(rs.size());
  double ms = (n - 1) / 2, cov = 0, vs = 0, vd = 0;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    cov += (rs[i] - ms) * (rd[i] - ms);
    vs += (rs[i] - ms) * (rs[i] - ms);
    vd += (rd[i] - ms) * (rd[i] - ms);
  }
  double rho = cov / std::sqrt(vs * vd);
  CHECK(rho < 0.0);
}

TEST_CASE("synthetic hypotheses start from the transcript") {
  Shipped s;
  std::vector<std::string> transcript = {"call", "joan", "now"};
  Rng rng(17);
  auto hyps = synth_hypotheses(transcript, s.lex, s.inv, 0.8, 6, rng, 0.6);
  REQUIRE(!hyps.empty());
  CHECK(hyps[0] == transcript);
  CHECK(hyps.size() <= 6);
  std::set<std::vector<std::string>> uniq(hyps.begin(), hyps.end());
  CHECK(uniq.size() == hyps.size());
  // Every variant differs in exactly one word, phonetically close.
  for (std::size_t h = 1; h < hyps.size(); ++h) {
    REQUIRE(hyps[h].size() == transcript.size());
    int diffs = 0;
    for (std::size_t w = 0; w < transcript.size(); ++w) {
      if (hyps[h][w] == transcript[w]) continue;
      ++diffs;
      double sim = phonetic_similarity(to_phonemes({transcript[w]}, s.lex, s.inv),
                                       to_phonemes({hyps[h][w]}, s.lex, s.inv), s.inv);
      CHECK(sim >= 0.6);
    }
    CHECK(diffs == 1);
  }

  // Zero confusion rate leaves only the transcript.
  Rng rng2(17);
  CHECK(synth_hypotheses(transcript, s.lex, s.inv, 0.0, 6, rng2, 0.6).size() == 1);
}

TEST_CASE("template and entity loaders reject malformed inputs") {
  Shipped s;
  CHECK(s.templates.size() >= 5);
  for (const auto& t : s.templates) {
    bool has_slot = false;
    for (const auto& tok : t) has_slot |= is_slot_token(tok);
    CHECK(has_slot);
  }
  REQUIRE(s.entities.count("NAME"));
  CHECK(s.entities.at("NAME").size() == 50);

  CHECK(is_slot_token("<NAME>"));
  CHECK_FALSE(is_slot_token("<>"));
  CHECK_FALSE(is_slot_token("name"));
  CHECK(slot_name("<NAME>") == "NAME");

  CHECK_THROWS_AS(load_templates("/nonexistent/path.txt"), ParseError);
  CHECK_THROWS_AS(load_entities("/nonexistent/path.tsv"), ParseError);
}

TEST_CASE("dataset generation is deterministic and thread-invariant") {
  Shipped s;
  SynthConfig cfg;
  cfg.frame_dim = 8;
  cfg.noise_sigma = 0.3;
  cfg.seed = 404;
  auto d1 = make_dataset(s.templates, s.entities, 40, s.lex, s.inv, cfg, 1);
  auto d2 = make_dataset(s.templates, s.entities, 40, s.lex, s.inv, cfg, 3);
  REQUIRE(d1.size() == 40);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < d1.size(); ++i) {
    CHECK(serialize_example(d1[i]) == serialize_example(d2[i]));
    ids.insert(d1[i].utt_id);
    // Spans cover the filler tokens.
    REQUIRE(d1[i].nnp_spans.size() == 1);
    auto [a, b] = d1[i].nnp_spans[0];
    CHECK(b - a == 1);
    CHECK(s.lex.find(d1[i].transcript[static_cast<std::size_t>(a)]) != nullptr);
  }
  CHECK(ids.size() == 40);

  SynthConfig other = cfg;
  other.seed = 405;
  auto d3 = make_dataset(s.templates, s.entities, 40, s.lex, s.inv, other, 1);
  bool any_diff = false;
  for (std::size_t i = 0; i < d1.size(); ++i) {
    any_diff |= serialize_example(d1[i]) != serialize_example(d3[i]);
  }
  CHECK(any_diff);
}

TEST_CASE("dataset lines round-trip byte-exactly") {
  Shipped s;
  SynthConfig cfg;
  cfg.frame_dim = 6;
  cfg.noise_sigma = 0.7;
  cfg.seed = 9;
  auto ds = make_dataset(s.templates, s.entities, 12, s.lex, s.inv, cfg, 1);

  for (const auto& ex : ds) {
    std::string line = serialize_example(ex);
    DatasetExample back = parse_example(line, "<mem>", 1);
    CHECK(serialize_example(back) == line);
  }

  std::string path = "/tmp/biasforge_test_ds.txt";
  write_dataset(path, ds);
  auto back = read_dataset(path);
  REQUIRE(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(serialize_example(back[i]) == serialize_example(ds[i]));
  }
  std::remove(path.c_str());

  CHECK_THROWS_AS(parse_example("onlyonefield", "<mem>", 1), ParseError);
  CHECK_THROWS_AS(parse_example("u\ta b\t0:1\tx\t", "<mem>", 1), ParseError);
  CHECK_THROWS_AS(parse_example("u\ta b\t0:9\t2\t", "<mem>", 1), ParseError);
  CHECK_THROWS_AS(parse_example("u\ta b\t0:1\t2\t1.0", "<mem>", 1), ParseError);
  CHECK_THROWS_AS(parse_example("u\ta b\t0:1\t1\tzz", "<mem>", 1), ParseError);
}

TEST_CASE("shipped contacts corpus has the designed confusable structure") {
  Shipped s;
  SynthConfig cfg;
  cfg.frame_dim = 8;
  cfg.noise_sigma = 0.5;
  cfg.seed = 1;
  auto ds = make_dataset(s.templates, s.entities, 300, s.lex, s.inv, cfg, 1);
  std::string stats = dataset_stats(ds, s.entities, s.lex, s.inv, 0.6);

  CHECK(stats.find("examples=300\n") != std::string::npos);
  CHECK(stats.find("slot.NAME.entities=50\n") != std::string::npos);
  // Ten designed confusable name pairs at the 0.6 threshold.
  CHECK(stats.find("slot.NAME.confusable_pairs=10\n") != std::string::npos);

  // Stats are a pure function of their inputs.
  CHECK(dataset_stats(ds, s.entities, s.lex, s.inv, 0.6) == stats);
}
