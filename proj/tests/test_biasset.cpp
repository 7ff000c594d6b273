#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "biasforge/biasset.hpp"
#include "biasforge/errors.hpp"
#include "biasforge/rng.hpp"
#include "doctest.h"

using namespace biasforge;

namespace {

struct Fixture {
  const PhonemeInventory& inv = PhonemeInventory::builtin();
  Lexicon lex;
  FuzzyInventory mined;
  FuzzyLookup fuzzy{&mined, &lex, &inv};
  DistractorPool pool;
  std::vector<std::string> transcript = {"call", "joan", "now"};
  TaggedTranscript tags;

  Fixture() {
    lex.add("joan", inv.seq({"JH", "OW", "N"}));
    lex.add("john", inv.seq({"JH", "AA", "N"}));
    lex.add("jean", inv.seq({"JH", "IY", "N"}));
    lex.add("mara", inv.seq({"M", "AA", "R", "AH"}));
    lex.add("mira", inv.seq({"M", "IH", "R", "AH"}));
    mined.add_pair("joan", "john", 3);
    mined.add_pair("joan", "jean", 1);
    mined.add_pair("mara", "mira", 2);
    for (const char* w : {"mara", "felix", "ingrid", "oscar", "winston"}) {
      pool.phrases.push_back({w});
    }
    tags.tokens = transcript;
    tags.nnp_spans = {{1, 2}};
  }
};

std::set<std::string> texts(const BiasSet& set) {
  std::set<std::string> out;
  for (const auto& p : set.phrases) out.insert(p.text());
  return out;
}

const BiasPhrase* find_phrase(const BiasSet& set, const std::string& text) {
  for (const auto& p : set.phrases) {
    if (p.text() == text) return &p;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("scheme names parse and print consistently") {
  for (Scheme s : {Scheme::vanilla, Scheme::nnp, Scheme::fuzzy, Scheme::nnp_fuzzy}) {
    CHECK(parse_scheme(scheme_name(s)) == s);
  }
  CHECK_THROWS_AS(parse_scheme("bogus"), ConfigError);
  CHECK(scheme_uses_nnp(Scheme::nnp));
  CHECK(scheme_uses_nnp(Scheme::nnp_fuzzy));
  CHECK_FALSE(scheme_uses_nnp(Scheme::vanilla));
  CHECK(scheme_uses_fuzzy(Scheme::fuzzy));
  CHECK(scheme_uses_fuzzy(Scheme::nnp_fuzzy));
  CHECK_FALSE(scheme_uses_fuzzy(Scheme::nnp));
}

TEST_CASE("scheme config validation") {
  SchemeConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  SchemeConfig bad = cfg;
  bad.n_max = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.k_ref = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.alpha_drop = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.tau_phon = -0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  // Worst-case reference + fuzzy load must fit under the cap.
  bad = cfg;
  bad.n_max = 10;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  CHECK(SchemeConfig{Scheme::fuzzy}.fuzz_distractors());
  CHECK_FALSE(SchemeConfig{Scheme::nnp_fuzzy}.fuzz_distractors());
  SchemeConfig forced{Scheme::nnp_fuzzy};
  forced.fuzz_distractors_override = true;
  forced.fuzz_distractors_value = true;
  CHECK(forced.fuzz_distractors());
}

TEST_CASE("nnp scheme pulls tagged spans plus pool fill") {
  Fixture f;
  SchemeConfig cfg;
  cfg.scheme = Scheme::nnp;
  bool saw_full = false, saw_partial = false;
  for (int seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    BiasSet set =
        build_training_bias_set(f.transcript, f.tags, f.pool, f.fuzzy, cfg, rng);

    // The tagged span always rides along; the fill size varies per example
    // between that and the pool limit.
    REQUIRE(set.size() >= 1);
    CHECK(set.size() <= f.pool.phrases.size() + 1);
    if (set.size() == f.pool.phrases.size() + 1) saw_full = true;
    if (set.size() < f.pool.phrases.size() + 1) saw_partial = true;

    const BiasPhrase* joan = find_phrase(set, "joan");
    REQUIRE(joan != nullptr);
    CHECK(joan->origin == PhraseOrigin::reference);
    for (const auto& p : set.phrases) {
      if (p.text() != "joan") CHECK(p.origin == PhraseOrigin::distractor);
    }
    // Truth = phrases found in the transcript, sorted indices.
    REQUIRE(set.truth.size() == 1);
    CHECK(set.phrases[static_cast<std::size_t>(set.truth[0])].text() == "joan");
    CHECK(std::is_sorted(set.truth.begin(), set.truth.end()));
    CHECK(set.is_truth(set.truth[0]));
  }
  CHECK(saw_full);
  CHECK(saw_partial);
}

TEST_CASE("nnp_fuzzy adds alternatives of the reference only") {
  Fixture f;
  SchemeConfig cfg;
  cfg.scheme = Scheme::nnp_fuzzy;
  bool saw_mara = false;
  for (int seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    BiasSet set =
        build_training_bias_set(f.transcript, f.tags, f.pool, f.fuzzy, cfg, rng);
    auto t = texts(set);
    // joan's mined alternatives pass tau_phon 0.6 (sims 7/9 and 2/3).
    CHECK(t.count("john"));
    CHECK(t.count("jean"));
    CHECK(find_phrase(set, "john")->origin == PhraseOrigin::fuzzy);
    // mara only ever enters as a distractor, so its alternative mira must
    // never appear under this scheme.
    if (t.count("mara")) saw_mara = true;
    CHECK_FALSE(t.count("mira"));
  }
  CHECK(saw_mara);

  // Raising tau past 7/9 filters both alternatives out.
  SchemeConfig strict = cfg;
  strict.tau_phon = 0.9;
  Rng rng2(43);
  BiasSet strict_set =
      build_training_bias_set(f.transcript, f.tags, f.pool, f.fuzzy, strict, rng2);
  CHECK_FALSE(texts(strict_set).count("john"));
}

TEST_CASE("fuzzy scheme fuzzes sampled distractors too") {
  Fixture f;
  SchemeConfig cfg;
  cfg.scheme = Scheme::fuzzy;
  bool saw_mira = false;
  for (int seed = 0; seed < 50; ++seed) {
    // When mara gets sampled from the pool its alternative rides along
    // (unless the size target cuts the fill short at exactly that point).
    Rng rng(seed);
    BiasSet set =
        build_training_bias_set(f.transcript, f.tags, f.pool, f.fuzzy, cfg, rng);
    const BiasPhrase* mira = find_phrase(set, "mira");
    if (mira == nullptr) continue;
    saw_mira = true;
    CHECK(mira->origin == PhraseOrigin::fuzzy);
    CHECK(texts(set).count("mara"));

    // The override turns distractor fuzzing off for the same scheme.
    SchemeConfig off = cfg;
    off.fuzz_distractors_override = true;
    off.fuzz_distractors_value = false;
    Rng rng2(seed);
    BiasSet off_set =
        build_training_bias_set(f.transcript, f.tags, f.pool, f.fuzzy, off, rng2);
    CHECK_FALSE(texts(off_set).count("mira"));
  }
  CHECK(saw_mira);
}

TEST_CASE("vanilla scheme samples reference n-grams") {
  Fixture f;
  SchemeConfig cfg;
  cfg.scheme = Scheme::vanilla;
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    BiasSet set =
        build_training_bias_set(f.transcript, f.tags, f.pool, f.fuzzy, cfg, rng);
    int refs = 0;
    for (const auto& p : set.phrases) {
      if (p.origin != PhraseOrigin::reference) continue;
      ++refs;
      // Every reference phrase is a contiguous n-gram of the transcript.
      CHECK(p.tokens.size() <= static_cast<std::size_t>(cfg.max_ngram_len));
      CHECK(contains_token_seq(f.transcript, p.tokens));
    }
    CHECK(refs >= 1);
    CHECK(refs <= cfg.k_ref);
  }
}

TEST_CASE("sets respect n_max and contain no duplicate phrases") {
  Fixture f;
  for (int i = 0; i < 60; ++i) f.pool.phrases.push_back({"name" + std::to_string(i)});
  for (Scheme s : {Scheme::vanilla, Scheme::nnp, Scheme::fuzzy, Scheme::nnp_fuzzy}) {
    SchemeConfig cfg;
    cfg.scheme = s;
    cfg.n_max = 16;
    cfg.k_ref = 2;
    cfg.k_fuzzy = 3;
    for (int seed = 0; seed < 25; ++seed) {
      Rng rng(seed);
      BiasSet set =
          build_training_bias_set(f.transcript, f.tags, f.pool, f.fuzzy, cfg, rng);
      CHECK(set.size() <= 16);
      CHECK(texts(set).size() == set.size());
    }
  }
}

TEST_CASE("fill size varies per example across the full range") {
  Fixture f;
  f.pool.phrases.clear();
  for (int i = 0; i < 80; ++i) f.pool.phrases.push_back({"name" + std::to_string(i)});
  SchemeConfig cfg;
  cfg.scheme = Scheme::nnp;

  std::size_t lo = 1000, hi = 0;
  double total = 0.0;
  const int trials = 500;
  for (int seed = 0; seed < trials; ++seed) {
    Rng rng(seed);
    BiasSet set =
        build_training_bias_set(f.transcript, f.tags, f.pool, f.fuzzy, cfg, rng);
    REQUIRE(set.size() >= 1);
    REQUIRE(set.size() <= static_cast<std::size_t>(cfg.n_max));
    lo = std::min(lo, set.size());
    hi = std::max(hi, set.size());
    total += static_cast<double>(set.size());
  }
  // Uniform target over [1, 64]: both ends get hit and the mean sits near
  // the middle. The cap itself must be reached, never exceeded.
  CHECK(lo <= 4);
  CHECK(hi == static_cast<std::size_t>(cfg.n_max));
  CHECK(total / trials > 28.0);
  CHECK(total / trials < 37.0);
}

TEST_CASE("alpha_drop empties the expected fraction of sets") {
  Fixture f;
  SchemeConfig cfg;
  cfg.scheme = Scheme::nnp_fuzzy;
  cfg.alpha_drop = 0.30;
  Rng rng(2024);
  int empty = 0;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) {
    BiasSet set =
        build_training_bias_set(f.transcript, f.tags, f.pool, f.fuzzy, cfg, rng);
    if (set.empty()) {
      ++empty;
    } else {
      CHECK(set.size() <= static_cast<std::size_t>(cfg.n_max));
    }
  }
  double freq = static_cast<double>(empty) / trials;
  CHECK(freq > 0.28);
  CHECK(freq < 0.32);

  // alpha_drop=1 always drops, 0 never does.
  cfg.alpha_drop = 1.0;
  Rng always(1);
  CHECK(build_training_bias_set(f.transcript, f.tags, f.pool, f.fuzzy, cfg, always)
            .empty());
  cfg.alpha_drop = 0.0;
  Rng never(1);
  CHECK_FALSE(
      build_training_bias_set(f.transcript, f.tags, f.pool, f.fuzzy, cfg, never)
          .empty());
}

TEST_CASE("builds are deterministic under the rng seed") {
  Fixture f;
  SchemeConfig cfg;
  cfg.scheme = Scheme::nnp_fuzzy;
  Rng a(99), b(99), c(100);
  BiasSet sa = build_training_bias_set(f.transcript, f.tags, f.pool, f.fuzzy, cfg, a);
  BiasSet sb = build_training_bias_set(f.transcript, f.tags, f.pool, f.fuzzy, cfg, b);
  BiasSet sc = build_training_bias_set(f.transcript, f.tags, f.pool, f.fuzzy, cfg, c);
  CHECK(sa.serialize_line("u") == sb.serialize_line("u"));
  // The mandatory reference and fuzzy content shows up on every stream.
  for (const BiasSet* s : {&sa, &sc}) {
    auto t = texts(*s);
    CHECK(t.count("joan"));
    CHECK(t.count("john"));
    CHECK(t.count("jean"));
  }
}

TEST_CASE("untagged utterances under nnp fall back to pool-only sets") {
  Fixture f;
  f.tags.nnp_spans.clear();
  SchemeConfig cfg;
  cfg.scheme = Scheme::nnp;
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    BiasSet set =
        build_training_bias_set(f.transcript, f.tags, f.pool, f.fuzzy, cfg, rng);
    CHECK(set.size() >= 1);
    CHECK(set.size() <= f.pool.phrases.size());
    for (const auto& p : set.phrases) CHECK(p.origin == PhraseOrigin::distractor);
    CHECK(set.truth.empty());
  }
}

TEST_CASE("test sets hold correct phrases plus sampled distractors") {
  std::vector<std::vector<std::string>> correct = {{"joan"}};
  std::vector<std::vector<std::string>> cands;
  for (int i = 0; i < 30; ++i) cands.push_back({"d" + std::to_string(i)});

  Rng rng(7);
  BiasSet set = build_test_bias_set(correct, cands, 10, rng);
  CHECK(set.size() == 11);
  REQUIRE(set.truth.size() == 1);
  CHECK(set.phrases[static_cast<std::size_t>(set.truth[0])].text() == "joan");

  // Clamped when the candidate list is short.
  Rng rng2(7);
  CHECK(build_test_bias_set(correct, cands, 100, rng2).size() == 31);
  // Duplicates of a correct phrase are not re-added as distractors.
  cands.push_back({"joan"});
  Rng rng3(7);
  CHECK(build_test_bias_set(correct, cands, 100, rng3).size() == 31);
  Rng rng4(7);
  CHECK_THROWS_AS(build_test_bias_set(correct, cands, -1, rng4), ConfigError);

  // Same seed, same set; distractor draw is seed-dependent.
  Rng x(21), y(21);
  CHECK(build_test_bias_set(correct, cands, 5, x).serialize_line("u") ==
        build_test_bias_set(correct, cands, 5, y).serialize_line("u"));
}

TEST_CASE("bias set lines serialize phrase, origin, and truth flags") {
  BiasSet set;
  set.phrases.push_back({{"joan"}, PhraseOrigin::reference});
  set.phrases.push_back({{"call", "john"}, PhraseOrigin::fuzzy});
  set.phrases.push_back({{"oscar"}, PhraseOrigin::distractor});
  set.truth = {0};
  CHECK(set.serialize_line("utt9") ==
        "utt9\tjoan;ref;1\tcall john;fuzzy;0\toscar;distractor;0");
  CHECK(BiasSet{}.serialize_line("utt0") == "utt0");
}
