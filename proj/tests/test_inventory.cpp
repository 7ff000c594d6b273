#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "biasforge/errors.hpp"
#include "biasforge/inventory.hpp"
#include "biasforge/phonetics.hpp"
#include "biasforge/text.hpp"
#include "doctest.h"

using namespace biasforge;

namespace {

HypothesisCorpus corpus_from(const char* text) {
  std::istringstream in(text);
  return HypothesisCorpus::parse(in, "<test>");
}

// Independent mining oracle: enumerate every unordered hypothesis pair and
// re-derive the middle spans with std::mismatch. Returns directed counts.
std::map<std::pair<std::string, std::string>, std::int64_t> oracle_counts(
    const HypothesisCorpus& corpus, int max_len) {
  std::map<std::pair<std::string, std::string>, std::int64_t> counts;
  for (const auto& utt : corpus.utterances) {
    const auto& hyps = utt.hypotheses;
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      for (std::size_t j = i + 1; j < hyps.size(); ++j) {
        const auto& s = hyps[i];
        const auto& t = hyps[j];
        auto [ps, pt] = std::mismatch(s.begin(), s.end(), t.begin(), t.end());
        std::size_t p = static_cast<std::size_t>(ps - s.begin());
        auto [qs, qt] =
            std::mismatch(s.rbegin(), s.rend() - static_cast<long>(p),
                          t.rbegin(), t.rend() - static_cast<long>(p));
        std::size_t q = static_cast<std::size_t>(qs - s.rbegin());
        std::size_t ls = s.size() - p - q;
        std::size_t lt = t.size() - p - q;
        if (ls == 0 || lt == 0) continue;
        if (ls > static_cast<std::size_t>(max_len) ||
            lt > static_cast<std::size_t>(max_len))
          continue;
        std::string a = join({s.begin() + static_cast<long>(p),
                              s.begin() + static_cast<long>(p + ls)});
        std::string b = join({t.begin() + static_cast<long>(p),
                              t.begin() + static_cast<long>(p + lt)});
        if (a == b) continue;
        counts[{a, b}] += 1;
        counts[{b, a}] += 1;
      }
    }
  }
  return counts;
}

bool matches_oracle(const FuzzyInventory& inv, const HypothesisCorpus& corpus,
                    int max_len) {
  auto oracle = oracle_counts(corpus, max_len);
  std::int64_t inv_total = 0;
  for (const auto& [pair, c] : oracle) {
    if (inv.count(pair.first, pair.second) != c) return false;
  }
  // No extra pairs: serialize lists every directed entry once.
  std::istringstream in(inv.serialize());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  (void)inv_total;
  return lines == oracle.size();
}

}  // namespace

TEST_CASE("hypothesis corpus parses, deduplicates, and round-trips") {
  HypothesisCorpus c = corpus_from(
      "u1\tcall joan\tcall john\tcall joan\n"
      "u2\thello\n");
  REQUIRE(c.utterances.size() == 2);
  CHECK(c.utterances[0].hypotheses.size() == 2);
  CHECK(c.utterances[1].hypotheses.size() == 1);

  std::string text = c.serialize();
  std::istringstream again(text);
  CHECK(HypothesisCorpus::parse(again, "<rt>").serialize() == text);

  CHECK_THROWS_AS(corpus_from("u1\n"), ParseError);
  CHECK_THROWS_AS(corpus_from("\tcall joan\n"), ParseError);
  CHECK_THROWS_AS(corpus_from("u1\t \n"), ParseError);
}

TEST_CASE("mining extracts middle spans between common prefix and suffix") {
  HypothesisCorpus c = corpus_from("u1\tcall joan now\tcall john now\n");
  FuzzyInventory inv = mine_pairs(c, 3);
  CHECK(inv.count("joan", "john") == 1);
  CHECK(inv.count("john", "joan") == 1);
  CHECK(inv.num_phrases() == 2);

  // Pure insertion or deletion mines nothing.
  c = corpus_from("u1\tcall joan\tcall joan now\n");
  CHECK(mine_pairs(c, 3).num_phrases() == 0);

  // Identical hypotheses mine nothing.
  c = corpus_from("u1\tcall joan\tcall joan\tother one\n");
  inv = mine_pairs(c, 3);
  CHECK(inv.count("call joan", "other one") == 1);

  // Middles longer than max_ngram_len are dropped.
  c = corpus_from("u1\ta b c d e\ta x y z w e\n");
  CHECK(mine_pairs(c, 3).num_phrases() == 0);
  CHECK(mine_pairs(c, 4).count("b c d", "x y z w") == 1);

  // Counts accumulate across utterances.
  c = corpus_from(
      "u1\tcall joan\tcall john\n"
      "u2\ttext joan\ttext john\n"
      "u3\tjoan is here\tjohn is here\n");
  CHECK(mine_pairs(c, 3).count("joan", "john") == 3);
}

TEST_CASE("mining matches the exhaustive pair oracle on hand-built corpora") {
  const char* corpora[] = {
      // Three-way confusions plus unrelated noise.
      "u1\tcall joan now\tcall john now\tcall jean now\n"
      "u2\tplay some jazz\tplay some chess\n"
      "u3\tone two three\tone two three\n",
      // Multi-token middles and shared boundaries.
      "u1\ttalk to mara keiko\ttalk to mira kaiko\n"
      "u2\ta b c\tx b c\ta b z\n"
      "u3\tcall aaron back\tcall erin back\tcall aaron beck\n",
      // Repeats of one pair inflate its count.
      "u1\tx joan y\tx john y\n"
      "u2\tx joan y\tx john y\n"
      "u3\tx joan y\tx john y\n"
      "u4\tz joan\tz john\tz jean\tz dawn\n",
  };
  for (const char* text : corpora) {
    HypothesisCorpus c = corpus_from(text);
    for (int max_len : {1, 2, 3}) {
      CHECK(matches_oracle(mine_pairs(c, max_len), c, max_len));
    }
  }
}

TEST_CASE("mining is independent of utterance order and thread count") {
  HypothesisCorpus c = corpus_from(
      "u1\tcall joan now\tcall john now\tcall jean now\n"
      "u2\ttext mara\ttext mira\n"
      "u3\ta b c\ta x c\ta y c\n");
  FuzzyInventory serial = mine_pairs(c, 3, 1);
  FuzzyInventory parallel = mine_pairs(c, 3, 3);
  CHECK(serial.serialize() == parallel.serialize());

  HypothesisCorpus reversed;
  reversed.utterances.assign(c.utterances.rbegin(), c.utterances.rend());
  CHECK(mine_pairs(reversed, 3).serialize() == serial.serialize());
}

TEST_CASE("inventory enforces symmetry and positive counts") {
  FuzzyInventory inv;
  inv.add_pair("joan", "john", 2);
  inv.add_pair("joan", "jean", 1);
  CHECK(inv.count("john", "joan") == 2);
  CHECK(inv.symmetric());
  CHECK_THROWS_AS(inv.add_pair("joan", "joan", 1), DataError);
  CHECK_THROWS_AS(inv.add_pair("a", "b", 0), DataError);
  CHECK_THROWS_AS(inv.add_pair("a", "b", -3), DataError);

  // Candidates sort by count descending, then phrase ascending.
  inv.add_pair("joan", "dawn", 1);
  auto cands = inv.candidates("joan");
  REQUIRE(cands.size() == 3);
  CHECK(cands[0].first == "john");
  CHECK(cands[1].first == "dawn");
  CHECK(cands[2].first == "jean");
  CHECK(inv.candidates("absent").empty());
}

TEST_CASE("inventory serializes to a stable symmetric file format") {
  FuzzyInventory inv;
  inv.add_pair("joan", "john", 2);
  inv.add_pair("mara", "mira", 5);
  std::string text = inv.serialize();
  std::istringstream in(text);
  FuzzyInventory back = FuzzyInventory::parse(in, "<rt>");
  CHECK(back.serialize() == text);
  CHECK(back.count("mira", "mara") == 5);

  FuzzyInventory merged;
  merged.merge(inv);
  merged.merge(inv);
  CHECK(merged.count("joan", "john") == 4);

  auto parse = [](const char* t) {
    std::istringstream s(t);
    return FuzzyInventory::parse(s, "<test>");
  };
  CHECK_THROWS_AS(parse("a\tb\n"), ParseError);
  CHECK_THROWS_AS(parse("a\tb\tx\n"), ParseError);
  CHECK_THROWS_AS(parse("a\tb\t0\n"), ParseError);
  CHECK_THROWS_AS(parse("a\ta\t1\n"), ParseError);
  // One-directional files are rejected: counts must be symmetric.
  CHECK_THROWS_AS(parse("a\tb\t1\n"), ParseError);
  CHECK_NOTHROW(parse("a\tb\t1\nb\ta\t1\n"));
}

TEST_CASE("fuzzy alternatives filter by phonetic similarity") {
  const auto& inv = PhonemeInventory::builtin();
  Lexicon lex;
  lex.add("joan", inv.seq({"JH", "OW", "N"}));
  lex.add("john", inv.seq({"JH", "AA", "N"}));
  lex.add("jean", inv.seq({"JH", "IY", "N"}));
  lex.add("banana", inv.seq({"B", "AH", "N", "AE", "N", "AH"}));

  FuzzyInventory mined;
  mined.add_pair("joan", "banana", 9);
  mined.add_pair("joan", "john", 3);
  mined.add_pair("joan", "jean", 2);

  // sim(joan,john)=7/9, sim(joan,jean)=2/3, banana far below any threshold.
  auto alts = fuzzy_alternatives(mined, "joan", 3, 0.6, lex, inv);
  CHECK(alts == std::vector<std::string>{"john", "jean"});
  alts = fuzzy_alternatives(mined, "joan", 3, 0.7, lex, inv);
  CHECK(alts == std::vector<std::string>{"john"});
  alts = fuzzy_alternatives(mined, "joan", 1, 0.6, lex, inv);
  CHECK(alts == std::vector<std::string>{"john"});
  CHECK(fuzzy_alternatives(mined, "joan", 0, 0.6, lex, inv).empty());
  CHECK(fuzzy_alternatives(mined, "absent", 3, 0.6, lex, inv).empty());
  CHECK_THROWS_AS(fuzzy_alternatives(mined, "joan", -1, 0.6, lex, inv), ConfigError);
  CHECK_THROWS_AS(fuzzy_alternatives(mined, "joan", 3, 1.5, lex, inv), ConfigError);

  FuzzyLookup lookup{&mined, &lex, &inv};
  CHECK(lookup.alternatives("joan", 3, 0.6) ==
        std::vector<std::string>{"john", "jean"});
  CHECK(FuzzyLookup{}.alternatives("joan", 3, 0.6).empty());
}
