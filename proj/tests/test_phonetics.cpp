#include <cmath>
#include <sstream>
#include <vector>

#include "biasforge/errors.hpp"
#include "biasforge/phonetics.hpp"
#include "biasforge/rng.hpp"
#include "doctest.h"

using namespace biasforge;

namespace {

PhonemeSeq random_seq(Rng& rng, std::size_t max_len, const PhonemeInventory& inv) {
  PhonemeSeq s;
  std::size_t len = rng.uniform_u64(max_len + 1);
  for (std::size_t i = 0; i < len; ++i) {
    s.ids.push_back(static_cast<int>(rng.uniform_u64(inv.size())));
  }
  return s;
}

// Plain recursive edit distance, exponential but obviously correct.
double brute_wed(const std::vector<int>& a, const std::vector<int>& b,
                 std::size_t i, std::size_t j, const PhonemeInventory& inv) {
  if (i == a.size()) return static_cast<double>(b.size() - j);
  if (j == b.size()) return static_cast<double>(a.size() - i);
  double sub = brute_wed(a, b, i + 1, j + 1, inv) + inv.substitution_cost(a[i], b[j]);
  double del = brute_wed(a, b, i + 1, j, inv) + 1.0;
  double ins = brute_wed(a, b, i, j + 1, inv) + 1.0;
  return std::min(sub, std::min(del, ins));
}

}  // namespace

TEST_CASE("substitution costs reflect feature slot differences") {
  const auto& inv = PhonemeInventory::builtin();
  // P/B differ only in voicing.
  CHECK(inv.substitution_cost(inv.id("P"), inv.id("B")) == doctest::Approx(1.0 / 3));
  // P/G differ in place and voicing.
  CHECK(inv.substitution_cost(inv.id("P"), inv.id("G")) == doctest::Approx(2.0 / 3));
  // Consonant vs vowel always costs 1.
  CHECK(inv.substitution_cost(inv.id("P"), inv.id("AA")) == 1.0);
  CHECK(inv.substitution_cost(inv.id("N"), inv.id("N")) == 0.0);
  // Symmetric table.
  for (int a = 0; a < static_cast<int>(inv.size()); ++a) {
    for (int b = 0; b < static_cast<int>(inv.size()); ++b) {
      CHECK(inv.substitution_cost(a, b) == inv.substitution_cost(b, a));
    }
  }
}

TEST_CASE("builtin inventory has 39 symbols with unique feature triples") {
  const auto& inv = PhonemeInventory::builtin();
  CHECK(inv.size() == 39);
  for (int a = 0; a < static_cast<int>(inv.size()); ++a) {
    for (int b = 0; b < static_cast<int>(inv.size()); ++b) {
      if (a != b) CHECK(inv.substitution_cost(a, b) > 0.0);
    }
  }
}

TEST_CASE("inventory parse rejects malformed tables") {
  auto parse = [](const char* text) {
    std::istringstream in(text);
    return PhonemeInventory::parse(in, "<test>");
  };
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("P\tC\n"), ParseError);
  CHECK_THROWS_AS(parse("P\tX\tp1,p2,p3\n"), ParseError);
  CHECK_THROWS_AS(parse("P\tC\tp1,p2\n"), ParseError);
  CHECK_THROWS_AS(parse("P\tC\tp1,p2,p3\nP\tC\tq1,q2,q3\n"), ParseError);
  // Two symbols with identical feature triples would break
  // identity-of-indiscernibles.
  CHECK_THROWS_AS(parse("P\tC\tp1,p2,p3\nQ\tC\tp1,p2,p3\n"), ParseError);
  // Same triple across classes is fine: cross-class cost is 1 regardless.
  CHECK_NOTHROW(parse("P\tC\tp1,p2,p3\nA\tV\tp1,p2,p3\n"));
}

TEST_CASE("weighted edit distance hand values") {
  const auto& inv = PhonemeInventory::builtin();
  PhonemeSeq joan = inv.seq({"JH", "OW", "N"});
  PhonemeSeq john = inv.seq({"JH", "AA", "N"});
  PhonemeSeq jean = inv.seq({"JH", "IY", "N"});
  // OW/AA differ in two vowel slots, OW/IY in all three.
  CHECK(weighted_edit_distance(joan, john, inv) == doctest::Approx(2.0 / 3));
  CHECK(weighted_edit_distance(joan, jean, inv) == doctest::Approx(1.0));
  CHECK(phonetic_similarity(joan, john, inv) == doctest::Approx(7.0 / 9));
  CHECK(phonetic_similarity(joan, jean, inv) == doctest::Approx(2.0 / 3));

  PhonemeSeq lemon = inv.seq({"L", "EH", "M", "AH", "N"});
  PhonemeSeq lennon = inv.seq({"L", "EH", "N", "AH", "N"});
  CHECK(phonetic_similarity(lemon, lennon, inv) == doctest::Approx(14.0 / 15));

  PhonemeSeq empty;
  CHECK(weighted_edit_distance(empty, joan, inv) == 3.0);
  CHECK(phonetic_similarity(empty, joan, inv) == 0.0);
  CHECK(phonetic_similarity(empty, empty, inv) == 1.0);
}

TEST_CASE("weighted edit distance matches brute-force recursion") {
  const auto& inv = PhonemeInventory::builtin();
  Rng rng(7011);
  for (int t = 0; t < 300; ++t) {
    PhonemeSeq a = random_seq(rng, 5, inv);
    PhonemeSeq b = random_seq(rng, 5, inv);
    double dp = weighted_edit_distance(a, b, inv);
    double brute = brute_wed(a.ids, b.ids, 0, 0, inv);
    CHECK(dp == doctest::Approx(brute).epsilon(1e-12));
  }
}

TEST_CASE("metric axioms hold on random sequences") {
  const auto& inv = PhonemeInventory::builtin();
  Rng rng(7012);
  for (int t = 0; t < 2000; ++t) {
    PhonemeSeq a = random_seq(rng, 8, inv);
    PhonemeSeq b = random_seq(rng, 8, inv);
    PhonemeSeq c = random_seq(rng, 8, inv);
    double dab = weighted_edit_distance(a, b, inv);
    double dba = weighted_edit_distance(b, a, inv);
    CHECK(dab == doctest::Approx(dba).epsilon(1e-12));
    double s = phonetic_similarity(a, b, inv);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    if (a == b) {
      CHECK(dab == 0.0);
    } else {
      CHECK(dab > 0.0);
    }
    double dac = weighted_edit_distance(a, c, inv);
    double dcb = weighted_edit_distance(c, b, inv);
    CHECK(dab <= dac + dcb + 1e-12);
  }
}

TEST_CASE("lexicon parses and accumulates duplicate words in order") {
  const auto& inv = PhonemeInventory::builtin();
  std::istringstream in(
      "read\tR IY D\n"
      "read\tR EH D\n"
      "joan\tJH OW N\n");
  Lexicon lex = Lexicon::parse(inv, in, "<test>");
  CHECK(lex.size() == 2);
  const auto* prons = lex.find("read");
  REQUIRE(prons != nullptr);
  REQUIRE(prons->size() == 2);
  CHECK(inv.spell((*prons)[0]) == "R IY D");
  CHECK(inv.spell((*prons)[1]) == "R EH D");
  CHECK(lex.find("nope") == nullptr);

  std::istringstream bad1("Joan\tJH OW N\n");
  CHECK_THROWS_AS(Lexicon::parse(inv, bad1, "<test>"), ParseError);
  std::istringstream bad2("joan\tQQ\n");
  CHECK_THROWS_AS(Lexicon::parse(inv, bad2, "<test>"), ParseError);
}

TEST_CASE("to_phonemes uses first pronunciation and letter fallback") {
  const auto& inv = PhonemeInventory::builtin();
  Lexicon lex;
  lex.add("read", inv.seq({"R", "IY", "D"}));
  lex.add("read", inv.seq({"R", "EH", "D"}));

  CHECK(inv.spell(to_phonemes({"read"}, lex, inv)) == "R IY D");
  // Out-of-lexicon words go letter by letter; x expands to K S.
  CHECK(inv.spell(to_phonemes({"zxq"}, lex, inv)) == "Z K S K");
  CHECK(inv.spell(to_phonemes({"read", "zxq"}, lex, inv)) == "R IY D Z K S K");
  CHECK(to_phonemes({}, lex, inv).empty());
}
