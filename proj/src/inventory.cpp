#include "biasforge/inventory.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "biasforge/errors.hpp"
#include "biasforge/parallel.hpp"
#include "biasforge/text.hpp"

namespace biasforge {

HypothesisCorpus HypothesisCorpus::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open hypothesis corpus");
  return parse(in, path);
}

HypothesisCorpus HypothesisCorpus::parse(std::istream& in, const std::string& name) {
  HypothesisCorpus corpus;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() < 2 || fields[0].empty()) {
      throw ParseError(name, lineno, "expected utt_id<TAB>hyp1[<TAB>hyp2...]");
    }
    Utterance utt;
    utt.utt_id = fields[0];
    std::set<std::vector<std::string>> seen;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto tokens = tokenize(fields[i]);
      if (tokens.empty()) {
        throw ParseError(name, lineno, "empty hypothesis");
      }
      if (seen.insert(tokens).second) utt.hypotheses.push_back(std::move(tokens));
    }
    corpus.utterances.push_back(std::move(utt));
  }
  return corpus;
}

std::string HypothesisCorpus::serialize() const {
  std::string out;
  for (const auto& utt : utterances) {
    out += utt.utt_id;
    for (const auto& hyp : utt.hypotheses) {
      out.push_back('\t');
      out += join(hyp);
    }
    out.push_back('\n');
  }
  return out;
}

std::int64_t FuzzyInventory::count(const std::string& phrase,
                                   const std::string& alt) const {
  auto it = pairs_.find(phrase);
  if (it == pairs_.end()) return 0;
  auto jt = it->second.find(alt);
  return jt == it->second.end() ? 0 : jt->second;
}

std::vector<std::pair<std::string, std::int64_t>> FuzzyInventory::candidates(
    const std::string& phrase) const {
  std::vector<std::pair<std::string, std::int64_t>> out;
  auto it = pairs_.find(phrase);
  if (it == pairs_.end()) return out;
  out.assign(it->second.begin(), it->second.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

void FuzzyInventory::add_pair(const std::string& a, const std::string& b,
                              std::int64_t c) {
  if (a == b) throw DataError("self-pair '" + a + "' rejected");
  if (c <= 0) throw DataError("non-positive count rejected");
  pairs_[a][b] += c;
  pairs_[b][a] += c;
}

void FuzzyInventory::merge(const FuzzyInventory& other) {
  for (const auto& [phrase, alts] : other.pairs_) {
    auto& mine = pairs_[phrase];
    for (const auto& [alt, c] : alts) mine[alt] += c;
  }
}

bool FuzzyInventory::symmetric() const {
  for (const auto& [phrase, alts] : pairs_) {
    for (const auto& [alt, c] : alts) {
      if (c <= 0) return false;
      if (count(alt, phrase) != c) return false;
      if (alt == phrase) return false;
    }
  }
  return true;
}

std::string FuzzyInventory::serialize() const {
  std::string out;
  for (const auto& [phrase, _] : pairs_) {
    for (const auto& [alt, c] : candidates(phrase)) {
      out += phrase + "\t" + alt + "\t" + std::to_string(c) + "\n";
    }
  }
  return out;
}

FuzzyInventory FuzzyInventory::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open inventory");
  return parse(in, path);
}

FuzzyInventory FuzzyInventory::parse(std::istream& in, const std::string& name) {
  FuzzyInventory inv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3) {
      throw ParseError(name, lineno, "expected phrase<TAB>alternative<TAB>count");
    }
    std::int64_t c;
    try {
      c = std::stoll(fields[2]);
    } catch (const std::exception&) {
      throw ParseError(name, lineno, "non-numeric count '" + fields[2] + "'");
    }
    if (c <= 0) throw ParseError(name, lineno, "count must be positive");
    if (fields[0] == fields[1]) throw ParseError(name, lineno, "self-pair");
    // Files carry both directions; add one direction at a time.
    inv.pairs_[fields[0]][fields[1]] += c;
  }
  if (!inv.symmetric()) throw ParseError(name, 0, "inventory counts not symmetric");
  return inv;
}

namespace {

// Middle spans of one unordered hypothesis pair after removing the maximal
// common prefix and then the maximal common suffix of the remainder.
struct MiddleSplit {
  std::vector<std::string> mid_s, mid_t;
  bool valid = false;
};

MiddleSplit middle_split(const std::vector<std::string>& s,
                         const std::vector<std::string>& t, int max_len) {
  const std::size_t ns = s.size();
  const std::size_t nt = t.size();
  std::size_t p = 0;
  while (p < ns && p < nt && s[p] == t[p]) ++p;
  std::size_t q = 0;
  while (q < ns - p && q < nt - p && s[ns - 1 - q] == t[nt - 1 - q]) ++q;
  MiddleSplit out;
  const std::size_t ls = ns - p - q;
  const std::size_t lt = nt - p - q;
  if (ls == 0 || lt == 0) return out;  // pure insertion/deletion
  if (ls > static_cast<std::size_t>(max_len) || lt > static_cast<std::size_t>(max_len)) {
    return out;
  }
  out.mid_s.assign(s.begin() + static_cast<long>(p), s.begin() + static_cast<long>(p + ls));
  out.mid_t.assign(t.begin() + static_cast<long>(p), t.begin() + static_cast<long>(p + lt));
  if (out.mid_s == out.mid_t) return out;
  out.valid = true;
  return out;
}

void mine_utterance(const HypothesisCorpus::Utterance& utt, int max_ngram_len,
                    FuzzyInventory& into) {
  const auto& hyps = utt.hypotheses;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    for (std::size_t j = i + 1; j < hyps.size(); ++j) {
      MiddleSplit m = middle_split(hyps[i], hyps[j], max_ngram_len);
      if (m.valid) into.add_pair(join(m.mid_s), join(m.mid_t), 1);
    }
  }
}

}  // namespace

FuzzyInventory mine_pairs(const HypothesisCorpus& corpus, int max_ngram_len,
                          int threads) {
  if (max_ngram_len < 1) throw ConfigError("max_ngram_len must be >= 1");
  const std::size_t n = corpus.utterances.size();
  if (threads <= 1) {
    FuzzyInventory inv;
    for (const auto& utt : corpus.utterances) {
      mine_utterance(utt, max_ngram_len, inv);
    }
    return inv;
  }
  // Per-utterance partial inventories; merging is associative/commutative
  // integer addition, so the result matches the serial path exactly.
  std::vector<FuzzyInventory> partial(n);
  parallel_for(n, threads, [&](std::size_t i) {
    mine_utterance(corpus.utterances[i], max_ngram_len, partial[i]);
  });
  FuzzyInventory inv;
  for (const auto& part : partial) inv.merge(part);
  return inv;
}

std::vector<std::string> fuzzy_alternatives(const FuzzyInventory& inv,
                                            const std::string& phrase, int k,
                                            double tau_phon, const Lexicon& lexicon,
                                            const PhonemeInventory& phonemes) {
  if (k < 0) throw ConfigError("k must be >= 0");
  if (tau_phon < 0.0 || tau_phon > 1.0) throw ConfigError("tau_phon must be in [0,1]");
  std::vector<std::string> out;
  if (k == 0) return out;
  PhonemeSeq target = to_phonemes(tokenize(phrase), lexicon, phonemes);
  for (const auto& [alt, _] : inv.candidates(phrase)) {
    PhonemeSeq cand = to_phonemes(tokenize(alt), lexicon, phonemes);
    if (phonetic_similarity(target, cand, phonemes) >= tau_phon) {
      out.push_back(alt);
      if (static_cast<int>(out.size()) == k) break;
    }
  }
  return out;
}

}  // namespace biasforge
