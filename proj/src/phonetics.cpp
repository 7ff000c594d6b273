#include "biasforge/phonetics.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "biasforge/builtin_data.hpp"
#include "biasforge/errors.hpp"
#include "biasforge/text.hpp"

namespace biasforge {

const PhonemeInventory& PhonemeInventory::builtin() {
  static const PhonemeInventory inv = [] {
    std::istringstream in{std::string(kBuiltinPhonemeTable)};
    return parse(in, "<builtin phoneme table>");
  }();
  return inv;
}

PhonemeInventory PhonemeInventory::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open phoneme table");
  return parse(in, path);
}

PhonemeInventory PhonemeInventory::parse(std::istream& in, const std::string& name) {
  PhonemeInventory inv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3) {
      throw ParseError(name, lineno, "expected symbol<TAB>class<TAB>f1,f2,f3");
    }
    Phoneme p;
    p.symbol = fields[0];
    if (p.symbol.empty()) throw ParseError(name, lineno, "empty phoneme symbol");
    if (fields[1] == "C") {
      p.cls = PhonemeClass::consonant;
    } else if (fields[1] == "V") {
      p.cls = PhonemeClass::vowel;
    } else {
      throw ParseError(name, lineno, "class must be C or V, got '" + fields[1] + "'");
    }
    auto feats = split(fields[2], ',');
    if (feats.size() != 3) {
      throw ParseError(name, lineno, "expected exactly 3 features");
    }
    for (int i = 0; i < 3; ++i) {
      if (feats[static_cast<std::size_t>(i)].empty()) {
        throw ParseError(name, lineno, "missing feature value");
      }
      p.features[static_cast<std::size_t>(i)] = feats[static_cast<std::size_t>(i)];
    }
    if (inv.index_.count(p.symbol)) {
      throw ParseError(name, lineno, "duplicate symbol '" + p.symbol + "'");
    }
    inv.index_[p.symbol] = static_cast<int>(inv.phonemes_.size());
    inv.phonemes_.push_back(std::move(p));
  }
  if (inv.phonemes_.empty()) throw ParseError(name, 0, "empty phoneme table");
  inv.finalize(name);
  return inv;
}

void PhonemeInventory::finalize(const std::string& source_name) {
  // Feature triples must be unique within a class: the metric needs
  // cost(a,b) == 0 iff a == b.
  std::set<std::string> seen;
  for (const auto& p : phonemes_) {
    std::string key = (p.cls == PhonemeClass::consonant ? "C|" : "V|");
    for (const auto& f : p.features) key += f + "|";
    if (!seen.insert(key).second) {
      throw ParseError(source_name, 0,
                       "phoneme '" + p.symbol + "' duplicates another feature assignment");
    }
  }
  const std::size_t n = phonemes_.size();
  cost_.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Phoneme& a = phonemes_[i];
      const Phoneme& b = phonemes_[j];
      double c;
      if (a.cls != b.cls) {
        c = 1.0;
      } else {
        int diff = 0;
        for (int f = 0; f < 3; ++f) {
          if (a.features[static_cast<std::size_t>(f)] !=
              b.features[static_cast<std::size_t>(f)])
            ++diff;
        }
        c = diff / 3.0;
      }
      cost_[i * n + j] = c;
    }
  }
}

int PhonemeInventory::find(const std::string& symbol) const {
  auto it = index_.find(symbol);
  return it == index_.end() ? -1 : it->second;
}

int PhonemeInventory::id(const std::string& symbol) const {
  int i = find(symbol);
  if (i < 0) throw DataError("unknown phoneme symbol '" + symbol + "'");
  return i;
}

PhonemeSeq PhonemeInventory::seq(const std::vector<std::string>& symbols) const {
  PhonemeSeq s;
  s.ids.reserve(symbols.size());
  for (const auto& sym : symbols) s.ids.push_back(id(sym));
  return s;
}

std::string PhonemeInventory::spell(const PhonemeSeq& seq) const {
  std::vector<std::string> syms;
  syms.reserve(seq.ids.size());
  for (int i : seq.ids) syms.push_back(at(i).symbol);
  return join(syms);
}

Lexicon Lexicon::from_file(const PhonemeInventory& inv, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open lexicon");
  return parse(inv, in, path);
}

Lexicon Lexicon::parse(const PhonemeInventory& inv, std::istream& in,
                       const std::string& name) {
  Lexicon lex;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2) {
      throw ParseError(name, lineno, "expected word<TAB>PH1 PH2 ...");
    }
    const std::string& word = fields[0];
    if (!is_lowercase_word(word)) {
      throw ParseError(name, lineno, "word must be lowercase and whitespace-free: '" +
                                         word + "'");
    }
    auto symbols = tokenize(fields[1]);
    if (symbols.empty()) {
      throw ParseError(name, lineno, "empty pronunciation for '" + word + "'");
    }
    PhonemeSeq pron;
    pron.ids.reserve(symbols.size());
    for (const auto& sym : symbols) {
      int id = inv.find(sym);
      if (id < 0) throw ParseError(name, lineno, "unknown phoneme '" + sym + "'");
      pron.ids.push_back(id);
    }
    lex.add(word, std::move(pron));
  }
  return lex;
}

void Lexicon::add(const std::string& word, PhonemeSeq pron) {
  if (!is_lowercase_word(word)) {
    throw DataError("lexicon word must be lowercase and whitespace-free: '" + word + "'");
  }
  if (pron.empty()) throw DataError("empty pronunciation for '" + word + "'");
  entries_[word].push_back(std::move(pron));
}

const std::vector<PhonemeSeq>* Lexicon::find(const std::string& word) const {
  auto it = entries_.find(word);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::string> Lexicon::words() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [w, _] : entries_) out.push_back(w);
  return out;
}

namespace {

// letter -> phoneme ids for one inventory, built lazily from the rule table.
// Rules whose symbols are absent from a custom inventory are dropped, so the
// fallback stays total.
struct LetterRules {
  std::vector<std::vector<int>> by_char = std::vector<std::vector<int>>(256);

  explicit LetterRules(const PhonemeInventory& inv) {
    std::istringstream in{std::string(kBuiltinLetterRules)};
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto fields = split(line, '\t');
      if (fields.empty() || fields[0].size() != 1) continue;
      unsigned char key = static_cast<unsigned char>(fields[0][0]);
      if (fields.size() < 2) continue;
      for (const auto& sym : tokenize(fields[1])) {
        int id = inv.find(sym);
        if (id >= 0) by_char[key].push_back(id);
      }
    }
  }
};

void append_fallback(const std::string& word, const PhonemeInventory& inv,
                     PhonemeSeq& out) {
  // One rule table per distinct inventory address; the builtin inventory is
  // a singleton so this caches effectively.
  static thread_local const PhonemeInventory* cached_inv = nullptr;
  static thread_local LetterRules* cached_rules = nullptr;
  if (cached_inv != &inv) {
    delete cached_rules;
    cached_rules = new LetterRules(inv);
    cached_inv = &inv;
  }
  for (unsigned char c : word) {
    for (int id : cached_rules->by_char[c]) out.ids.push_back(id);
  }
}

}  // namespace

PhonemeSeq to_phonemes(const std::vector<std::string>& phrase,
                       const Lexicon& lexicon, const PhonemeInventory& inv) {
  PhonemeSeq out;
  for (const auto& word : phrase) {
    if (const auto* prons = lexicon.find(word)) {
      // First-listed pronunciation only, for determinism.
      const PhonemeSeq& p = prons->front();
      out.ids.insert(out.ids.end(), p.ids.begin(), p.ids.end());
    } else {
      append_fallback(word, inv, out);
    }
  }
  return out;
}

double weighted_edit_distance(const PhonemeSeq& a, const PhonemeSeq& b,
                              const PhonemeInventory& inv) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<double> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<double>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<double>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      double sub = prev[j - 1] + inv.substitution_cost(a.ids[i - 1], b.ids[j - 1]);
      double del = prev[j] + 1.0;
      double ins = cur[j - 1] + 1.0;
      cur[j] = std::min(sub, std::min(del, ins));
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double phonetic_similarity(const PhonemeSeq& a, const PhonemeSeq& b,
                           const PhonemeInventory& inv) {
  if (a.empty() && b.empty()) return 1.0;
  double wed = weighted_edit_distance(a, b, inv);
  double denom = static_cast<double>(std::max(a.size(), b.size()));
  return 1.0 - wed / denom;
}

}  // namespace biasforge
