#include "biasforge/biasset.hpp"

#include <algorithm>
#include <map>

#include "biasforge/errors.hpp"

namespace biasforge {

bool BiasSet::is_truth(int idx) const {
  return std::binary_search(truth.begin(), truth.end(), idx);
}

std::string BiasSet::serialize_line(const std::string& utt_id) const {
  std::string out = utt_id;
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    const char* origin = phrases[i].origin == PhraseOrigin::reference ? "ref"
                         : phrases[i].origin == PhraseOrigin::fuzzy  ? "fuzzy"
                                                                     : "distractor";
    out += "\t" + phrases[i].text() + ";" + origin + ";" +
           (is_truth(static_cast<int>(i)) ? "1" : "0");
  }
  return out;
}

Scheme parse_scheme(const std::string& name) {
  if (name == "vanilla") return Scheme::vanilla;
  if (name == "nnp") return Scheme::nnp;
  if (name == "fuzzy") return Scheme::fuzzy;
  if (name == "nnp_fuzzy") return Scheme::nnp_fuzzy;
  throw ConfigError("unknown scheme '" + name +
                    "' (expected vanilla|nnp|fuzzy|nnp_fuzzy)");
}

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::vanilla: return "vanilla";
    case Scheme::nnp: return "nnp";
    case Scheme::fuzzy: return "fuzzy";
    case Scheme::nnp_fuzzy: return "nnp_fuzzy";
  }
  return "?";
}

bool scheme_uses_nnp(Scheme s) {
  return s == Scheme::nnp || s == Scheme::nnp_fuzzy;
}

bool scheme_uses_fuzzy(Scheme s) {
  return s == Scheme::fuzzy || s == Scheme::nnp_fuzzy;
}

void SchemeConfig::validate() const {
  if (n_max < 1) throw ConfigError("n_max must be >= 1");
  if (k_ref < 0 || k_fuzzy < 0) throw ConfigError("k_ref/k_fuzzy must be >= 0");
  if (max_ngram_len < 1) throw ConfigError("max_ngram_len must be >= 1");
  if (alpha_drop < 0.0 || alpha_drop > 1.0) {
    throw ConfigError("alpha_drop must be in [0,1]");
  }
  if (tau_phon < 0.0 || tau_phon > 1.0) throw ConfigError("tau_phon must be in [0,1]");
  if (k_ref * (1 + k_fuzzy) > n_max) {
    throw ConfigError("k_ref*(1+k_fuzzy) must be <= n_max");
  }
}

namespace {

int origin_priority(PhraseOrigin o) {
  switch (o) {
    case PhraseOrigin::reference: return 2;
    case PhraseOrigin::fuzzy: return 1;
    case PhraseOrigin::distractor: return 0;
  }
  return 0;
}

// Accumulates phrases with dedup on the token sequence. A collision keeps
// the higher-priority origin (reference > fuzzy > distractor).
struct SetBuilder {
  std::vector<BiasPhrase> phrases;
  std::map<std::string, std::size_t> index;

  bool add(std::vector<std::string> tokens, PhraseOrigin origin) {
    if (tokens.empty()) return false;
    std::string key = join(tokens);
    auto it = index.find(key);
    if (it != index.end()) {
      if (origin_priority(origin) > origin_priority(phrases[it->second].origin)) {
        phrases[it->second].origin = origin;
      }
      return false;
    }
    index[key] = phrases.size();
    phrases.push_back({std::move(tokens), origin});
    return true;
  }

  int size() const { return static_cast<int>(phrases.size()); }
};

std::vector<int> compute_truth(const std::vector<BiasPhrase>& phrases,
                               const std::vector<std::string>& transcript) {
  std::vector<int> truth;
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    if (contains_token_seq(transcript, phrases[i].tokens)) {
      truth.push_back(static_cast<int>(i));
    }
  }
  return truth;
}

}  // namespace

BiasSet build_training_bias_set(const std::vector<std::string>& transcript,
                                const TaggedTranscript& tags,
                                const DistractorPool& pool,
                                const FuzzyLookup& fuzzy, const SchemeConfig& cfg,
                                Rng& rng) {
  cfg.validate();
  if (rng.uniform_real() < cfg.alpha_drop) return {};

  SetBuilder builder;

  // Reference-derived phrases.
  std::vector<std::vector<std::string>> refs;
  if (scheme_uses_nnp(cfg.scheme)) {
    auto picks = rng.sample_indices(tags.nnp_spans.size(),
                                    static_cast<std::size_t>(cfg.k_ref));
    for (std::size_t idx : picks) refs.push_back(tags.span_phrase(idx));
  } else if (!transcript.empty()) {
    const int n = static_cast<int>(transcript.size());
    for (int i = 0; i < cfg.k_ref; ++i) {
      int len = 1 + static_cast<int>(rng.uniform_u64(
                        static_cast<std::uint64_t>(std::min(cfg.max_ngram_len, n))));
      int start = static_cast<int>(rng.uniform_u64(static_cast<std::uint64_t>(n - len + 1)));
      refs.emplace_back(transcript.begin() + start, transcript.begin() + start + len);
    }
  }
  for (auto& r : refs) builder.add(std::move(r), PhraseOrigin::reference);

  // Fuzzy alternatives of the reference phrases.
  if (scheme_uses_fuzzy(cfg.scheme)) {
    const auto snapshot = builder.phrases;  // refs only at this point
    for (const auto& p : snapshot) {
      for (auto& alt : fuzzy.alternatives(p.text(), cfg.k_fuzzy, cfg.tau_phon)) {
        builder.add(tokenize(alt), PhraseOrigin::fuzzy);
      }
    }
  }

  // Fill with pool phrases (and their alternatives, when configured) up to
  // a per-example target size drawn uniformly between the mandatory content
  // and n_max. n_max caps every set; the random target exposes the model to
  // small and full sets alike, so test-time sets of any size stay in
  // distribution. A shuffled index walk samples without replacement.
  const int lo = std::max(builder.size(), 1);
  const int target =
      lo + static_cast<int>(rng.uniform_u64(
               static_cast<std::uint64_t>(cfg.n_max - lo + 1)));
  auto order = rng.sample_indices(pool.phrases.size(), pool.phrases.size());
  for (std::size_t idx : order) {
    if (builder.size() >= target) break;
    bool added = builder.add(pool.phrases[idx], PhraseOrigin::distractor);
    if (added && cfg.fuzz_distractors()) {
      std::string key = join(pool.phrases[idx]);
      for (auto& alt : fuzzy.alternatives(key, cfg.k_fuzzy, cfg.tau_phon)) {
        if (builder.size() >= target) break;
        builder.add(tokenize(alt), PhraseOrigin::fuzzy);
      }
    }
  }

  BiasSet set;
  set.phrases = std::move(builder.phrases);
  rng.shuffle(set.phrases);
  set.truth = compute_truth(set.phrases, transcript);
  return set;
}

BiasSet build_test_bias_set(const std::vector<std::vector<std::string>>& correct,
                            const std::vector<std::vector<std::string>>& distractors,
                            int n_distractors, Rng& rng) {
  if (n_distractors < 0) throw ConfigError("n_distractors must be >= 0");

  SetBuilder builder;
  for (const auto& c : correct) builder.add(c, PhraseOrigin::reference);
  const int want = std::min<int>(n_distractors, static_cast<int>(distractors.size()));
  auto order = rng.sample_indices(distractors.size(), distractors.size());
  int taken = 0;
  for (std::size_t idx : order) {
    if (taken >= want) break;
    if (builder.add(distractors[idx], PhraseOrigin::distractor)) ++taken;
  }

  BiasSet set;
  set.phrases = std::move(builder.phrases);
  rng.shuffle(set.phrases);
  for (std::size_t i = 0; i < set.phrases.size(); ++i) {
    if (set.phrases[i].origin == PhraseOrigin::reference) {
      set.truth.push_back(static_cast<int>(i));
    }
  }
  return set;
}

}  // namespace biasforge
