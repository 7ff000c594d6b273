#include "biasforge/tagging.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "biasforge/builtin_data.hpp"
#include "biasforge/errors.hpp"
#include "biasforge/text.hpp"

namespace biasforge {

std::vector<std::string> TaggedTranscript::span_phrase(std::size_t i) const {
  const auto& [start, end] = nnp_spans[i];
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(end - start));
  for (int t = start; t < end; ++t) {
    out.push_back(strip_possessive(tokens[static_cast<std::size_t>(t)]));
  }
  return out;
}

void validate_spans(const TaggedTranscript& t) {
  int prev_end = 0;
  for (const auto& [start, end] : t.nnp_spans) {
    if (start < 0 || end > static_cast<int>(t.tokens.size()) || start >= end) {
      throw DataError("span " + std::to_string(start) + ":" + std::to_string(end) +
                      " out of bounds for " + std::to_string(t.tokens.size()) +
                      " tokens");
    }
    if (start < prev_end) throw DataError("spans overlap or are unsorted");
    prev_end = end;
  }
}

Gazetteer Gazetteer::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open gazetteer");
  return parse(in, path);
}

Gazetteer Gazetteer::parse(std::istream& in, const std::string& name) {
  Gazetteer g;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    for (const auto& t : tokens) {
      if (!is_lowercase_word(t)) {
        throw ParseError(name, lineno, "gazetteer phrases must be lowercase: '" + t + "'");
      }
    }
    g.add(tokens);
  }
  return g;
}

void Gazetteer::add(const std::vector<std::string>& phrase) {
  if (phrase.empty()) return;
  max_len_ = std::max(max_len_, phrase.size());
  phrases_.insert(phrase);
}

bool Gazetteer::contains(const std::vector<std::string>& phrase) const {
  return phrases_.count(phrase) > 0;
}

RuleTagger::RuleTagger(Gazetteer gazetteer) : gazetteer_(std::move(gazetteer)) {
  for (const auto& w : tokenize(kBuiltinFunctionWords)) function_words_.insert(w);
}

namespace {

bool has_possessive(const std::string& token) {
  return token.size() > 2 && token.ends_with("'s");
}

std::vector<std::pair<int, int>> merge_overlaps(std::vector<std::pair<int, int>> spans) {
  std::sort(spans.begin(), spans.end());
  std::vector<std::pair<int, int>> out;
  for (const auto& s : spans) {
    if (!out.empty() && s.first < out.back().second) {
      out.back().second = std::max(out.back().second, s.second);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace

TaggedTranscript RuleTagger::tag(const std::string& /*utt_id*/,
                                 const std::vector<std::string>& tokens) const {
  const int n = static_cast<int>(tokens.size());
  std::vector<std::string> stripped;
  stripped.reserve(tokens.size());
  for (const auto& t : tokens) stripped.push_back(strip_possessive(t));

  std::vector<std::pair<int, int>> spans;

  // Gazetteer pass: longest match, greedy left-to-right.
  if (!gazetteer_.empty()) {
    int i = 0;
    while (i < n) {
      int best = 0;
      int cap = std::min(n - i, static_cast<int>(gazetteer_.max_len()));
      for (int len = cap; len >= 1; --len) {
        std::vector<std::string> cand(stripped.begin() + i, stripped.begin() + i + len);
        if (gazetteer_.contains(cand)) {
          best = len;
          break;
        }
      }
      if (best > 0) {
        spans.emplace_back(i, i + best);
        i += best;
      } else {
        ++i;
      }
    }
  }

  // Trigger pass: span after a command verb, ending at a function word; a
  // possessive token is included (clitic handled at phrase extraction) and
  // terminates the span.
  for (int i = 0; i < n; ++i) {
    int start = -1;
    if (tokens[static_cast<std::size_t>(i)] == "talk" && i + 1 < n &&
        tokens[static_cast<std::size_t>(i + 1)] == "to") {
      start = i + 2;
    } else if (tokens[static_cast<std::size_t>(i)] == "call" ||
               tokens[static_cast<std::size_t>(i)] == "text" ||
               tokens[static_cast<std::size_t>(i)] == "play") {
      start = i + 1;
    }
    if (start < 0 || start >= n) continue;
    int j = start;
    while (j < n) {
      const std::string& tok = tokens[static_cast<std::size_t>(j)];
      if (function_words_.count(tok)) break;
      ++j;
      if (has_possessive(tok)) break;
    }
    if (j > start) spans.emplace_back(start, j);
  }

  TaggedTranscript out;
  out.tokens = tokens;
  out.nnp_spans = merge_overlaps(std::move(spans));
  validate_spans(out);
  return out;
}

SidecarTagger SidecarTagger::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open sidecar tags");
  return parse(in, path);
}

SidecarTagger SidecarTagger::parse(std::istream& in, const std::string& name) {
  SidecarTagger tagger;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() > 2 || fields[0].empty()) {
      throw ParseError(name, lineno, "expected utt_id<TAB>start:end[,start:end...]");
    }
    std::vector<Span> spans;
    if (fields.size() == 2) spans = parse_spans(fields[1], name, lineno);
    if (tagger.spans_.count(fields[0])) {
      throw ParseError(name, lineno, "duplicate utt_id '" + fields[0] + "'");
    }
    std::sort(spans.begin(), spans.end());
    tagger.spans_[fields[0]] = std::move(spans);
  }
  return tagger;
}

TaggedTranscript SidecarTagger::tag(const std::string& utt_id,
                                    const std::vector<std::string>& tokens) const {
  TaggedTranscript out;
  out.tokens = tokens;
  auto it = spans_.find(utt_id);
  if (it != spans_.end()) out.nnp_spans = it->second;
  validate_spans(out);
  return out;
}

void SidecarTagger::set(const std::string& utt_id,
                        std::vector<std::pair<int, int>> spans) {
  std::sort(spans.begin(), spans.end());
  spans_[utt_id] = std::move(spans);
}

std::string format_spans(const std::vector<Span>& spans) {
  std::string out;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(spans[i].first) + ":" + std::to_string(spans[i].second);
  }
  return out;
}

std::vector<Span> parse_spans(const std::string& field, const std::string& file,
                              int lineno) {
  std::vector<Span> spans;
  if (field.empty()) return spans;
  for (const auto& item : split(field, ',')) {
    auto parts = split(item, ':');
    if (parts.size() != 2) {
      throw ParseError(file, lineno, "malformed span '" + item + "'");
    }
    int s, e;
    try {
      s = std::stoi(parts[0]);
      e = std::stoi(parts[1]);
    } catch (const std::exception&) {
      throw ParseError(file, lineno, "non-numeric span '" + item + "'");
    }
    if (s < 0 || e <= s) {
      throw ParseError(file, lineno, "invalid span '" + item + "'");
    }
    spans.emplace_back(s, e);
  }
  return spans;
}

std::string SidecarTagger::serialize() const {
  std::string out;
  for (const auto& [utt, spans] : spans_) {
    out += utt + "\t" + format_spans(spans) + "\n";
  }
  return out;
}

TaggedTranscript detect_proper_nouns(const std::string& utt_id,
                                     const std::vector<std::string>& tokens,
                                     const TaggerBackend& tagger) {
  return tagger.tag(utt_id, tokens);
}

}  // namespace biasforge
