#ifndef BIASFORGE_TAGGING_HPP
#define BIASFORGE_TAGGING_HPP

#include <istream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace biasforge {

// [start, end) token interval.
using Span = std::pair<int, int>;

// Token sequence with proper-noun spans. Spans are [start, end) token
// intervals, non-overlapping, in-bounds, sorted by start.
struct TaggedTranscript {
  std::vector<std::string> tokens;
  std::vector<Span> nnp_spans;

  // Tokens covered by span i, possessive clitics stripped.
  std::vector<std::string> span_phrase(std::size_t i) const;
  bool operator==(const TaggedTranscript&) const = default;
};

void validate_spans(const TaggedTranscript& t);

class TaggerBackend {
 public:
  virtual ~TaggerBackend() = default;
  virtual TaggedTranscript tag(const std::string& utt_id,
                               const std::vector<std::string>& tokens) const = 0;
};

// Set of known proper-noun phrases, matched longest-first, greedy
// left-to-right, on possessive-stripped tokens.
class Gazetteer {
 public:
  Gazetteer() = default;
  static Gazetteer from_file(const std::string& path);
  static Gazetteer parse(std::istream& in, const std::string& name);

  void add(const std::vector<std::string>& phrase);
  bool empty() const { return phrases_.empty(); }
  std::size_t max_len() const { return max_len_; }
  bool contains(const std::vector<std::string>& phrase) const;

 private:
  std::set<std::vector<std::string>> phrases_;
  std::size_t max_len_ = 0;
};

// Default backend: union of gazetteer hits and trigger rules (tokens after
// the command verbs "call", "text", "play", "talk to", up to a possessive
// or function word). Overlapping spans are merged into one maximal span.
class RuleTagger : public TaggerBackend {
 public:
  explicit RuleTagger(Gazetteer gazetteer = {});

  TaggedTranscript tag(const std::string& utt_id,
                       const std::vector<std::string>& tokens) const override;

 private:
  Gazetteer gazetteer_;
  std::set<std::string> function_words_;
};

// Backend fed by a pre-tagged sidecar file,
// `utt_id<TAB>start:end[,start:end...]` (empty field for no spans).
class SidecarTagger : public TaggerBackend {
 public:
  static SidecarTagger from_file(const std::string& path);
  static SidecarTagger parse(std::istream& in, const std::string& name);

  TaggedTranscript tag(const std::string& utt_id,
                       const std::vector<std::string>& tokens) const override;

  void set(const std::string& utt_id, std::vector<std::pair<int, int>> spans);
  std::string serialize() const;

 private:
  std::map<std::string, std::vector<std::pair<int, int>>> spans_;
};

// Format one utterance's spans as the sidecar field ("1:2,4:6" or "").
std::string format_spans(const std::vector<Span>& spans);

// Parse a sidecar span field. Throws ParseError with the given location on
// malformed entries.
std::vector<Span> parse_spans(const std::string& field, const std::string& file,
                              int lineno);

TaggedTranscript detect_proper_nouns(const std::string& utt_id,
                                     const std::vector<std::string>& tokens,
                                     const TaggerBackend& tagger);

}  // namespace biasforge

#endif  // BIASFORGE_TAGGING_HPP
