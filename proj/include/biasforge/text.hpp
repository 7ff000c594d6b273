#ifndef BIASFORGE_TEXT_HPP
#define BIASFORGE_TEXT_HPP

#include <string>
#include <string_view>
#include <vector>

namespace biasforge {

// Whitespace tokenization (space, tab, newline); empty tokens dropped.
std::vector<std::string> tokenize(std::string_view text);

std::string join(const std::vector<std::string>& tokens, char sep = ' ');

// Split on a single delimiter, keeping empty fields.
std::vector<std::string> split(std::string_view text, char delim);

// "joan's" -> "joan"; tokens without a possessive clitic pass through.
// The bare clitic token "'s" maps to itself.
std::string strip_possessive(const std::string& token);

bool is_lowercase_word(std::string_view token);

// True if `needle` occurs as a contiguous subsequence of `haystack`,
// comparing possessive-stripped forms on both sides.
bool contains_token_seq(const std::vector<std::string>& haystack,
                        const std::vector<std::string>& needle);

// Reads a whole file into lines (LF or CRLF). Throws ParseError on I/O
// failure.
std::vector<std::string> read_lines(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace biasforge

#endif  // BIASFORGE_TEXT_HPP
