#ifndef BIASFORGE_BUILTIN_DATA_HPP
#define BIASFORGE_BUILTIN_DATA_HPP

#include <string_view>

namespace biasforge {

// Built-in phoneme feature table, `symbol<TAB>class<TAB>f1,f2,f3` per line.
extern const std::string_view kBuiltinPhonemeTable;

// Letter -> phoneme fallback rules for out-of-lexicon words,
// `letter<TAB>PH [PH ...]` per line; an empty right side drops the letter.
extern const std::string_view kBuiltinLetterRules;

// Function words that terminate a trigger-rule span in the tagger.
extern const std::string_view kBuiltinFunctionWords;

}  // namespace biasforge

#endif  // BIASFORGE_BUILTIN_DATA_HPP
