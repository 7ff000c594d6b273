#include "biasforge/builtin_data.hpp"

namespace biasforge {

const std::string_view kBuiltinPhonemeTable =
    "P\tC\tbilabial,stop,voiceless\n"
    "B\tC\tbilabial,stop,voiced\n"
    "M\tC\tbilabial,nasal,voiced\n"
    "F\tC\tlabiodental,fricative,voiceless\n"
    "V\tC\tlabiodental,fricative,voiced\n"
    "TH\tC\tdental,fricative,voiceless\n"
    "DH\tC\tdental,fricative,voiced\n"
    "T\tC\talveolar,stop,voiceless\n"
    "D\tC\talveolar,stop,voiced\n"
    "S\tC\talveolar,fricative,voiceless\n"
    "Z\tC\talveolar,fricative,voiced\n"
    "N\tC\talveolar,nasal,voiced\n"
    "L\tC\talveolar,lateral,voiced\n"
    "R\tC\talveolar,approximant,voiced\n"
    "SH\tC\tpostalveolar,fricative,voiceless\n"
    "ZH\tC\tpostalveolar,fricative,voiced\n"
    "CH\tC\tpostalveolar,affricate,voiceless\n"
    "JH\tC\tpostalveolar,affricate,voiced\n"
    "Y\tC\tpalatal,approximant,voiced\n"
    "W\tC\tlabiovelar,approximant,voiced\n"
    "K\tC\tvelar,stop,voiceless\n"
    "G\tC\tvelar,stop,voiced\n"
    "NG\tC\tvelar,nasal,voiced\n"
    "HH\tC\tglottal,fricative,voiceless\n"
    "IY\tV\thigh,front,unrounded\n"
    "IH\tV\tnearhigh,front,unrounded\n"
    "EY\tV\tmid,front,unrounded\n"
    "EH\tV\tlowmid,front,unrounded\n"
    "AE\tV\tnearlow,front,unrounded\n"
    "AA\tV\tlow,back,unrounded\n"
    "AO\tV\tlowmid,back,rounded\n"
    "OW\tV\tmid,back,rounded\n"
    "UH\tV\tnearhigh,back,rounded\n"
    "UW\tV\thigh,back,rounded\n"
    "AH\tV\tmid,central,unrounded\n"
    "ER\tV\tmid,central,rhotic\n"
    "AY\tV\tlow,front,unrounded\n"
    "AW\tV\tlow,central,unrounded\n"
    "OY\tV\tlowmid,front,rounded\n";

const std::string_view kBuiltinLetterRules =
    "a\tAE\n"
    "b\tB\n"
    "c\tK\n"
    "d\tD\n"
    "e\tEH\n"
    "f\tF\n"
    "g\tG\n"
    "h\tHH\n"
    "i\tIH\n"
    "j\tJH\n"
    "k\tK\n"
    "l\tL\n"
    "m\tM\n"
    "n\tN\n"
    "o\tAA\n"
    "p\tP\n"
    "q\tK\n"
    "r\tR\n"
    "s\tS\n"
    "t\tT\n"
    "u\tAH\n"
    "v\tV\n"
    "w\tW\n"
    "x\tK S\n"
    "y\tY\n"
    "z\tZ\n"
    "'\t\n";

const std::string_view kBuiltinFunctionWords =
    "the a an my your his her its our their this that these those "
    "to for with on in at of and or but not is are was were be "
    "me him them us it some any every each no about from up down "
    "please now again back later soon today tomorrow tonight";

}  // namespace biasforge
