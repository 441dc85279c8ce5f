#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace reclink {

/// Jaro similarity in [0,1]. Both empty -> 1, exactly one empty -> 0.
double Jaro(std::string_view a, std::string_view b);

/// Jaro-Winkler similarity: prefix scale 0.1, prefix capped at 4 characters,
/// boost applied only when the Jaro value exceeds 0.7.
double JaroWinkler(std::string_view a, std::string_view b);

/// Restricted Damerau-Levenshtein (optimal string alignment): insert, delete,
/// substitute and adjacent transposition each cost 1; no substring is edited twice.
std::size_t DamerauLevenshtein(std::string_view a, std::string_view b);

/// Plain Levenshtein distance (no transpositions).
std::size_t Levenshtein(std::string_view a, std::string_view b);

/// Code returned by Soundex for input without letters. Never equals a real code.
inline constexpr std::string_view kSoundexEmpty = "0000";

/// American Soundex (NARA rules: H and W do not separate equal codes, vowels do).
std::string Soundex(std::string_view s);

}  // namespace reclink
