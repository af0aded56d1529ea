#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace qrcd {

enum class UnicodeForm { kNone, kNFC, kNFKC };

// Normalization and tokenization policy shared by every string comparison
// in the toolkit (exact match, token F1, ensemble answer matching).
//
// normalize() applies the enabled steps in this order:
//   1. unicode form (NFC / NFKC composition)
//   2. tatweel removal (U+0640)
//   3. Arabic diacritic removal (harakat, tanwin, shadda, sukun, Quranic marks)
//   4. alef / alef-maqsura folding (أ إ آ ٱ -> ا, ى -> ي)
//   5. punctuation removal (Unicode general category P*)
//   6. whitespace collapsing (runs -> one U+0020, trimmed)
//   7. Latin lowercasing
// When a unicode form is selected and steps 2-7 changed the text, the form is
// re-applied at the end so that the result is itself in that form.
struct NormConfig {
  UnicodeForm unicode_form = UnicodeForm::kNFC;
  bool strip_diacritics = true;
  bool strip_tatweel = true;
  bool normalize_alef_ya = false;
  bool strip_punctuation = true;
  bool collapse_whitespace = true;
  bool lowercase_latin = true;

  // Every transform off.
  static NormConfig identity();

  friend bool operator==(const NormConfig&, const NormConfig&) = default;
};

std::string normalize(std::string_view text, const NormConfig& cfg);

// normalize(), then split on Unicode whitespace. Never yields empty tokens.
std::vector<std::string> tokenize(std::string_view text, const NormConfig& cfg);

std::string to_string(UnicodeForm form);
UnicodeForm unicode_form_from_string(std::string_view name);

// Unknown keys are rejected; absent keys keep the default.
void to_json(nlohmann::json& j, const NormConfig& cfg);
void from_json(const nlohmann::json& j, NormConfig& cfg);

}  // namespace qrcd
