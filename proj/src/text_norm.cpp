#include "qrcd/text_norm.hpp"

#include "qrcd/utf8.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/uscript.h>

#include <stdexcept>

namespace qrcd {
namespace {

constexpr char32_t kTatweel = 0x0640;

bool is_arabic_diacritic(char32_t c) {
  return (c >= 0x0610 && c <= 0x061A) ||  // honorifics, small high marks
         (c >= 0x064B && c <= 0x065F) ||  // tanwin, harakat, shadda, sukun, hamza marks
         c == 0x0670 ||                   // superscript alef
         (c >= 0x06D6 && c <= 0x06DC) ||  // Quranic annotation (small high ligatures)
         (c >= 0x06DF && c <= 0x06E4) || (c >= 0x06E7 && c <= 0x06E8) ||
         (c >= 0x06EA && c <= 0x06ED) || (c >= 0x08D3 && c <= 0x08E1) ||
         (c >= 0x08E3 && c <= 0x08FF);
}

char32_t fold_alef_ya(char32_t c) {
  switch (c) {
    case 0x0622:  // alef with madda
    case 0x0623:  // alef with hamza above
    case 0x0625:  // alef with hamza below
    case 0x0671:  // alef wasla
    case 0x0672:
    case 0x0673:
      return 0x0627;
    case 0x0649:  // alef maqsura
      return 0x064A;
    default:
      return c;
  }
}

bool is_space(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); }

bool is_punct(char32_t c) { return u_ispunct(static_cast<UChar32>(c)); }

char32_t lower_latin(char32_t c) {
  const auto uc = static_cast<UChar32>(c);
  if (!u_isupper(uc)) return c;
  UErrorCode status = U_ZERO_ERROR;
  if (uscript_getScript(uc, &status) != USCRIPT_LATIN || U_FAILURE(status)) return c;
  return static_cast<char32_t>(u_tolower(uc));
}

const icu::Normalizer2* normalizer_for(UnicodeForm form) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = nullptr;
  switch (form) {
    case UnicodeForm::kNone:
      return nullptr;
    case UnicodeForm::kNFC:
      n = icu::Normalizer2::getNFCInstance(status);
      break;
    case UnicodeForm::kNFKC:
      n = icu::Normalizer2::getNFKCInstance(status);
      break;
  }
  if (U_FAILURE(status)) throw std::runtime_error("ICU normalizer unavailable");
  return n;
}

// Ill-formed UTF-8 comes back with U+FFFD substitutions.
std::string apply_form(std::string_view text, const icu::Normalizer2* normalizer) {
  auto ustr = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  if (normalizer != nullptr) {
    UErrorCode status = U_ZERO_ERROR;
    ustr = normalizer->normalize(ustr, status);
    if (U_FAILURE(status)) throw std::runtime_error("ICU normalization failed");
  }
  std::string out;
  ustr.toUTF8String(out);
  return out;
}

void collapse_ws(std::u32string& s) {
  std::u32string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char32_t c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(c);
  }
  s = std::move(out);
}

}  // namespace

NormConfig NormConfig::identity() {
  return NormConfig{UnicodeForm::kNone, false, false, false, false, false, false};
}

namespace {

// One pass of the pipeline. Sets `recomposed` when the closing unicode form
// changed the string; folding can leave a base letter and a combining mark
// that compose into a character the next pass would fold again.
std::string normalize_pass(std::string_view text, const NormConfig& cfg,
                           const icu::Normalizer2* normalizer, bool& recomposed) {
  const std::string formed = apply_form(text, normalizer);
  auto decoded = utf8::decode(formed);
  recomposed = false;
  if (!decoded) return formed;  // unreachable: apply_form sanitizes
  std::u32string s = std::move(*decoded);

  if (cfg.strip_tatweel) std::erase_if(s, [](char32_t c) { return c == kTatweel; });
  if (cfg.strip_diacritics) std::erase_if(s, is_arabic_diacritic);
  if (cfg.normalize_alef_ya) {
    for (char32_t& c : s) c = fold_alef_ya(c);
  }
  if (cfg.strip_punctuation) std::erase_if(s, is_punct);
  if (cfg.collapse_whitespace) collapse_ws(s);
  if (cfg.lowercase_latin) {
    for (char32_t& c : s) c = lower_latin(c);
  }

  std::string out = utf8::encode(s);
  if (normalizer == nullptr) return out;
  std::string closed = apply_form(out, normalizer);
  recomposed = closed != out;
  return closed;
}

}  // namespace

std::string normalize(std::string_view text, const NormConfig& cfg) {
  const icu::Normalizer2* normalizer = normalizer_for(cfg.unicode_form);
  bool recomposed = false;
  std::string out = normalize_pass(text, cfg, normalizer, recomposed);
  // Each repeat shortens the string, so this stops.
  while (recomposed) {
    std::string next = normalize_pass(out, cfg, normalizer, recomposed);
    if (next == out) break;
    out = std::move(next);
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text, const NormConfig& cfg) {
  const std::string normalized = normalize(text, cfg);
  const auto decoded = utf8::decode(normalized);
  std::vector<std::string> tokens;
  if (!decoded) return tokens;
  std::u32string current;
  for (char32_t c : *decoded) {
    if (is_space(c)) {
      if (!current.empty()) tokens.push_back(utf8::encode(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) tokens.push_back(utf8::encode(current));
  return tokens;
}

std::string to_string(UnicodeForm form) {
  switch (form) {
    case UnicodeForm::kNone:
      return "none";
    case UnicodeForm::kNFC:
      return "nfc";
    case UnicodeForm::kNFKC:
      return "nfkc";
  }
  return "none";
}

UnicodeForm unicode_form_from_string(std::string_view name) {
  if (name == "none") return UnicodeForm::kNone;
  if (name == "nfc") return UnicodeForm::kNFC;
  if (name == "nfkc") return UnicodeForm::kNFKC;
  throw std::invalid_argument("unknown unicode form '" + std::string(name) +
                              "' (expected none, nfc or nfkc)");
}

void to_json(nlohmann::json& j, const NormConfig& cfg) {
  j = nlohmann::json{{"unicode_form", to_string(cfg.unicode_form)},
                     {"strip_tatweel", cfg.strip_tatweel},
                     {"strip_diacritics", cfg.strip_diacritics},
                     {"normalize_alef_ya", cfg.normalize_alef_ya},
                     {"strip_punctuation", cfg.strip_punctuation},
                     {"collapse_whitespace", cfg.collapse_whitespace},
                     {"lowercase_latin", cfg.lowercase_latin}};
}

void from_json(const nlohmann::json& j, NormConfig& cfg) {
  if (!j.is_object()) throw std::invalid_argument("norm config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "unicode_form") {
      cfg.unicode_form = unicode_form_from_string(value.get<std::string>());
    } else if (key == "strip_tatweel") {
      cfg.strip_tatweel = value.get<bool>();
    } else if (key == "strip_diacritics") {
      cfg.strip_diacritics = value.get<bool>();
    } else if (key == "normalize_alef_ya") {
      cfg.normalize_alef_ya = value.get<bool>();
    } else if (key == "strip_punctuation") {
      cfg.strip_punctuation = value.get<bool>();
    } else if (key == "collapse_whitespace") {
      cfg.collapse_whitespace = value.get<bool>();
    } else if (key == "lowercase_latin") {
      cfg.lowercase_latin = value.get<bool>();
    } else {
      throw std::invalid_argument("unknown norm config key '" + key + "'");
    }
  }
}

}  // namespace qrcd
