#include <algorithm>
#include <cctype>

#include "fcmer/core.hpp"

namespace fcmer {

std::string_view variant_name(Variant v) noexcept {
  switch (v) {
    case Variant::FcmErL2: return "FCM-ER-L2";
    case Variant::FcmErL1: return "FCM-ER-L1";
    case Variant::AfcmErM: return "AFCM-ER-M";
    case Variant::AfcmErMk: return "AFCM-ER-Mk";
    case Variant::AfcmErGsL2: return "AFCM-ER-GS-L2";
    case Variant::AfcmErGsL1: return "AFCM-ER-GS-L1";
    case Variant::AfcmErGpL2: return "AFCM-ER-GP-L2";
    case Variant::AfcmErGpL1: return "AFCM-ER-GP-L1";
    case Variant::AfcmErLsL2: return "AFCM-ER-LS-L2";
    case Variant::AfcmErLsL1: return "AFCM-ER-LS-L1";
    case Variant::AfcmErLpL2: return "AFCM-ER-LP-L2";
    case Variant::AfcmErLpL1: return "AFCM-ER-LP-L1";
  }
  return "?";
}

std::string variant_cli_name(Variant v) {
  std::string s(variant_name(v));
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

std::optional<Variant> parse_variant(std::string_view name) {
  std::string lowered(name);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  for (Variant v : kAllVariants)
    if (variant_cli_name(v) == lowered) return v;
  return std::nullopt;
}

}  // namespace fcmer
