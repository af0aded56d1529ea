#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace qrcd::utf8 {

// Decodes UTF-8 into Unicode scalar values. Returns nullopt on ill-formed input.
std::optional<std::u32string> decode(std::string_view text);

std::string encode(std::u32string_view code_points);

// Number of scalar values, or nullopt if text is not valid UTF-8.
std::optional<std::size_t> length(std::string_view text);

bool is_valid(std::string_view text);

}  // namespace qrcd::utf8
