#pragma once

#include <cstdint>
#include <string_view>

namespace sumrecom::detail {

// Counts per million content tokens of general English newswire.
inline constexpr std::int64_t kBackgroundTotal = 1'000'000;

std::int64_t background_count(std::string_view term);

}  // namespace sumrecom::detail
