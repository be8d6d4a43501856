#pragma once

#include <string>
#include <string_view>

namespace calib {

enum class BinScheme { EqualFrequency, EqualWidth };

std::string_view to_string(BinScheme scheme) noexcept;
// Accepts "equal-frequency" / "equal-width"; throws InputError otherwise.
BinScheme parse_bin_scheme(std::string_view text);

}  // namespace calib
