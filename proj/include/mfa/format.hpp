#pragma once

#include <string>
#include <string_view>

namespace mfa {

/// 17 significant digits, '.' separator, independent of the locale.
std::string format_real(double x);
std::string format_real(double x, int significant_digits);

/// Locale-independent decimal parse of the whole string; throws ParameterError.
double parse_real(std::string_view s);

}  // namespace mfa
