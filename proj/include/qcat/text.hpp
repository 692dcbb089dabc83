#pragma once

#include <complex>
#include <string>
#include <string_view>

namespace qcat::text {

/// Parses "re", "imi", or "re+imi" / "re-imi" (e.g. "0.5+0.5i", "-1e-3i").
/// Throws ValidationError on malformed input.
std::complex<double> parse_complex(std::string_view s);
double parse_double(std::string_view s);

/// 17 significant digits, '.' decimal separator.
std::string format_double(double v);
/// Always "re+imi" or "re-imi".
std::string format_complex(std::complex<double> z);

std::string_view trim(std::string_view s);

}  // namespace qcat::text
