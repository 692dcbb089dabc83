#include "qcat/text.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "qcat/errors.hpp"

namespace qcat::text {
namespace {

// strtod honours the C locale, which the library never changes.
bool read_number(const std::string& s, std::size_t& pos, double& out) {
  const char* begin = s.c_str() + pos;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(begin, &end);
  if (end == begin || errno == ERANGE) return false;
  pos += static_cast<std::size_t>(end - begin);
  return true;
}

}  // namespace

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view sv) {
  const std::string s(trim(sv));
  std::size_t pos = 0;
  double v = 0;
  if (s.empty() || !read_number(s, pos, v) || pos != s.size() || !std::isfinite(v)) {
    throw ValidationError("malformed number '" + s + "'");
  }
  return v;
}

std::complex<double> parse_complex(std::string_view sv) {
  const std::string s(trim(sv));
  const auto fail = [&] { return ValidationError("malformed complex number '" + s + "'"); };
  if (s.empty()) throw fail();

  std::size_t pos = 0;
  double first = 0;
  if (!read_number(s, pos, first)) throw fail();
  if (pos == s.size()) {
    if (!std::isfinite(first)) throw fail();
    return {first, 0.0};
  }
  if (s[pos] == 'i' && pos + 1 == s.size()) {
    if (!std::isfinite(first)) throw fail();
    return {0.0, first};
  }
  if (s[pos] != '+' && s[pos] != '-') throw fail();
  double second = 0;
  if (!read_number(s, pos, second)) throw fail();
  if (pos + 1 != s.size() || s[pos] != 'i') throw fail();
  if (!std::isfinite(first) || !std::isfinite(second)) throw fail();
  return {first, second};
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_complex(std::complex<double> z) {
  std::string out = format_double(z.real());
  const std::string im = format_double(z.imag());
  if (im.front() != '-') out += '+';
  out += im;
  out += 'i';
  return out;
}

}  // namespace qcat::text
