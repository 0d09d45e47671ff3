#include "flexform/numeric_io.hpp"

#include <charconv>
#include <stdexcept>
#include <system_error>

namespace flexform {

std::string format_double(double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("parse_double: malformed number '" +
                                std::string(text) + "'");
  }
  return value;
}

}  // namespace flexform
