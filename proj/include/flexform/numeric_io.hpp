#ifndef FLEXFORM_NUMERIC_IO_HPP
#define FLEXFORM_NUMERIC_IO_HPP

#include <string>
#include <string_view>

namespace flexform {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

/// Strict double parsing; throws std::invalid_argument on trailing junk.
double parse_double(std::string_view text);

}  // namespace flexform

#endif
