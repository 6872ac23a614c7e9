#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace renfk {

/// Shortest round-trip decimal form, locale independent.
std::string format_double(double x);

/// FNV-1a 64-bit hash as 16 hex digits.
std::string fnv1a_hex(std::span<const unsigned char> bytes);
std::string fnv1a_hex(const std::string& text);

}  // namespace renfk
