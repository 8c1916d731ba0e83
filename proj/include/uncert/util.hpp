#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace uncert {

// Fixed-point text used by every CSV writer, so artifacts diff cleanly.
std::string format_fixed(double value, int decimals);

// Round-trippable float text (%.17g).
std::string format_full(double value);

std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view s);

// Strict full-string numeric parses; return false on any trailing junk.
bool parse_double(std::string_view text, double& out);
bool parse_int(std::string_view text, int& out);

// FNV-1a 64-bit content digest, used by the run manifest.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

std::string read_text_file(const std::string& path);

}  // namespace uncert
