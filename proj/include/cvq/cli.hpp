#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cvq::cli {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

/// Runs one command line (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Plain decimal number; rejects trailing garbage.
double parse_real(std::string_view text);
/// "0.98pi", "-pi", "pi/2", "1.2" (radians).
double parse_angle(std::string_view text);
/// "0.12mm", "780nm", "6.5um", "1e-3" (meters).
double parse_length(std::string_view text);
/// "0,-1,0".
std::array<double, 3> parse_triplet(std::string_view text);

/// `key = value` lines, '#' comments, blank lines ignored.
std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text);

}  // namespace cvq::cli
