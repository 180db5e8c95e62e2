#include <charconv>
#include <stdexcept>
#include <string>

#include "cvq/cli.hpp"
#include "cvq/frame.hpp"

namespace cvq::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool ends_with(std::string_view s, std::string_view tail) {
  return s.size() >= tail.size() && s.substr(s.size() - tail.size()) == tail;
}

double parse_number(std::string_view text, std::string_view what) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw std::invalid_argument("cannot parse " + std::string(what) + " '" + std::string(text) + "'");
  return v;
}

}  // namespace

double parse_real(std::string_view text) { return parse_number(text, "number"); }

double parse_angle(std::string_view text) {
  const std::string_view original = text;
  text = trim(text);
  double divisor = 1.0;
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    divisor = parse_number(text.substr(slash + 1), "angle divisor");
    if (divisor == 0.0) throw std::invalid_argument("angle divisor is zero in '" + std::string(original) + "'");
    text = trim(text.substr(0, slash));
  }
  double value;
  if (ends_with(text, "pi")) {
    auto head = trim(text.substr(0, text.size() - 2));
    if (!head.empty() && head.back() == '*') head = trim(head.substr(0, head.size() - 1));
    if (head.empty() || head == "+") value = kPi;
    else if (head == "-") value = -kPi;
    else value = parse_number(head, "angle") * kPi;
  } else {
    value = parse_number(text, "angle");
  }
  return value / divisor;
}

double parse_length(std::string_view text) {
  text = trim(text);
  struct Unit {
    std::string_view suffix;
    double scale;
  };
  static constexpr Unit units[] = {{"nm", 1e-9}, {"um", 1e-6}, {"mm", 1e-3}, {"cm", 1e-2}, {"m", 1.0}};
  for (const auto& u : units)
    if (ends_with(text, u.suffix)) return parse_number(text.substr(0, text.size() - u.suffix.size()), "length") * u.scale;
  return parse_number(text, "length");
}

std::array<double, 3> parse_triplet(std::string_view text) {
  std::array<double, 3> out{};
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    const auto comma = text.find(',', start);
    if ((i < 2) == (comma == std::string_view::npos))
      throw std::invalid_argument("expected three comma-separated numbers, got '" + std::string(text) + "'");
    out[i] = parse_number(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start), "component");
    start = comma + 1;
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    out.emplace_back(std::string(key), std::string(value));
  }
  return out;
}

}  // namespace cvq::cli
