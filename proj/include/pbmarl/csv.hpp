#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "pbmarl/election.hpp"

namespace pbmarl::csv {

/// Six significant digits, '.' decimal separator, never exponent notation or thousands separators.
inline std::string format_number(double value) {
  if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
  if (value == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  std::string text(buf);
  if (text.find('e') == std::string::npos) return text;
  // Large or tiny magnitudes: round to six significant digits and print positionally.
  const int exponent = static_cast<int>(std::floor(std::log10(std::fabs(value))));
  const int decimals = std::max(0, 5 - exponent);
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  text = buf;
  if (decimals == 0) {
    const double scale = std::pow(10.0, exponent - 5);
    std::snprintf(buf, sizeof(buf), "%.0f", std::round(value / scale) * scale);
    return buf;
  }
  while (text.back() == '0') text.pop_back();
  if (text.back() == '.') text.pop_back();
  return text;
}

/// Exact decimal rendering of a money amount held in 1/scale units.
inline std::string format_money(Money amount, Money scale) {
  if (scale <= 1) return std::to_string(amount);
  int decimals = 0;
  for (Money s = scale; s > 1; s /= 10) ++decimals;
  const bool negative = amount < 0;
  const Money magnitude = negative ? -amount : amount;
  std::string frac = std::to_string(magnitude % scale);
  frac.insert(0, static_cast<std::size_t>(decimals) - frac.size(), '0');
  return (negative ? "-" : "") + std::to_string(magnitude / scale) + "." + frac;
}

inline std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  return out;
}

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace pbmarl::csv
