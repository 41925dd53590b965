#pragma once

// Reader and writer for PABULIB `.pb` election files.
//
// Layout: a META section of `key;value` rows, then PROJECTS and VOTES sections,
// each a semicolon-separated column header row followed by data rows. No quoting;
// line terminators `\n` or `\r\n`.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pbmarl/election.hpp"
#include "pbmarl/error.hpp"

namespace pbmarl {

struct PbSection {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line of each row; 0 for rows that were not parsed from text.
  std::vector<std::size_t> lines;

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    return std::nullopt;
  }

  std::size_t line_of(std::size_t row) const { return row < lines.size() ? lines[row] : 0; }

  friend bool operator==(const PbSection& a, const PbSection& b) {
    return a.columns == b.columns && a.rows == b.rows;
  }
};

struct RawPbFile {
  std::vector<std::pair<std::string, std::string>> meta;
  PbSection projects;
  PbSection votes;

  std::optional<std::string> meta_value(std::string_view key) const {
    for (const auto& [k, v] : meta)
      if (k == key) return v;
    return std::nullopt;
  }

  friend bool operator==(const RawPbFile&, const RawPbFile&) = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

/// Decimal with an explicit number of fractional digits: value = mantissa / 10^decimals.
struct Decimal {
  std::int64_t mantissa = 0;
  int decimals = 0;
};

inline std::optional<Decimal> parse_decimal(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  auto dot = text.find('.');
  std::string_view whole = text.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() && frac.empty()) return std::nullopt;
  auto all_digits = [](std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (!all_digits(whole) || !all_digits(frac)) return std::nullopt;
  while (!frac.empty() && frac.back() == '0') frac.remove_suffix(1);
  if (whole.size() + frac.size() > 18) return std::nullopt;
  std::string digits = std::string(whole) + std::string(frac);
  std::int64_t mantissa = 0;
  if (!digits.empty()) {
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), mantissa);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  }
  return Decimal{mantissa, static_cast<int>(frac.size())};
}

inline std::int64_t pow10(int n) {
  std::int64_t r = 1;
  while (n-- > 0) r *= 10;
  return r;
}

inline std::optional<int> parse_int(std::string_view text) {
  text = trim(text);
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace detail

inline RawPbFile parse_pb(std::string_view text) {
  enum class Section { None, Meta, Projects, Votes };
  RawPbFile raw;
  Section current = Section::None;
  bool awaiting_header = false;
  bool first_meta_row = true;
  std::map<std::string, std::size_t> seen_projects, seen_voters;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (detail::trim(line).empty()) {
      if (end == text.size()) break;
      continue;
    }

    const std::string_view marker = detail::trim(line);
    if (marker == "META" || marker == "PROJECTS" || marker == "VOTES") {
      Section next = marker == "META" ? Section::Meta : marker == "PROJECTS" ? Section::Projects : Section::Votes;
      if (static_cast<int>(next) != static_cast<int>(current) + 1)
        throw Error(ErrorKind::MissingSection,
                    "section " + std::string(marker) + " out of order (expected META, PROJECTS, VOTES)", line_no);
      current = next;
      awaiting_header = current != Section::Meta;
      continue;
    }

    switch (current) {
      case Section::None:
        throw Error(ErrorKind::MissingSection, "content before META section", line_no);
      case Section::Meta: {
        auto fields = detail::split(line, ';');
        if (fields.size() != 2) throw Error(ErrorKind::MalformedRow, "META row must be key;value", line_no);
        if (first_meta_row && fields[0] == "key" && fields[1] == "value") {
          first_meta_row = false;
          break;
        }
        first_meta_row = false;
        raw.meta.emplace_back(std::string(detail::trim(fields[0])), std::string(detail::trim(fields[1])));
        break;
      }
      case Section::Projects:
      case Section::Votes: {
        PbSection& section = current == Section::Projects ? raw.projects : raw.votes;
        auto fields = detail::split(line, ';');
        if (awaiting_header) {
          section.columns = std::move(fields);
          awaiting_header = false;
          const char* key = current == Section::Projects ? "project_id" : "voter_id";
          if (!section.column(key))
            throw Error(ErrorKind::MalformedRow, std::string("column header lacks ") + key, line_no);
          if (current == Section::Projects && !section.column("cost"))
            throw Error(ErrorKind::MalformedRow, "column header lacks cost", line_no);
          break;
        }
        if (fields.size() != section.columns.size())
          throw Error(ErrorKind::MalformedRow,
                      "expected " + std::to_string(section.columns.size()) + " fields, found " +
                          std::to_string(fields.size()),
                      line_no);
        if (current == Section::Projects) {
          const std::string& id = fields[*section.column("project_id")];
          if (id.empty()) throw Error(ErrorKind::MalformedRow, "empty project_id", line_no);
          if (!seen_projects.emplace(id, line_no).second)
            throw Error(ErrorKind::DuplicateProjectId, "project_id " + id, line_no);
          auto cost = detail::parse_decimal(fields[*section.column("cost")]);
          if (!cost || cost->mantissa <= 0)
            throw Error(ErrorKind::NonNumericCost, "cost '" + fields[*section.column("cost")] + "'", line_no);
        } else {
          const std::string& id = fields[*section.column("voter_id")];
          if (id.empty()) throw Error(ErrorKind::MalformedRow, "empty voter_id", line_no);
          if (!seen_voters.emplace(id, line_no).second)
            throw Error(ErrorKind::DuplicateVoterId, "voter_id " + id, line_no);
        }
        section.rows.push_back(std::move(fields));
        section.lines.push_back(line_no);
        break;
      }
    }
    if (end == text.size()) break;
  }

  if (current != Section::Votes || awaiting_header) {
    const char* missing = current == Section::None       ? "META"
                          : current == Section::Meta     ? "PROJECTS"
                          : current == Section::Projects ? "VOTES"
                                                         : "VOTES header";
    throw Error(ErrorKind::MissingSection, std::string("missing ") + missing);
  }
  return raw;
}

inline std::string serialize_pb(const RawPbFile& raw) {
  std::string out = "META\nkey;value\n";
  for (const auto& [k, v] : raw.meta) out += k + ";" + v + "\n";
  auto write_section = [&out](const char* name, const PbSection& section) {
    out += name;
    out += "\n";
    auto write_row = [&out](const std::vector<std::string>& row) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ';';
        out += row[i];
      }
      out += '\n';
    };
    write_row(section.columns);
    for (const auto& row : section.rows) write_row(row);
  };
  write_section("PROJECTS", raw.projects);
  write_section("VOTES", raw.votes);
  return out;
}

namespace detail {

inline ImpactAreas parse_labels(std::string_view text) {
  ImpactAreas labels;
  for (const auto& label : split(text, ',')) {
    auto t = trim(label);
    if (!t.empty()) labels.emplace(t);
  }
  return labels;
}

inline std::optional<std::size_t> impact_area_column(const PbSection& projects) {
  for (const char* name : {"category", "categories", "impact_areas"})
    if (auto c = projects.column(name)) return c;
  return std::nullopt;
}

}  // namespace detail

inline ElectionInstance build_election(const RawPbFile& raw) {
  ElectionInstance election;

  auto budget_text = raw.meta_value("budget");
  if (!budget_text) throw Error(ErrorKind::MissingBudget, "META has no budget");
  auto budget = detail::parse_decimal(*budget_text);
  if (!budget) throw Error(ErrorKind::MissingBudget, "budget '" + *budget_text + "' is not a number");

  auto tokens_text = raw.meta_value("max_sum_points");
  if (!tokens_text) tokens_text = raw.meta_value("max_length");
  if (!tokens_text) throw Error(ErrorKind::TokenCountMissing, "META has neither max_sum_points nor max_length");
  auto tokens = detail::parse_int(*tokens_text);
  if (!tokens || *tokens < 1) throw Error(ErrorKind::TokenCountMissing, "token count '" + *tokens_text + "'");
  election.tokens_per_voter = *tokens;

  election.currency = raw.meta_value("currency").value_or("");
  election.name = raw.meta_value("unit").value_or(raw.meta_value("description").value_or(""));

  const std::size_t id_col = *raw.projects.column("project_id");
  const std::size_t cost_col = *raw.projects.column("cost");
  const auto area_col = detail::impact_area_column(raw.projects);

  std::vector<detail::Decimal> costs;
  int decimals = budget->decimals;
  for (std::size_t r = 0; r < raw.projects.rows.size(); ++r) {
    auto cost = detail::parse_decimal(raw.projects.rows[r][cost_col]);
    if (!cost || cost->mantissa <= 0)
      throw Error(ErrorKind::NonNumericCost, "cost of project " + raw.projects.rows[r][id_col], raw.projects.line_of(r));
    decimals = std::max(decimals, cost->decimals);
    costs.push_back(*cost);
  }
  election.cost_scale = detail::pow10(decimals);
  auto scaled = [decimals](const detail::Decimal& d) { return d.mantissa * detail::pow10(decimals - d.decimals); };
  election.budget = scaled(*budget);

  ImpactAreas universe;
  for (std::size_t r = 0; r < raw.projects.rows.size(); ++r) {
    Project p;
    p.id = raw.projects.rows[r][id_col];
    p.cost = scaled(costs[r]);
    if (area_col) p.impact_areas = detail::parse_labels(raw.projects.rows[r][*area_col]);
    if (p.impact_areas.empty())
      throw Error(ErrorKind::EmptyImpactAreas, "project " + p.id + " has no impact-area labels", raw.projects.line_of(r));
    universe.insert(p.impact_areas.begin(), p.impact_areas.end());
    election.projects.push_back(std::move(p));
  }
  election.impact_areas.assign(universe.begin(), universe.end());

  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < election.projects.size(); ++i) index_of[election.projects[i].id] = i;

  const std::size_t voter_col = *raw.votes.column("voter_id");
  const auto vote_col = raw.votes.column("vote");
  const auto points_col = raw.votes.column("points");
  for (std::size_t r = 0; r < raw.votes.rows.size(); ++r) {
    const auto& row = raw.votes.rows[r];
    const std::size_t line = raw.votes.line_of(r);
    VoterProfile voter;
    voter.id = row[voter_col];
    std::vector<std::string> ids;
    if (vote_col && !detail::trim(row[*vote_col]).empty()) ids = detail::split(row[*vote_col], ',');
    std::vector<std::string> points;
    if (points_col && !detail::trim(row[*points_col]).empty()) points = detail::split(row[*points_col], ',');
    if (!points.empty() && points.size() != ids.size())
      throw Error(ErrorKind::MalformedRow, "vote and points lists differ in length for voter " + voter.id, line);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      auto id = std::string(detail::trim(ids[k]));
      auto it = index_of.find(id);
      if (it == index_of.end())
        throw Error(ErrorKind::UnknownProject, "voter " + voter.id + " votes for unknown project " + id, line);
      int count = 1;
      if (!points.empty()) {
        auto parsed = detail::parse_int(points[k]);
        if (!parsed || *parsed < 0) throw Error(ErrorKind::MalformedRow, "points '" + points[k] + "'", line);
        count = *parsed;
      }
      voter.historical_ballot.add(it->second, count);
    }
    if (voter.historical_ballot.total() > election.tokens_per_voter)
      throw Error(ErrorKind::BallotExceedsTokens,
                  "voter " + voter.id + " assigns " + std::to_string(voter.historical_ballot.total()) + " tokens",
                  line);
    voter.favoured_areas = derive_preferences(voter.historical_ballot, election.projects);
    election.voters.push_back(std::move(voter));
  }

  validate(election);
  return election;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

/// Resolves a dataset path, falling back to $PBMARL_DATA_DIR for relative paths that do not exist.
inline std::filesystem::path resolve_data_path(const std::filesystem::path& path) {
  if (std::filesystem::exists(path) || path.is_absolute()) return path;
  if (const char* root = std::getenv("PBMARL_DATA_DIR")) {
    auto candidate = std::filesystem::path(root) / path;
    if (std::filesystem::exists(candidate)) return candidate;
  }
  return path;
}

inline ElectionInstance load_election(const std::filesystem::path& path) {
  auto resolved = resolve_data_path(path);
  if (!std::filesystem::exists(resolved)) throw Error(ErrorKind::DataError, "dataset not found: " + path.string());
  return build_election(parse_pb(read_text_file(resolved)));
}

/// FNV-1a 64-bit digest, printed as 16 hex digits.
inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xf];
  return out;
}

}  // namespace pbmarl
