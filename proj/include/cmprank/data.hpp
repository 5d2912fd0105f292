#pragma once

// Match-result ingestion and per-team goal series extraction.
//
// Canonical CSV schema (UTF-8, comma separated, one header line):
//
//   date,competition,home_team,away_team,home_goals,away_goals
//
// with dates as YYYY-MM-DD. Fields may be double-quoted; a literal quote is
// written as "".

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "cmprank/error.hpp"
#include "cmprank/fitting.hpp"

namespace cmprank {

using Date = std::chrono::year_month_day;

inline constexpr std::string_view kCsvHeader = "date,competition,home_team,away_team,home_goals,away_goals";
inline constexpr std::int64_t kImplausibleGoals = 60;

struct MatchRecord {
  Date date{};
  std::string competition;
  std::string home_team;
  std::string away_team;
  std::int64_t home_goals = 0;
  std::int64_t away_goals = 0;

  friend bool operator==(const MatchRecord&, const MatchRecord&) = default;
};

inline std::optional<Date> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  auto digits = [](std::string_view part, auto& out) {
    if (part.empty() || !std::all_of(part.begin(), part.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return false;
    }
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    return ec == std::errc{} && ptr == part.data() + part.size();
  };
  if (!digits(s.substr(0, 4), y) || !digits(s.substr(5, 2), m) || !digits(s.substr(8, 2), d)) return std::nullopt;
  const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

inline std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

namespace detail {

// Splits one CSV record; nullopt on an unterminated quote or stray quote.
inline std::optional<std::vector<std::string>> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool field_was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      field_was_quoted = false;
    } else if (c == '"') {
      if (!cur.empty() || field_was_quoted) return std::nullopt;
      quoted = true;
      field_was_quoted = true;
    } else {
      if (field_was_quoted) return std::nullopt;
      cur.push_back(c);
    }
  }
  if (quoted) return std::nullopt;
  fields.push_back(std::move(cur));
  return fields;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::optional<std::int64_t> parse_goals(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline auto sort_key(const MatchRecord& m) {
  return std::tie(m.date, m.home_team, m.away_team, m.home_goals, m.away_goals, m.competition);
}

inline bool same_fixture(const MatchRecord& a, const MatchRecord& b) {
  return a.date == b.date && a.home_team == b.home_team && a.away_team == b.away_team &&
         a.home_goals == b.home_goals && a.away_goals == b.away_goals;
}

}  // namespace detail

/// Validated, canonically ordered match collection. Records are sorted by
/// (date, home, away, score, competition) and exact duplicate fixtures (same
/// date, teams and score) are collapsed, so two files holding the same rows
/// in different orders produce equal datasets.
class Dataset {
 public:
  Dataset() = default;

  static Dataset from_matches(std::vector<MatchRecord> matches, std::size_t* duplicates_dropped = nullptr) {
    for (const auto& m : matches) {
      if (m.home_team == m.away_team) {
        throw Error(ErrorCode::invalid_argument, "team '" + m.home_team + "' cannot play itself");
      }
      if (m.home_goals < 0 || m.away_goals < 0) throw Error(ErrorCode::invalid_argument, "negative goal count");
    }
    std::sort(matches.begin(), matches.end(),
              [](const MatchRecord& a, const MatchRecord& b) { return detail::sort_key(a) < detail::sort_key(b); });
    const auto before = matches.size();
    matches.erase(std::unique(matches.begin(), matches.end(), detail::same_fixture), matches.end());
    if (duplicates_dropped) *duplicates_dropped = before - matches.size();

    Dataset d;
    d.matches_ = std::move(matches);
    for (const auto& m : d.matches_) {
      d.teams_.insert(m.home_team);
      d.teams_.insert(m.away_team);
    }
    return d;
  }

  const std::vector<MatchRecord>& matches() const noexcept { return matches_; }
  const std::set<std::string>& teams() const noexcept { return teams_; }
  bool empty() const noexcept { return matches_.empty(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<MatchRecord> matches_;
  std::set<std::string> teams_;
};

enum class InputFormat { csv };

struct RowError {
  std::size_t line = 0;  // 1-based physical line; the header is line 1
  std::string reason;
};

struct LoadResult {
  Dataset dataset;
  std::vector<RowError> rejected;
  std::size_t duplicates_dropped = 0;
  std::vector<std::size_t> implausible_lines;  // goals above kImplausibleGoals
};

inline LoadResult load_matches(std::istream& in, InputFormat format = InputFormat::csv) {
  (void)format;  // csv is the only format
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::malformed_header, "input is empty");
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) {
    throw Error(ErrorCode::malformed_header, "expected header '" + std::string(kCsvHeader) + "', got '" + line + "'");
  }

  LoadResult result;
  std::vector<MatchRecord> records;
  std::size_t line_no = 1;
  std::size_t data_rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++data_rows;
    auto reject = [&](std::string reason) { result.rejected.push_back({line_no, std::move(reason)}); };

    const auto fields = detail::split_csv(line);
    if (!fields) {
      reject("unbalanced quotes");
      continue;
    }
    if (fields->size() != 6) {
      reject("expected 6 fields, found " + std::to_string(fields->size()));
      continue;
    }
    const auto& f = *fields;
    MatchRecord m;
    const auto date = parse_date(f[0]);
    if (!date) {
      reject("unparseable date '" + f[0] + "'");
      continue;
    }
    m.date = *date;
    m.competition = f[1];
    m.home_team = f[2];
    m.away_team = f[3];
    if (m.home_team.empty() || m.away_team.empty()) {
      reject("missing team name");
      continue;
    }
    if (m.home_team == m.away_team) {
      reject("home and away team are both '" + m.home_team + "'");
      continue;
    }
    const auto hg = detail::parse_goals(f[4]);
    const auto ag = detail::parse_goals(f[5]);
    if (!hg || !ag) {
      reject("non-integer goals '" + f[4] + "', '" + f[5] + "'");
      continue;
    }
    if (*hg < 0 || *ag < 0) {
      reject("negative goals");
      continue;
    }
    m.home_goals = *hg;
    m.away_goals = *ag;
    if (*hg > kImplausibleGoals || *ag > kImplausibleGoals) result.implausible_lines.push_back(line_no);
    records.push_back(std::move(m));
  }

  if (data_rows > 0 && records.empty()) {
    std::ostringstream os;
    os << "all " << data_rows << " rows were rejected; first problem on line " << result.rejected.front().line
       << ": " << result.rejected.front().reason;
    throw Error(ErrorCode::malformed_row, os.str());
  }
  result.dataset = Dataset::from_matches(std::move(records), &result.duplicates_dropped);
  return result;
}

/// Writes the dataset in the canonical schema.
inline void write_matches(std::ostream& out, const Dataset& data) {
  out << kCsvHeader << '\n';
  for (const auto& m : data.matches()) {
    out << format_date(m.date) << ',' << detail::csv_field(m.competition) << ',' << detail::csv_field(m.home_team)
        << ',' << detail::csv_field(m.away_team) << ',' << m.home_goals << ',' << m.away_goals << '\n';
  }
}

enum class Direction { scored, conceded };

constexpr std::string_view to_string(Direction d) { return d == Direction::scored ? "scored" : "conceded"; }

struct SeriesFilter {
  std::optional<Date> from;
  std::optional<Date> to;
  std::set<std::string> competitions;  // empty: every competition

  bool admits(const MatchRecord& m) const {
    if (from && m.date < *from) return false;
    if (to && m.date > *to) return false;
    return competitions.empty() || competitions.contains(m.competition);
  }
};

/// Goals scored or conceded by `team`, in chronological order.
inline GoalSeries team_series(const Dataset& data, const std::string& team, Direction direction,
                              const SeriesFilter& filter = {}) {
  if (!data.teams().contains(team)) throw Error(ErrorCode::unknown_team, "team '" + team + "' not in dataset");
  GoalSeries s;
  s.label = team + " (" + std::string(to_string(direction)) + ")";
  for (const auto& m : data.matches()) {
    if (!filter.admits(m)) continue;
    const bool home = m.home_team == team;
    if (!home && m.away_team != team) continue;
    const bool want_home_goals = (direction == Direction::scored) == home;
    s.counts.push_back(want_home_goals ? m.home_goals : m.away_goals);
  }
  if (s.counts.empty()) {
    throw Error(ErrorCode::empty_after_filter, "no matches for team '" + team + "' after filtering");
  }
  return s;
}

}  // namespace cmprank
