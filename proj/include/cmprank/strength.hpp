#pragma once

// Team strengths from CMP fits on scored (attack) and conceded (defense) goals.
//
//   attack  s_a = log(lambda_a) / nu_a
//   defense s_d = nu_d / log(lambda_d)
//   overall s   = s_a * s_d

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cmprank/cmp.hpp"
#include "cmprank/error.hpp"
#include "cmprank/fitting.hpp"

namespace cmprank {

namespace detail {

inline void require_lambda_above_one(const CmpParams& p, std::string_view what, std::string_view team) {
  if (!(p.lambda > 1.0)) {
    std::ostringstream os;
    os << what << " needs lambda > 1, got " << p.lambda;
    if (!team.empty()) os << " for team '" << team << "'";
    throw Error(ErrorCode::lambda_at_most_one, os.str());
  }
}

}  // namespace detail

inline double defense_strength(const CmpParams& conceded, std::string_view team = {}) {
  detail::require_lambda_above_one(conceded, "defense strength", team);
  return conceded.nu / std::log(conceded.lambda);
}

inline double attack_strength(const CmpParams& scored, std::string_view team = {}) {
  detail::require_lambda_above_one(scored, "attack strength", team);
  if (!(scored.nu > 0.0)) {
    std::ostringstream os;
    os << "attack strength needs nu > 0";
    if (!team.empty()) os << " for team '" << team << "'";
    throw Error(ErrorCode::nu_zero, os.str());
  }
  return std::log(scored.lambda) / scored.nu;
}

inline double overall_strength(double attack, double defense) {
  if (!(std::isfinite(attack) && std::isfinite(defense) && attack > 0.0 && defense > 0.0)) {
    std::ostringstream os;
    os << "strength components must be finite and positive, got attack " << attack << ", defense " << defense;
    throw Error(ErrorCode::invalid_argument, os.str());
  }
  return attack * defense;
}

struct TeamStrength {
  std::string team;
  double attack = 0.0;
  double defense = 0.0;
  double overall = 0.0;
  FitReport attack_fit;
  FitReport defense_fit;
  std::size_t matches_used = 0;
  double avg_scored = 0.0;    // raw sample mean, not the fitted mean
  double avg_conceded = 0.0;
};

/// Fits CMP to both directions and derives the three strengths. Throws when
/// either fit fails or lands at lambda <= 1.
inline TeamStrength assess_team(const std::string& team, const GoalSeries& scored, const GoalSeries& conceded,
                                const SeriesControl& ctrl = {}) {
  if (scored.counts.size() != conceded.counts.size()) {
    throw Error(ErrorCode::invalid_argument, "scored and conceded series for '" + team + "' differ in length");
  }
  TeamStrength ts;
  ts.team = team;
  ts.matches_used = scored.counts.size();
  ts.avg_scored = empirical_moments(scored).mean;
  ts.avg_conceded = empirical_moments(conceded).mean;
  ts.attack_fit = fit_cmp(scored, ctrl);
  ts.defense_fit = fit_cmp(conceded, ctrl);
  for (const auto* fit : {&ts.attack_fit, &ts.defense_fit}) {
    if (fit->status == FitStatus::failed) {
      throw Error(ErrorCode::series_not_converged, "CMP fit failed for '" + team + "': " + fit->diagnostic);
    }
  }
  ts.attack = attack_strength(std::get<CmpParams>(ts.attack_fit.params), team);
  ts.defense = defense_strength(std::get<CmpParams>(ts.defense_fit.params), team);
  ts.overall = overall_strength(ts.attack, ts.defense);
  return ts;
}

struct RankingRow {
  int rank = 0;
  TeamStrength strength;
  double avg_scored = 0.0;
  double avg_conceded = 0.0;
};

struct RankingTable {
  std::vector<RankingRow> rows;
};

/// Sorts by overall strength, descending. Ties go to the higher defense, then
/// to the alphabetically first team name. Ranks are 1..n in that order.
inline RankingTable rank_teams(std::vector<TeamStrength> strengths) {
  std::sort(strengths.begin(), strengths.end(), [](const TeamStrength& a, const TeamStrength& b) {
    if (a.overall != b.overall) return a.overall > b.overall;
    if (a.defense != b.defense) return a.defense > b.defense;
    return a.team < b.team;
  });
  RankingTable table;
  table.rows.reserve(strengths.size());
  int rank = 0;
  for (auto& s : strengths) {
    RankingRow row;
    row.rank = ++rank;
    row.avg_scored = s.avg_scored;
    row.avg_conceded = s.avg_conceded;
    row.strength = std::move(s);
    table.rows.push_back(std::move(row));
  }
  return table;
}

struct StrengthSlopes {
  double d_lambda_a = 0.0;  // d s / d lambda_a
  double d_lambda_d = 0.0;  // d s / d lambda_d
};

/// Central finite differences of the overall strength with respect to the two
/// location parameters.
inline StrengthSlopes strength_sensitivity(const CmpParams& scored, const CmpParams& conceded, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::invalid_argument, "delta must be positive");
  if (!(scored.lambda - delta > 1.0) || !(conceded.lambda - delta > 1.0)) {
    throw Error(ErrorCode::lambda_at_most_one, "lambda - delta must stay above 1 for the finite difference");
  }
  auto overall = [](const CmpParams& a, const CmpParams& d) {
    return overall_strength(attack_strength(a), defense_strength(d));
  };
  auto shifted = [](CmpParams p, double by) {
    p.lambda += by;
    return p;
  };
  StrengthSlopes out;
  out.d_lambda_a =
      (overall(shifted(scored, delta), conceded) - overall(shifted(scored, -delta), conceded)) / (2.0 * delta);
  out.d_lambda_d =
      (overall(scored, shifted(conceded, delta)) - overall(scored, shifted(conceded, -delta))) / (2.0 * delta);
  return out;
}

}  // namespace cmprank
