#pragma once

// Subcommand implementations behind the cmprank executable. Each command
// writes its result to `out`, diagnostics to `err`, and returns the process
// exit status.

#include <algorithm>
#include <array>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "json.hpp"

#include "cmprank/cmp.hpp"
#include "cmprank/data.hpp"
#include "cmprank/error.hpp"
#include "cmprank/fitting.hpp"
#include "cmprank/strength.hpp"

namespace cmprank {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitLoadFailure = 2,
  kExitEmptySelection = 3,
  kExitUnknownTeam = 4,
  kExitInsufficientMatches = 5,
  kExitNothingRankable = 6,
};

enum class OutputFormat { table, csv, json };

struct RunConfig {
  std::string input_path;
  std::optional<Date> from;
  std::optional<Date> to;
  std::set<std::string> competitions;
  int min_matches = 5;
  double rel_tol = 1e-12;
  OutputFormat format = OutputFormat::table;
  std::uint64_t seed = 0;

  SeriesFilter filter() const { return {from, to, competitions}; }
  SeriesControl series_control() const {
    SeriesControl c;
    c.rel_tol = rel_tol;
    return c;
  }
};

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string full_precision(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string two_decimals(double v) {
  if (!std::isfinite(v)) return full_precision(v);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// nlohmann serializes non-finite doubles as null; do it explicitly.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline void emit_json(std::ostream& out, const Json& j) { out << j.dump(2) << '\n'; }

inline std::optional<int> validate_config(const RunConfig& cfg, std::ostream& err) {
  if (cfg.min_matches < 2) {
    err << "error: --min-matches must be at least 2\n";
    return kExitUsage;
  }
  if (cfg.from && cfg.to && *cfg.from > *cfg.to) {
    err << "error: --from must not be after --to\n";
    return kExitUsage;
  }
  if (!(cfg.rel_tol > 0.0 && cfg.rel_tol < 1.0)) {
    err << "error: --rel-tol must lie in (0, 1)\n";
    return kExitUsage;
  }
  return std::nullopt;
}

// Loads the configured input, reporting problems on err. Returns nullopt on
// any fatal failure.
inline std::optional<Dataset> load_input(const RunConfig& cfg, std::ostream& err) {
  std::ifstream in(cfg.input_path, std::ios::binary);
  if (!in) {
    err << "error: cannot open input '" << cfg.input_path << "'\n";
    return std::nullopt;
  }
  try {
    auto loaded = load_matches(in);
    for (const auto& r : loaded.rejected) err << "warning: line " << r.line << " rejected: " << r.reason << '\n';
    if (loaded.duplicates_dropped > 0) {
      err << "warning: dropped " << loaded.duplicates_dropped << " duplicate row(s)\n";
    }
    for (auto line : loaded.implausible_lines) {
      err << "warning: line " << line << " has more than " << kImplausibleGoals << " goals\n";
    }
    if (loaded.dataset.empty()) {
      err << "error: input contains no matches\n";
      return std::nullopt;
    }
    return std::move(loaded.dataset);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return std::nullopt;
  }
}

inline std::size_t admitted_matches(const Dataset& data, const SeriesFilter& filter) {
  return static_cast<std::size_t>(
      std::count_if(data.matches().begin(), data.matches().end(), [&](const auto& m) { return filter.admits(m); }));
}

struct SeriesSummary {
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> variance;  // absent when n < 2
  std::optional<double> index;     // absent when degenerate
};

inline SeriesSummary summarize(const std::vector<std::int64_t>& counts) {
  SeriesSummary s;
  s.n = counts.size();
  if (s.n == 0) return s;
  if (s.n == 1) {
    s.mean = static_cast<double>(counts.front());
    return s;
  }
  const auto m = empirical_moments(GoalSeries{counts, {}});
  s.mean = m.mean;
  s.variance = m.variance;
  if (m.variance > 0.0) s.index = dispersion_index(m.mean, m.variance);
  return s;
}

inline std::string classification(const SeriesSummary& s) {
  return s.index ? std::string(to_string(classify_dispersion(*s.index))) : "degenerate";
}

inline Json summary_json(const SeriesSummary& s) {
  Json j;
  j["n"] = s.n;
  j["mean"] = number(s.mean);
  j["variance"] = s.variance ? number(*s.variance) : Json(nullptr);
  j["dispersion_index"] = s.index ? number(*s.index) : Json(nullptr);
  j["classification"] = classification(s);
  j["degenerate"] = !s.index.has_value();
  return j;
}

inline Json params_json(const FamilyParams& params) {
  Json j;
  if (const auto* c = std::get_if<CmpParams>(&params)) {
    j["lambda"] = number(c->lambda);
    j["nu"] = number(c->nu);
  } else if (const auto* g = std::get_if<GaussianParams>(&params)) {
    j["mean"] = number(g->mean);
    j["sd"] = number(g->sd);
  } else if (const auto* nb = std::get_if<NegBinParams>(&params)) {
    j["size"] = number(nb->size);
    j["prob"] = number(nb->prob);
  }
  return j;
}

inline std::pair<double, double> params_pair(const FamilyParams& params) {
  return std::visit(
      [](const auto& p) -> std::pair<double, double> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, CmpParams>) return {p.lambda, p.nu};
        if constexpr (std::is_same_v<T, GaussianParams>) return {p.mean, p.sd};
        if constexpr (std::is_same_v<T, NegBinParams>) return {p.size, p.prob};
      },
      params);
}

inline Json report_json(const FitReport& r) {
  Json j;
  j["family"] = std::string(to_string(r.family));
  j["params"] = params_json(r.params);
  j["log_likelihood"] = number(r.log_likelihood);
  j["aic"] = number(r.aic);
  j["n_params"] = r.n_params;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["status"] = std::string(to_string(r.status));
  j["diagnostic"] = r.diagnostic;
  return j;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// dispersion

inline int cmd_dispersion(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (auto bad = detail::validate_config(cfg, err)) return *bad;
  const auto data = detail::load_input(cfg, err);
  if (!data) return kExitLoadFailure;
  const auto filter = cfg.filter();
  if (detail::admitted_matches(*data, filter) == 0) {
    err << "error: no matches left after filtering\n";
    return kExitEmptySelection;
  }

  std::vector<std::int64_t> pooled;
  for (const auto& m : data->matches()) {
    if (!filter.admits(m)) continue;
    pooled.push_back(m.home_goals);
    pooled.push_back(m.away_goals);
  }
  const auto pooled_summary = detail::summarize(pooled);

  struct TeamRow {
    std::string team;
    Direction direction;
    detail::SeriesSummary summary;
  };
  std::vector<TeamRow> rows;
  for (const auto& team : data->teams()) {
    for (auto dir : {Direction::scored, Direction::conceded}) {
      try {
        rows.push_back({team, dir, detail::summarize(team_series(*data, team, dir, filter).counts)});
      } catch (const Error& e) {
        if (e.code() != ErrorCode::empty_after_filter) throw;
      }
    }
  }

  switch (cfg.format) {
    case OutputFormat::json: {
      Json j;
      j["pooled"] = detail::summary_json(pooled_summary);
      j["teams"] = Json::array();
      for (const auto& r : rows) {
        Json row;
        row["team"] = r.team;
        row["direction"] = std::string(to_string(r.direction));
        const auto summary = detail::summary_json(r.summary);
        for (const auto& [k, v] : summary.items()) row[k] = v;
        j["teams"].push_back(std::move(row));
      }
      detail::emit_json(out, j);
      break;
    }
    case OutputFormat::csv: {
      out << "scope,team,direction,n,mean,variance,dispersion_index,classification\n";
      auto line = [&](std::string_view scope, const std::string& team, std::string_view dir,
                      const detail::SeriesSummary& s) {
        out << scope << ',' << cmprank::detail::csv_field(team) << ',' << dir << ',' << s.n << ','
            << detail::full_precision(s.mean) << ',' << (s.variance ? detail::full_precision(*s.variance) : "")
            << ',' << (s.index ? detail::full_precision(*s.index) : "") << ',' << detail::classification(s) << '\n';
      };
      line("pooled", "", "", pooled_summary);
      for (const auto& r : rows) line("team", r.team, to_string(r.direction), r.summary);
      break;
    }
    case OutputFormat::table: {
      const auto& s = pooled_summary;
      out << "Pooled goal counts: n = " << s.n << ", mean = " << detail::two_decimals(s.mean)
          << ", variance = " << (s.variance ? detail::two_decimals(*s.variance) : "n/a")
          << ", DI = " << (s.index ? detail::two_decimals(*s.index) : "n/a") << " (" << detail::classification(s)
          << ")\n\n";
      out << std::left << std::setw(32) << "Team" << std::setw(10) << "Direction" << std::right << std::setw(6) << "n"
          << std::setw(10) << "Mean" << std::setw(10) << "Variance" << std::setw(8) << "DI" << "  Classification\n";
      for (const auto& r : rows) {
        out << std::left << std::setw(32) << r.team << std::setw(10) << to_string(r.direction) << std::right
            << std::setw(6) << r.summary.n << std::setw(10) << detail::two_decimals(r.summary.mean) << std::setw(10)
            << (r.summary.variance ? detail::two_decimals(*r.summary.variance) : "n/a") << std::setw(8)
            << (r.summary.index ? detail::two_decimals(*r.summary.index) : "n/a") << "  "
            << detail::classification(r.summary) << '\n';
      }
      break;
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fit

struct OverlayPoint {
  std::int64_t x = 0;
  double empirical_freq = 0.0;
  std::optional<double> fitted_pmf;
};

/// Histogram of the series against the fitted CMP pmf over the observed range.
inline std::vector<OverlayPoint> cmp_overlay(const GoalSeries& series, const FitReport& cmp_fit,
                                             const SeriesControl& ctrl) {
  const auto [lo, hi] = std::minmax_element(series.counts.begin(), series.counts.end());
  std::map<std::int64_t, std::size_t> freq;
  for (auto x : series.counts) ++freq[x];
  std::optional<CmpDistribution> dist;
  if (cmp_fit.status != FitStatus::failed) dist.emplace(std::get<CmpParams>(cmp_fit.params), ctrl);
  std::vector<OverlayPoint> points;
  const auto n = static_cast<double>(series.counts.size());
  for (std::int64_t x = *lo; x <= *hi; ++x) {
    OverlayPoint p;
    p.x = x;
    p.empirical_freq = freq.contains(x) ? static_cast<double>(freq[x]) / n : 0.0;
    if (dist) p.fitted_pmf = dist->pmf(x);
    points.push_back(p);
  }
  return points;
}

inline int cmd_fit(const RunConfig& cfg, const std::string& team, Direction direction, std::ostream& out,
                   std::ostream& err) {
  if (auto bad = detail::validate_config(cfg, err)) return *bad;
  const auto data = detail::load_input(cfg, err);
  if (!data) return kExitLoadFailure;
  if (!data->teams().contains(team)) {
    err << "error: unknown team '" << team << "'\n";
    return kExitUnknownTeam;
  }
  GoalSeries series;
  try {
    series = team_series(*data, team, direction, cfg.filter());
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitEmptySelection;
  }
  if (series.counts.size() < static_cast<std::size_t>(cfg.min_matches)) {
    err << "error: team '" << team << "' has " << series.counts.size() << " matches, need at least "
        << cfg.min_matches << '\n';
    return kExitInsufficientMatches;
  }

  const auto ctrl = cfg.series_control();
  const auto moments = empirical_moments(series);
  const auto reports = compare_models(series, ctrl);
  const auto cmp_it =
      std::find_if(reports.begin(), reports.end(), [](const FitReport& r) { return r.family == Family::cmp; });
  const auto overlay = cmp_overlay(series, *cmp_it, ctrl);

  switch (cfg.format) {
    case OutputFormat::json: {
      Json j;
      j["team"] = team;
      j["direction"] = std::string(to_string(direction));
      j["n"] = series.counts.size();
      j["mean"] = detail::number(moments.mean);
      j["variance"] = detail::number(moments.variance);
      j["models"] = Json::array();
      for (const auto& r : reports) j["models"].push_back(detail::report_json(r));
      j["overlay"] = Json::array();
      for (const auto& p : overlay) {
        Json row;
        row["x"] = p.x;
        row["empirical_freq"] = detail::number(p.empirical_freq);
        row["fitted_pmf"] = p.fitted_pmf ? detail::number(*p.fitted_pmf) : Json(nullptr);
        j["overlay"].push_back(std::move(row));
      }
      detail::emit_json(out, j);
      break;
    }
    case OutputFormat::csv: {
      // param_a/param_b: lambda/nu (CMP), mean/sd (Gaussian), size/prob (NegativeBinomial)
      out << "family,param_a,param_b,log_likelihood,aic,n_params,converged,iterations,status\n";
      for (const auto& r : reports) {
        const auto [a, b] = detail::params_pair(r.params);
        out << to_string(r.family) << ',' << detail::full_precision(a) << ',' << detail::full_precision(b) << ','
            << detail::full_precision(r.log_likelihood) << ',' << detail::full_precision(r.aic) << ',' << r.n_params
            << ',' << (r.converged ? "true" : "false") << ',' << r.iterations << ',' << to_string(r.status) << '\n';
      }
      out << "\nx,empirical_freq,fitted_pmf\n";
      for (const auto& p : overlay) {
        out << p.x << ',' << detail::full_precision(p.empirical_freq) << ','
            << (p.fitted_pmf ? detail::full_precision(*p.fitted_pmf) : "") << '\n';
      }
      break;
    }
    case OutputFormat::table: {
      out << team << " (" << to_string(direction) << "): n = " << series.counts.size()
          << ", mean = " << detail::two_decimals(moments.mean)
          << ", variance = " << detail::two_decimals(moments.variance) << "\n\n";
      out << std::left << std::setw(20) << "Distribution" << std::right << std::setw(16) << "Log-likelihood"
          << std::setw(10) << "AIC" << "  Parameters\n";
      for (const auto& r : reports) {
        const auto [a, b] = detail::params_pair(r.params);
        out << std::left << std::setw(20) << to_string(r.family) << std::right << std::setw(16)
            << detail::two_decimals(r.log_likelihood) << std::setw(10) << detail::two_decimals(r.aic) << "  ("
            << detail::two_decimals(a) << ", " << detail::two_decimals(b) << ")";
        if (r.status != FitStatus::ok) out << "  [" << to_string(r.status) << "] " << r.diagnostic;
        out << '\n';
      }
      out << "\n" << std::setw(6) << "x" << std::setw(12) << "Empirical" << std::setw(12) << "CMP pmf" << '\n';
      for (const auto& p : overlay) {
        out << std::setw(6) << p.x << std::setw(12) << std::fixed << std::setprecision(4) << p.empirical_freq
            << std::setw(12) << (p.fitted_pmf ? *p.fitted_pmf : std::nan("")) << '\n';
      }
      out.unsetf(std::ios::floatfield);
      out << std::setprecision(6);
      break;
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// rank

struct Exclusion {
  std::string team;
  std::string reason;
};

struct RankOutcome {
  RankingTable table;
  std::vector<Exclusion> excluded;
};

/// Fits every team in the selection, in parallel, and ranks the ones that
/// pass. The result does not depend on thread scheduling.
inline RankOutcome rank_dataset(const Dataset& data, const SeriesFilter& filter, std::size_t min_matches,
                                const SeriesControl& ctrl, unsigned threads = std::thread::hardware_concurrency()) {
  const std::vector<std::string> teams(data.teams().begin(), data.teams().end());
  std::vector<std::variant<std::monostate, TeamStrength, Exclusion>> slots(teams.size());

  auto work = [&](std::size_t i) {
    const auto& team = teams[i];
    try {
      const auto scored = team_series(data, team, Direction::scored, filter);
      const auto conceded = team_series(data, team, Direction::conceded, filter);
      if (scored.counts.size() < min_matches) {
        slots[i] = Exclusion{team, "insufficient matches (" + std::to_string(scored.counts.size()) + " < " +
                                       std::to_string(min_matches) + ")"};
        return;
      }
      slots[i] = assess_team(team, scored, conceded, ctrl);
    } catch (const Error& e) {
      slots[i] = Exclusion{team, e.what()};
    }
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < teams.size(); i = next++) work(i);
  };
  const auto n_threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(teams.size(), 1));
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();

  RankOutcome outcome;
  std::vector<TeamStrength> ranked;
  for (auto& slot : slots) {
    if (auto* s = std::get_if<TeamStrength>(&slot)) ranked.push_back(std::move(*s));
    if (auto* x = std::get_if<Exclusion>(&slot)) outcome.excluded.push_back(std::move(*x));
  }
  outcome.table = rank_teams(std::move(ranked));
  return outcome;
}

inline int cmd_rank(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (auto bad = detail::validate_config(cfg, err)) return *bad;
  const auto data = detail::load_input(cfg, err);
  if (!data) return kExitLoadFailure;
  const auto filter = cfg.filter();
  if (detail::admitted_matches(*data, filter) == 0) {
    err << "error: no matches left after filtering\n";
    return kExitEmptySelection;
  }

  const auto outcome =
      rank_dataset(*data, filter, static_cast<std::size_t>(cfg.min_matches), cfg.series_control());
  const auto& rows = outcome.table.rows;

  switch (cfg.format) {
    case OutputFormat::json: {
      Json j;
      j["rankings"] = Json::array();
      for (const auto& r : rows) {
        const auto& s = r.strength;
        const auto& a = std::get<CmpParams>(s.attack_fit.params);
        const auto& d = std::get<CmpParams>(s.defense_fit.params);
        Json row;
        row["rank"] = r.rank;
        row["team"] = s.team;
        row["matches"] = s.matches_used;
        row["avg_scored"] = detail::number(r.avg_scored);
        row["avg_conceded"] = detail::number(r.avg_conceded);
        row["attack_strength"] = detail::number(s.attack);
        row["defense_strength"] = detail::number(s.defense);
        row["strength"] = detail::number(s.overall);
        row["lambda_a"] = detail::number(a.lambda);
        row["nu_a"] = detail::number(a.nu);
        row["lambda_d"] = detail::number(d.lambda);
        row["nu_d"] = detail::number(d.nu);
        j["rankings"].push_back(std::move(row));
      }
      j["excluded"] = Json::array();
      for (const auto& x : outcome.excluded) j["excluded"].push_back(Json{{"team", x.team}, {"reason", x.reason}});
      detail::emit_json(out, j);
      break;
    }
    case OutputFormat::csv: {
      out << "rank,team,matches,avg_scored,avg_conceded,attack_strength,defense_strength,strength,lambda_a,nu_a,"
             "lambda_d,nu_d\n";
      for (const auto& r : rows) {
        const auto& s = r.strength;
        const auto& a = std::get<CmpParams>(s.attack_fit.params);
        const auto& d = std::get<CmpParams>(s.defense_fit.params);
        out << r.rank << ',' << cmprank::detail::csv_field(s.team) << ',' << s.matches_used << ','
            << detail::full_precision(r.avg_scored) << ',' << detail::full_precision(r.avg_conceded) << ','
            << detail::full_precision(s.attack) << ',' << detail::full_precision(s.defense) << ','
            << detail::full_precision(s.overall) << ',' << detail::full_precision(a.lambda) << ','
            << detail::full_precision(a.nu) << ',' << detail::full_precision(d.lambda) << ','
            << detail::full_precision(d.nu) << '\n';
      }
      if (!outcome.excluded.empty()) {
        out << "\nexcluded_team,reason\n";
        for (const auto& x : outcome.excluded) {
          out << cmprank::detail::csv_field(x.team) << ',' << cmprank::detail::csv_field(x.reason) << '\n';
        }
      }
      break;
    }
    case OutputFormat::table: {
      out << std::right << std::setw(4) << "#" << "  " << std::left << std::setw(32) << "Team" << std::right
          << std::setw(12) << "Avg. scored" << std::setw(15) << "Avg. conceded" << std::setw(17) << "Attack strength"
          << std::setw(18) << "Defense strength" << std::setw(10) << "Strength" << '\n';
      for (const auto& r : rows) {
        const auto& s = r.strength;
        out << std::right << std::setw(4) << r.rank << "  " << std::left << std::setw(32) << s.team << std::right
            << std::setw(12) << detail::two_decimals(r.avg_scored) << std::setw(15)
            << detail::two_decimals(r.avg_conceded) << std::setw(17) << detail::two_decimals(s.attack)
            << std::setw(18) << detail::two_decimals(s.defense) << std::setw(10) << detail::two_decimals(s.overall)
            << '\n';
      }
      if (!outcome.excluded.empty()) {
        out << "\nExcluded:\n";
        for (const auto& x : outcome.excluded) out << "  " << x.team << ": " << x.reason << '\n';
      }
      break;
    }
  }
  if (rows.empty()) {
    err << "error: no team could be ranked\n";
    return kExitNothingRankable;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulationCell {
  double lambda = 0.0;
  double nu = 0.0;
  double emp_mean = 0.0;
};

/// Empirical CMP means over a lambda x nu grid (lambda-major order). Each cell
/// is seeded from (seed, cell index), so cells are independent of each other.
inline std::vector<SimulationCell> simulate_grid(const std::vector<double>& lambda_grid,
                                                 const std::vector<double>& nu_grid, std::size_t n_per_cell,
                                                 std::uint64_t seed, const SeriesControl& ctrl = {}) {
  if (lambda_grid.empty() || nu_grid.empty()) throw Error(ErrorCode::invalid_grid, "grids must be non-empty");
  if (n_per_cell == 0) throw Error(ErrorCode::invalid_grid, "n_per_cell must be at least 1");
  for (double l : lambda_grid) {
    if (!(l > 0.0) || !std::isfinite(l)) throw Error(ErrorCode::invalid_grid, "lambda grid values must be positive");
  }
  for (double v : nu_grid) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::invalid_grid, "nu grid values must be non-negative");
    if (v == 0.0 && *std::max_element(lambda_grid.begin(), lambda_grid.end()) >= 1.0) {
      throw Error(ErrorCode::invalid_grid, "nu = 0 cells require every lambda < 1");
    }
  }
  std::vector<SimulationCell> cells;
  std::uint64_t index = 0;
  for (double l : lambda_grid) {
    for (double v : nu_grid) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(index)};
      std::array<std::uint32_t, 2> words{};
      seq.generate(words.begin(), words.end());
      const std::uint64_t cell_seed = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
      const auto draws = sample({l, v}, n_per_cell, cell_seed, ctrl);
      std::int64_t total = 0;
      for (auto x : draws) total += x;
      cells.push_back({l, v, static_cast<double>(total) / static_cast<double>(n_per_cell)});
      ++index;
    }
  }
  return cells;
}

inline int cmd_simulate(const RunConfig& cfg, const std::vector<double>& lambda_grid,
                        const std::vector<double>& nu_grid, std::size_t n_per_cell, std::ostream& out,
                        std::ostream& err) {
  std::vector<SimulationCell> cells;
  try {
    cells = simulate_grid(lambda_grid, nu_grid, n_per_cell, cfg.seed, cfg.series_control());
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  switch (cfg.format) {
    case OutputFormat::json: {
      Json j;
      j["cells"] = Json::array();
      for (const auto& c : cells) {
        j["cells"].push_back(Json{{"lambda", c.lambda}, {"nu", c.nu}, {"emp_mean", c.emp_mean}});
      }
      detail::emit_json(out, j);
      break;
    }
    case OutputFormat::csv:
      out << "lambda,nu,emp_mean\n";
      for (const auto& c : cells) {
        out << detail::full_precision(c.lambda) << ',' << detail::full_precision(c.nu) << ','
            << detail::full_precision(c.emp_mean) << '\n';
      }
      break;
    case OutputFormat::table:
      out << std::setw(12) << "lambda" << std::setw(10) << "nu" << std::setw(14) << "emp_mean" << '\n';
      for (const auto& c : cells) {
        out << std::setw(12) << detail::full_precision(c.lambda) << std::setw(10) << detail::full_precision(c.nu)
            << std::setw(14) << detail::two_decimals(c.emp_mean) << '\n';
      }
      break;
  }
  return kExitOk;
}

}  // namespace cmprank
