// cmprank: CMP-based goal modelling and team ranking from match results.

#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cmprank/commands.hpp"

namespace {

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw CLI::ValidationError("grid", "not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::optional<cmprank::Date> parse_date_flag(const std::string& text, const char* flag) {
  if (text.empty()) return std::nullopt;
  auto d = cmprank::parse_date(text);
  if (!d) throw CLI::ValidationError(flag, "expected YYYY-MM-DD, got '" + text + "'");
  return d;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conway-Maxwell-Poisson goal models and team strength rankings"};
  app.require_subcommand(1);

  cmprank::RunConfig cfg;
  std::string from;
  std::string to;
  std::vector<std::string> competitions;
  std::string team;
  cmprank::Direction direction = cmprank::Direction::scored;
  std::string direction_text = "scored";
  std::string format_text = "table";
  std::string lambda_grid = "0.5,1,2,4,8,16,32,64,128,256";
  std::string nu_grid = "0.5,0.75,1,1.25,1.5,1.75,2,2.5,3,4";
  std::size_t n_per_cell = 10000;

  const std::map<std::string, cmprank::OutputFormat> formats{
      {"table", cmprank::OutputFormat::table}, {"csv", cmprank::OutputFormat::csv}, {"json", cmprank::OutputFormat::json}};
  const std::map<std::string, cmprank::Direction> directions{{"scored", cmprank::Direction::scored},
                                                              {"conceded", cmprank::Direction::conceded}};

  auto add_data_flags = [&](CLI::App* sub) {
    sub->add_option("--input", cfg.input_path, "Match results CSV")->required();
    sub->add_option("--from", from, "First date of the season window (YYYY-MM-DD)");
    sub->add_option("--to", to, "Last date of the season window (YYYY-MM-DD)");
    sub->add_option("--competition", competitions, "Restrict to a competition (repeatable)");
    sub->add_option("--min-matches", cfg.min_matches, "Minimum matches per team")->capture_default_str();
    sub->add_option("--rel-tol", cfg.rel_tol, "Relative truncation tolerance of the CMP series")
        ->capture_default_str();
  };
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", format_text, "Output format: table, csv or json")
        ->check(CLI::IsMember(formats, CLI::ignore_case))
        ->capture_default_str();
  };

  auto* dispersion = app.add_subcommand("dispersion", "Pooled and per-team dispersion index");
  add_data_flags(dispersion);
  add_format(dispersion);

  auto* fit = app.add_subcommand("fit", "Compare CMP, Gaussian and Negative Binomial fits for one team");
  add_data_flags(fit);
  add_format(fit);
  fit->add_option("--team", team, "Team name")->required();
  fit->add_option("--direction", direction_text, "scored or conceded")
      ->check(CLI::IsMember(directions, CLI::ignore_case))
      ->capture_default_str();

  auto* rank = app.add_subcommand("rank", "Rank teams by overall CMP strength");
  add_data_flags(rank);
  add_format(rank);

  auto* simulate = app.add_subcommand("simulate", "Empirical CMP means over a lambda x nu grid");
  add_format(simulate);
  simulate->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  simulate->add_option("--lambda-grid", lambda_grid, "Comma-separated lambda values")->capture_default_str();
  simulate->add_option("--nu-grid", nu_grid, "Comma-separated nu values")->capture_default_str();
  simulate->add_option("--n-per-cell", n_per_cell, "Draws per grid cell")->capture_default_str();
  simulate->add_option("--rel-tol", cfg.rel_tol, "Relative truncation tolerance of the CMP series")
      ->capture_default_str();

  std::vector<double> lambdas;
  std::vector<double> nus;
  try {
    app.parse(argc, argv);
    cfg.from = parse_date_flag(from, "--from");
    cfg.to = parse_date_flag(to, "--to");
    cfg.competitions.insert(competitions.begin(), competitions.end());
    direction = directions.at(CLI::detail::to_lower(direction_text));
    cfg.format = formats.at(CLI::detail::to_lower(format_text));
    if (simulate->parsed()) {
      lambdas = parse_grid(lambda_grid);
      nus = parse_grid(nu_grid);
    }
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cmprank::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cmprank::kExitUsage;
  }

  if (dispersion->parsed()) return cmprank::cmd_dispersion(cfg, std::cout, std::cerr);
  if (fit->parsed()) return cmprank::cmd_fit(cfg, team, direction, std::cout, std::cerr);
  if (rank->parsed()) return cmprank::cmd_rank(cfg, std::cout, std::cerr);
  return cmprank::cmd_simulate(cfg, lambdas, nus, n_per_cell, std::cout, std::cerr);
}
