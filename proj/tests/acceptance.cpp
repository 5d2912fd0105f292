// End-to-end acceptance checks. Prints one [PASS]/[FAIL] line per criterion
// and exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cmprank/commands.hpp"
#include "oracles.hpp"

using namespace cmprank;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

int failures = 0;

void criterion(int id, const std::string& name, double time_limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.fail(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (time_limit_s > 0 && secs > time_limit_s) {
    std::ostringstream os;
    os << "runtime " << secs << " s over limit " << time_limit_s << " s";
    o.fail(os.str());
  }
  if (!o.pass) ++failures;
  char line[256];
  std::snprintf(line, sizeof line, "[%s] %2d %s (%.2f s)", o.pass ? "PASS" : "FAIL", id, name.c_str(), secs);
  std::cout << line;
  if (!o.detail.empty()) std::cout << ": " << o.detail;
  std::cout << std::endl;
}

std::string str(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Outcome special_cases() {
  Outcome o;
  double worst = 0;
  for (double lambda : {0.5, 2.0, 10.0, 50.0}) {
    const CmpDistribution d({lambda, 1.0});
    for (std::int64_t x = 0; x <= 100; ++x) worst = std::max(worst, std::abs(d.log_pmf(x) - oracle::poisson_log_pmf(x, lambda)));
  }
  for (double q : {0.1, 0.5, 0.9}) {
    const CmpDistribution d({q, 0.0});
    for (std::int64_t x = 0; x <= 200; ++x) worst = std::max(worst, std::abs(d.log_pmf(x) - oracle::geometric_log_pmf(x, q)));
  }
  if (worst > 1e-10) o.fail("max log-pmf error " + str(worst));
  if (o.pass) o.detail = "max log-pmf error " + str(worst);
  return o;
}

Outcome normalization() {
  Outcome o;
  double worst = 0;
  for (double lambda : {0.5, 2.0, 10.0, 50.0, 286.46}) {
    for (double nu : {0.3, 1.0, 1.64, 2.5}) {
      const CmpDistribution d({lambda, nu});
      double total = 0;
      for (auto x = d.support_first(); x <= d.support_last(); ++x) total += d.pmf(x);
      worst = std::max(worst, std::abs(total - 1.0));
    }
  }
  if (worst > 1e-8) o.fail("max |sum - 1| " + str(worst));
  if (o.pass) o.detail = "max |sum - 1| " + str(worst);
  return o;
}

Outcome mle_vs_grid() {
  Outcome o;
  const double means[] = {3, 8, 15, 22, 28, 31, 26, 12, 5, 35};
  const double nus[] = {0.6, 0.8, 1.0, 1.2, 1.5, 1.64, 2.0, 0.9, 1.3, 1.1};
  const std::size_t sizes[] = {50, 80, 120, 200, 200, 150, 100, 60, 180, 200};
  oracle::CmpGridSearch grid;
  double worst_gap = INFINITY;
  for (int i = 0; i < 10; ++i) {
    const CmpParams p{lambda_for_mean(means[i], nus[i]), nus[i]};
    std::vector<std::int64_t> counts;
    for (std::uint64_t seed = 100 + i;; seed += 1000) {
      counts = sample(p, sizes[i], seed);
      if (*std::max_element(counts.begin(), counts.end()) <= 60) break;
    }
    const double fitted = fit_cmp({counts, "s"}).log_likelihood;
    const double best = grid.search(counts).log_likelihood;
    worst_gap = std::min(worst_gap, fitted - best);
    if (fitted < best - 1e-4) o.fail("series " + std::to_string(i) + ": fit " + str(fitted) + " < grid " + str(best));
  }
  if (o.pass) o.detail = "min (fit - grid) " + str(worst_gap);
  return o;
}

Outcome recovery() {
  Outcome o;
  std::ostringstream summary;
  for (double nu : {0.7, 1.0, 1.5}) {
    const CmpParams truth{lambda_for_mean(28.0, nu), nu};
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto fit = fit_cmp({sample(truth, 5000, seed * 7919 + static_cast<std::uint64_t>(nu * 100)), "r"});
      if (std::abs(std::get<CmpParams>(fit.params).nu - nu) < 0.15) ++hits;
    }
    summary << "nu=" << nu << ": " << hits << "/20  ";
    if (hits < 18) o.fail("nu=" + str(nu) + " recovered in " + std::to_string(hits) + "/20");
  }
  if (o.pass) o.detail = summary.str();
  return o;
}

Outcome aic_identity() {
  Outcome o;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> mean(2.0, 35.0);
  std::uniform_real_distribution<double> nu(0.4, 2.5);
  std::uniform_int_distribution<int> n(20, 300);
  for (int i = 0; i < 50; ++i) {
    const double v = nu(rng);
    const CmpParams p{lambda_for_mean(mean(rng), v), v};
    const auto reports = compare_models({sample(p, static_cast<std::size_t>(n(rng)), rng()), "a"});
    for (const auto& r : reports) {
      if (r.aic != 4.0 - 2.0 * r.log_likelihood) o.fail("AIC identity broken on series " + std::to_string(i));
      if (r.n_params != 2) o.fail("n_params != 2");
    }
    auto by_ll = reports;
    std::stable_sort(by_ll.begin(), by_ll.end(),
                     [](const FitReport& a, const FitReport& b) { return a.log_likelihood > b.log_likelihood; });
    for (std::size_t k = 0; k < reports.size(); ++k) {
      if (reports[k].log_likelihood != by_ll[k].log_likelihood) o.fail("order differs on series " + std::to_string(i));
    }
  }
  // Published table: log-likelihood and AIC rows.
  const std::pair<double, double> table[] = {{-127.36, 258.72}, {-127.39, 258.78}, {-127.66, 259.32}};
  for (auto [ll, aic] : table) {
    if (std::abs(aic_from(ll) - aic) > 1e-9) o.fail("published AIC " + str(aic) + " != 4 - 2*" + str(ll));
  }
  return o;
}

Outcome published_strengths() {
  Outcome o;
  struct Row {
    const char* team;
    double attack, defense, overall;
  };
  const Row rows[] = {{"row 1", 3.49, 3.16, 11.00}, {"row 2", 3.57, 3.07, 10.96}, {"row 3", 3.39, 3.21, 10.89},
                      {"row 4", 3.47, 3.12, 10.85}, {"row 5", 3.48, 3.11, 10.83}, {"row 6", 3.54, 3.05, 10.80},
                      {"row 7", 3.38, 3.15, 10.63}, {"row 8", 3.39, 3.13, 10.61}, {"row 9", 3.39, 3.12, 10.59},
                      {"row 10", 3.48, 3.05, 10.58}};
  std::ostringstream bad;
  for (const auto& r : rows) {
    const double diff = overall_strength(r.attack, r.defense) - r.overall;
    if (std::abs(diff) > 0.02) {
      bad << r.team << " " << r.attack << "x" << r.defense << "=" << str(r.attack * r.defense) << " vs " << r.overall
          << "; ";
      o.pass = false;
    }
  }
  if (!o.pass) o.detail = bad.str();
  return o;
}

Outcome dispersion_classification() {
  Outcome o;
  const double di = dispersion_index(27.9, 31.5);
  if (std::abs(di - 0.8857) > 5e-5) o.fail("DI " + str(di));
  if (detail::two_decimals(di) != "0.89") o.fail("displayed as " + detail::two_decimals(di));
  if (classify_dispersion(di) != Dispersion::over) o.fail("not classified as over-dispersion");
  if (o.pass) o.detail = "DI " + str(di) + " shown as " + detail::two_decimals(di);
  return o;
}

Outcome simulation_shape() {
  Outcome o;
  const std::vector<double> lambdas{0.5, 1, 2, 4, 8, 16, 32, 64, 128, 256};
  const std::vector<double> nus{0.5, 0.75, 1, 1.25, 1.5, 1.75, 2, 2.5, 3, 4};
  constexpr std::size_t n = 100000;
  RunConfig cfg;
  cfg.format = OutputFormat::csv;
  std::ostringstream out, err;
  if (cmd_simulate(cfg, lambdas, nus, n, out, err) != kExitOk) {
    o.fail("simulate failed: " + err.str());
    return o;
  }
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> emp(nus.size());
  double worst_z = 0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    for (std::size_t k = 0; k < nus.size(); ++k) {
      std::getline(in, line);
      double l = 0, v = 0, m = 0;
      std::sscanf(line.c_str(), "%lf,%lf,%lf", &l, &v, &m);
      if (l != lambdas[i] || v != nus[k]) o.fail("unexpected cell order at " + line);
      emp[k].push_back(m);
      const auto truth = mean_and_variance({l, v});
      const double z = std::abs(m - truth.mean) / std::sqrt(truth.variance / n);
      worst_z = std::max(worst_z, z);
      if (z > 3.0) o.fail("cell (" + str(l) + ", " + str(v) + ") is " + str(z) + " SE from the mean");
    }
  }
  for (std::size_t k = 0; k < nus.size(); ++k) {
    for (std::size_t i = 1; i < emp[k].size(); ++i) {
      if (!(emp[k][i] > emp[k][i - 1])) o.fail("not increasing in lambda at nu=" + str(nus[k]));
    }
  }
  if (o.pass) o.detail = "100 cells, max |z| " + str(worst_z);
  return o;
}

Outcome sensitivity() {
  Outcome o;
  double worst = 0;
  for (double la : {5.0, 30.0, 300.0}) {
    for (double ld : {5.0, 30.0, 300.0}) {
      const CmpParams a{la, 1.3};
      const CmpParams d{ld, 1.6};
      const auto s = strength_sensitivity(a, d, 1e-3);
      const double closed = d.nu / (a.nu * std::log(d.lambda)) / a.lambda;
      const double rel = std::abs(s.d_lambda_a - closed) / closed;
      worst = std::max(worst, rel);
      if (rel > 1e-4) o.fail("relative error " + str(rel) + " at (" + str(la) + ", " + str(ld) + ")");
      if (!(s.d_lambda_d < 0)) o.fail("d s / d lambda_d not negative at (" + str(la) + ", " + str(ld) + ")");
    }
  }
  if (o.pass) o.detail = "max relative error " + str(worst);
  return o;
}

Outcome determinism() {
  Outcome o;
  auto rank_json = [](const std::string& path) {
    RunConfig cfg;
    cfg.input_path = path;
    cfg.format = OutputFormat::json;
    std::ostringstream out, err;
    cmd_rank(cfg, out, err);
    return out.str();
  };
  const std::string reference = rank_json(CMPRANK_FIXTURE);
  if (reference.find("\"rankings\"") == std::string::npos) o.fail("no rankings emitted");
  if (rank_json(CMPRANK_FIXTURE) != reference) o.fail("second run differs");

  std::ifstream in(CMPRANK_FIXTURE);
  std::string header, line;
  std::getline(in, header);
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  const auto path = std::filesystem::temp_directory_path() / "cmprank_acceptance_permuted.csv";
  std::mt19937 rng(10);
  for (int i = 0; i < 5; ++i) {
    std::shuffle(rows.begin(), rows.end(), rng);
    {
      std::ofstream out(path);
      out << header << '\n';
      for (const auto& r : rows) out << r << '\n';
    }
    if (rank_json(path.string()) != reference) o.fail("permutation " + std::to_string(i) + " differs");
  }
  std::filesystem::remove(path);
  if (o.pass) o.detail = "2 runs + 5 row permutations identical";
  return o;
}

}  // namespace

int main() {
  criterion(1, "special-case exactness (Poisson, geometric)", 1.0, special_cases);
  criterion(2, "normalization on the parameter grid", 5.0, normalization);
  criterion(3, "MLE at least grid-search optimum - 1e-4", 120.0, mle_vs_grid);
  criterion(4, "parametric recovery of nu", 300.0, recovery);
  criterion(5, "AIC identity and ordering", 0, aic_identity);
  criterion(6, "published strength table: attack x defense within 0.02", 0, published_strengths);
  criterion(7, "dispersion index 27.9 / 31.5", 0, dispersion_classification);
  criterion(8, "simulation grid monotone and within 3 SE", 120.0, simulation_shape);
  criterion(9, "strength sensitivity matches closed form", 0, sensitivity);
  criterion(10, "rank JSON deterministic across runs and row order", 0, determinism);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion(s) failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
