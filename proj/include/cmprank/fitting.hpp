#pragma once

// Maximum-likelihood fits of CMP, Gaussian and Negative Binomial models to a
// series of goal counts, and AIC-based comparison between them.
//
// Every likelihood is accumulated over the sorted histogram of the series, so
// permuting the observations leaves all results bit-identical.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "cmprank/cmp.hpp"
#include "cmprank/error.hpp"
#include "cmprank/nelder_mead.hpp"

namespace cmprank {

struct GoalSeries {
  std::vector<std::int64_t> counts;
  std::string label;
};

enum class Family { cmp, gaussian, negative_binomial };

constexpr std::string_view to_string(Family f) {
  switch (f) {
    case Family::cmp: return "CMP";
    case Family::gaussian: return "Gaussian";
    case Family::negative_binomial: return "NegativeBinomial";
  }
  return "unknown";
}

struct GaussianParams {
  double mean = 0.0;
  double sd = 1.0;

  friend bool operator==(const GaussianParams&, const GaussianParams&) = default;
};

/// Size r and success probability p; mean r (1 - p) / p.
struct NegBinParams {
  double size = 1.0;
  double prob = 0.5;

  friend bool operator==(const NegBinParams&, const NegBinParams&) = default;
};

using FamilyParams = std::variant<CmpParams, GaussianParams, NegBinParams>;

enum class FitStatus {
  ok,
  did_not_converge,
  underdispersed,  // NegBin only: MLE for the size diverges
  failed,          // fit raised an error; see diagnostic
};

constexpr std::string_view to_string(FitStatus s) {
  switch (s) {
    case FitStatus::ok: return "ok";
    case FitStatus::did_not_converge: return "did-not-converge";
    case FitStatus::underdispersed: return "underdispersed";
    case FitStatus::failed: return "failed";
  }
  return "unknown";
}

struct FitReport {
  Family family = Family::cmp;
  FamilyParams params;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  double aic = std::numeric_limits<double>::infinity();
  int n_params = 2;
  bool converged = false;
  int iterations = 0;
  FitStatus status = FitStatus::failed;
  std::string diagnostic;

  friend bool operator==(const FitReport&, const FitReport&) = default;
};

inline constexpr int kParamsPerFamily = 2;

inline double aic_from(double log_likelihood, int n_params = kParamsPerFamily) {
  return 2.0 * n_params - 2.0 * log_likelihood;
}

namespace detail {

using Histogram = std::map<std::int64_t, std::int64_t>;

inline Histogram histogram(const GoalSeries& s) {
  Histogram h;
  for (auto x : s.counts) ++h[x];
  return h;
}

inline void validate_series(const GoalSeries& s) {
  if (s.counts.size() < 2) {
    std::ostringstream os;
    os << "series '" << s.label << "' has " << s.counts.size() << " observations, need at least 2";
    throw Error(ErrorCode::series_too_short, os.str());
  }
  for (auto x : s.counts) {
    if (x < 0) {
      throw Error(ErrorCode::invalid_argument, "series '" + s.label + "' contains a negative count");
    }
  }
}

struct SufficientStats {
  double n = 0.0;
  double sum = 0.0;            // sum of x
  double sum_log_fact = 0.0;   // sum of log(x!)
};

inline SufficientStats sufficient_stats(const Histogram& h) {
  SufficientStats st;
  for (const auto& [x, m] : h) {
    const auto w = static_cast<double>(m);
    st.n += w;
    st.sum += w * static_cast<double>(x);
    st.sum_log_fact += w * log_factorial(x);
  }
  return st;
}

inline double cmp_log_likelihood(const SufficientStats& st, const CmpParams& p, const SeriesControl& ctrl) {
  const double log_z = log_normalizer(p, ctrl);
  return st.sum * std::log(p.lambda) - p.nu * st.sum_log_fact - st.n * log_z;
}

inline Moments histogram_moments(const Histogram& h, double divisor_offset) {
  double n = 0.0;
  double sum = 0.0;
  for (const auto& [x, m] : h) {
    n += static_cast<double>(m);
    sum += static_cast<double>(m) * static_cast<double>(x);
  }
  const double mean = sum / n;
  double ss = 0.0;
  for (const auto& [x, m] : h) {
    const double d = static_cast<double>(x) - mean;
    ss += static_cast<double>(m) * d * d;
  }
  return {mean, ss / (n - divisor_offset)};
}

inline FitReport make_report(Family family, FamilyParams params, double ll, bool converged, int iterations,
                             FitStatus status, std::string diagnostic = {}) {
  FitReport r;
  r.family = family;
  r.params = params;
  r.log_likelihood = ll;
  r.aic = aic_from(ll);
  r.n_params = kParamsPerFamily;
  r.converged = converged;
  r.iterations = iterations;
  r.status = status;
  r.diagnostic = std::move(diagnostic);
  return r;
}

}  // namespace detail

/// Sample mean and sample variance (divisor n - 1).
inline Moments empirical_moments(const GoalSeries& series) {
  detail::validate_series(series);
  return detail::histogram_moments(detail::histogram(series), 1.0);
}

inline double cmp_log_likelihood(const GoalSeries& series, const CmpParams& params, const SeriesControl& ctrl = {}) {
  return detail::cmp_log_likelihood(detail::sufficient_stats(detail::histogram(series)), params, ctrl);
}

/// Continuous normal density evaluated at the integer observations.
inline double gaussian_log_likelihood(const GoalSeries& series, const GaussianParams& p) {
  const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * p.sd * p.sd);
  double ll = 0.0;
  for (const auto& [x, m] : detail::histogram(series)) {
    const double z = (static_cast<double>(x) - p.mean) / p.sd;
    ll += static_cast<double>(m) * (log_norm - 0.5 * z * z);
  }
  return ll;
}

inline double negative_binomial_log_likelihood(const GoalSeries& series, const NegBinParams& p) {
  const double r = p.size;
  const double log_p = std::log(p.prob);
  const double log_q = std::log1p(-p.prob);
  double ll = 0.0;
  // log Gamma(x + r) - log Gamma(r) = sum_{k<x} log(r + k), extended key by key.
  double rising = 0.0;
  std::int64_t reached = 0;
  for (const auto& [x, m] : detail::histogram(series)) {
    for (; reached < x; ++reached) rising += std::log(r + static_cast<double>(reached));
    const double term = rising - log_factorial(x) + r * log_p + static_cast<double>(x) * log_q;
    ll += static_cast<double>(m) * term;
  }
  return ll;
}

inline double poisson_log_likelihood(const GoalSeries& series, double rate) {
  double ll = 0.0;
  for (const auto& [x, m] : detail::histogram(series)) {
    ll += static_cast<double>(m) * (static_cast<double>(x) * std::log(rate) - rate - log_factorial(x));
  }
  return ll;
}

/// CMP maximum likelihood by Nelder-Mead over (log lambda, log nu), started
/// from nu0 = mean / variance and the lambda that matches the sample mean at
/// nu0. The simplex is restarted at its best vertex until a restart stops
/// improving the likelihood, within a total budget of max_iterations.
inline FitReport fit_cmp(const GoalSeries& series, const SeriesControl& ctrl = {},
                         const SimplexOptions& opt = {}) {
  detail::validate_series(series);
  const auto hist = detail::histogram(series);
  const auto moments = detail::histogram_moments(hist, 1.0);
  if (!(moments.variance > 0.0)) {
    throw Error(ErrorCode::degenerate_series,
                "series '" + series.label + "' has zero variance; the CMP MLE does not exist");
  }
  const auto stats = detail::sufficient_stats(hist);

  const double nu0 = std::clamp(moments.mean / moments.variance, 0.05, 20.0);
  double lambda0 = 0.0;
  try {
    lambda0 = lambda_for_mean(moments.mean, nu0, ctrl);
  } catch (const Error&) {
    lambda0 = std::pow(moments.mean, nu0);
  }

  auto objective = [&](const std::array<double, 2>& z) {
    const CmpParams p{std::exp(z[0]), std::exp(z[1])};
    try {
      const double ll = detail::cmp_log_likelihood(stats, p, ctrl);
      return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  std::array<double, 2> point{std::log(lambda0), std::log(nu0)};
  double best = objective(point);
  int used = 0;
  bool converged = false;
  SimplexOptions run = opt;
  while (used < opt.max_iterations) {
    run.max_iterations = opt.max_iterations - used;
    const auto res = nelder_mead<2>(objective, point, run);
    used += res.iterations;
    const bool improved = res.value < best - opt.value_spread;
    if (res.value < best) {
      best = res.value;
      point = res.point;
    }
    if (!res.converged) break;
    if (!improved) {
      converged = true;
      break;
    }
    // Restarting with a smaller step polishes along the lambda-nu ridge.
    run.initial_step = std::max(run.initial_step * 0.5, 1e-4);
  }

  const CmpParams fitted{std::exp(point[0]), std::exp(point[1])};
  double ll = -std::numeric_limits<double>::infinity();
  try {
    ll = detail::cmp_log_likelihood(stats, fitted, ctrl);
  } catch (const Error& e) {
    return detail::make_report(Family::cmp, fitted, ll, false, used, FitStatus::failed, e.what());
  }
  if (!converged) {
    std::ostringstream os;
    os << "simplex did not reach a log-likelihood spread below " << opt.value_spread << " within "
       << opt.max_iterations << " iterations";
    return detail::make_report(Family::cmp, fitted, ll, false, used, FitStatus::did_not_converge, os.str());
  }
  return detail::make_report(Family::cmp, fitted, ll, true, used, FitStatus::ok);
}

/// Closed-form Gaussian MLE (variance with divisor n).
inline FitReport fit_gaussian(const GoalSeries& series) {
  detail::validate_series(series);
  const auto m = detail::histogram_moments(detail::histogram(series), 0.0);
  if (!(m.variance > 0.0)) {
    throw Error(ErrorCode::degenerate_series,
                "series '" + series.label + "' has zero variance; the Gaussian MLE does not exist");
  }
  const GaussianParams p{m.mean, std::sqrt(m.variance)};
  return detail::make_report(Family::gaussian, p, gaussian_log_likelihood(series, p), true, 0, FitStatus::ok);
}

/// Negative Binomial MLE with the success probability profiled out,
/// p(r) = r / (r + mean), and Brent's method on log r.
inline FitReport fit_negative_binomial(const GoalSeries& series) {
  detail::validate_series(series);
  const auto hist = detail::histogram(series);
  const auto m = detail::histogram_moments(hist, 0.0);
  if (!(m.variance > 0.0)) {
    throw Error(ErrorCode::degenerate_series,
                "series '" + series.label + "' has zero variance; the Negative Binomial MLE does not exist");
  }
  const double mean = m.mean;

  // The profile likelihood increases monotonically towards the Poisson limit
  // unless the (divisor n) variance exceeds the mean.
  if (m.variance <= mean) {
    std::ostringstream os;
    os << "variance " << m.variance << " <= mean " << mean << ": size diverges, reporting the Poisson limit";
    return detail::make_report(Family::negative_binomial, NegBinParams{std::numeric_limits<double>::infinity(), 1.0},
                               poisson_log_likelihood(series, mean), false, 0, FitStatus::underdispersed, os.str());
  }

  auto params_for = [mean](double log_r) {
    const double r = std::exp(log_r);
    return NegBinParams{r, r / (r + mean)};
  };
  auto objective = [&](double log_r) { return -negative_binomial_log_likelihood(series, params_for(log_r)); };

  const double moment_size = mean * mean / (m.variance - mean);
  const double lo = std::log(moment_size) - 12.0;
  const double hi = std::min(std::log(moment_size) + 12.0, std::log(1e9));
  std::uintmax_t max_iter = 500;
  const auto [log_r, neg_ll] =
      boost::math::tools::brent_find_minima(objective, lo, hi, std::numeric_limits<double>::digits / 2, max_iter);
  const auto p = params_for(log_r);
  const double ll = negative_binomial_log_likelihood(series, p);
  const int iterations = static_cast<int>(max_iter);
  if (hi - log_r < 1e-6 || log_r - lo < 1e-6) {
    return detail::make_report(Family::negative_binomial, p, ll, false, iterations, FitStatus::did_not_converge,
                               "size estimate hit the search boundary");
  }
  return detail::make_report(Family::negative_binomial, p, ll, true, iterations, FitStatus::ok);
}

/// Fits all three families and orders them by ascending AIC. With two
/// parameters everywhere this is also descending log-likelihood. A family that
/// raises an error is reported with status failed and sorts last.
inline std::vector<FitReport> compare_models(const GoalSeries& series, const SeriesControl& ctrl = {}) {
  std::vector<FitReport> reports;
  auto attempt = [&](Family family, auto&& fit) {
    try {
      reports.push_back(fit());
    } catch (const Error& e) {
      FitReport failed;
      failed.family = family;
      if (family == Family::gaussian) failed.params = GaussianParams{};
      if (family == Family::negative_binomial) failed.params = NegBinParams{};
      failed.status = FitStatus::failed;
      failed.diagnostic = e.what();
      reports.push_back(std::move(failed));
    }
  };
  attempt(Family::cmp, [&] { return fit_cmp(series, ctrl); });
  attempt(Family::gaussian, [&] { return fit_gaussian(series); });
  attempt(Family::negative_binomial, [&] { return fit_negative_binomial(series); });

  std::stable_sort(reports.begin(), reports.end(), [](const FitReport& a, const FitReport& b) {
    if (a.aic != b.aic) return a.aic < b.aic;
    return a.log_likelihood > b.log_likelihood;
  });
  return reports;
}

}  // namespace cmprank
