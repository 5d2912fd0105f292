#pragma once

// Conway-Maxwell-Poisson distribution: normalizer, pmf, moments, sampling.
//
//   P(X = x) = lambda^x / (x!)^nu / Z(lambda, nu),  Z = sum_j lambda^j / (j!)^nu
//
// Everything is evaluated in log-space. Z is summed outward from the mode of
// the series so that parameter sets with enormous means (lambda^(1/nu) in the
// millions) still need only O(sd) terms.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "cmprank/error.hpp"

namespace cmprank {

struct CmpParams {
  double lambda = 1.0;
  double nu = 1.0;

  friend bool operator==(const CmpParams&, const CmpParams&) = default;
};

struct SeriesControl {
  double rel_tol = 1e-12;
  std::int64_t max_terms = 1'000'000;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

inline void validate(const CmpParams& p) {
  if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) {
    std::ostringstream os;
    os << "lambda must be positive and finite, got " << p.lambda;
    throw Error(ErrorCode::invalid_params, os.str());
  }
  if (!(p.nu >= 0.0) || !std::isfinite(p.nu)) {
    std::ostringstream os;
    os << "nu must be non-negative and finite, got " << p.nu;
    throw Error(ErrorCode::invalid_params, os.str());
  }
  if (p.nu == 0.0 && p.lambda >= 1.0) {
    std::ostringstream os;
    os << "nu = 0 requires lambda < 1 (series diverges), got lambda = " << p.lambda;
    throw Error(ErrorCode::invalid_params, os.str());
  }
}

inline void validate(const SeriesControl& c) {
  if (!(c.rel_tol > 0.0 && c.rel_tol < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "rel_tol must lie in (0, 1)");
  }
  if (c.max_terms < 1000) {
    throw Error(ErrorCode::invalid_argument, "max_terms must be at least 1000");
  }
}

namespace detail {

inline double lgamma_threadsafe(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

}  // namespace detail

/// log(n!) for n >= 0.
inline double log_factorial(std::int64_t n) {
  static const std::array<double, 512> table = [] {
    std::array<double, 512> t{};
    for (std::size_t i = 0; i < t.size(); ++i) {
      t[i] = detail::lgamma_threadsafe(static_cast<double>(i) + 1.0);
    }
    return t;
  }();
  if (n < static_cast<std::int64_t>(table.size())) return table[static_cast<std::size_t>(n)];
  return detail::lgamma_threadsafe(static_cast<double>(n) + 1.0);
}

namespace detail {

// Summation state for the normalizing series. Terms are stored relative to
// the term at the mode: weight_j = exp(log_t_j - log_ref).
struct SeriesSum {
  double log_ref = 0.0;
  double sum = 0.0;
  double compensation = 0.0;
  std::int64_t first = 0;
  std::int64_t last = 0;
  std::int64_t terms = 0;

  void add(double w) {
    // Neumaier summation
    const double t = sum + w;
    if (std::abs(sum) >= std::abs(w)) {
      compensation += (sum - t) + w;
    } else {
      compensation += (w - t) + sum;
    }
    sum = t;
  }
  double total() const { return sum + compensation; }
};

inline double log_term(std::int64_t j, double log_lambda, double nu) {
  // nu * log(0!) is exactly zero, including nu == 0.
  return static_cast<double>(j) * log_lambda - nu * log_factorial(j);
}

inline std::int64_t series_mode(const CmpParams& p) {
  if (p.nu == 0.0 || p.lambda <= 1.0) return 0;
  const double m = std::exp(std::log(p.lambda) / p.nu);
  if (!(m < 0x1p52)) {
    std::ostringstream os;
    os << "series mode lambda^(1/nu) = " << m << " is beyond representable range for lambda = "
       << p.lambda << ", nu = " << p.nu;
    throw Error(ErrorCode::series_not_converged, os.str());
  }
  return static_cast<std::int64_t>(std::floor(m));
}

// Walks the series outward from its mode, calling visit(j, weight_j) for every
// summed term. The walk in each direction stops once a geometric bound on the
// remaining tail drops below rel_tol / 2 of the running sum; the bound is valid
// because the term ratio lambda / (j+1)^nu is monotone in j.
template <class Visit>
SeriesSum walk_series(const CmpParams& p, const SeriesControl& ctrl, Visit&& visit) {
  validate(p);
  validate(ctrl);
  const double log_lambda = std::log(p.lambda);
  const double nu = p.nu;
  const double half_tol = 0.5 * ctrl.rel_tol;

  SeriesSum s;
  const std::int64_t mode = series_mode(p);
  s.log_ref = log_term(mode, log_lambda, nu);
  s.first = s.last = mode;

  auto push = [&](std::int64_t j) {
    if (++s.terms > ctrl.max_terms) {
      std::ostringstream os;
      os << "normalizing series for lambda = " << p.lambda << ", nu = " << p.nu
         << " did not converge within " << ctrl.max_terms << " terms";
      throw Error(ErrorCode::series_not_converged, os.str());
    }
    const double w = std::exp(log_term(j, log_lambda, nu) - s.log_ref);
    s.add(w);
    visit(j, w);
    return w;
  };

  const double w_mode = push(mode);

  // Upper tail: t_{j+1} / t_j = lambda / (j+1)^nu.
  {
    double w = w_mode;
    for (std::int64_t j = mode;;) {
      const double ratio = std::exp(log_lambda - nu * std::log(static_cast<double>(j + 1)));
      if (ratio < 1.0 && w * ratio / (1.0 - ratio) <= half_tol * s.total()) break;
      w = push(++j);
      s.last = j;
    }
  }

  // Lower tail: t_{j-1} / t_j = j^nu / lambda.
  {
    double w = w_mode;
    for (std::int64_t j = mode; j > 0;) {
      const double ratio = std::exp(nu * std::log(static_cast<double>(j)) - log_lambda);
      if (ratio < 1.0 && w * ratio / (1.0 - ratio) <= half_tol * s.total()) break;
      w = push(--j);
      s.first = j;
    }
  }
  return s;
}

}  // namespace detail

/// A CMP distribution with its normalizing constant evaluated once.
class CmpDistribution {
 public:
  explicit CmpDistribution(CmpParams params, SeriesControl ctrl = {})
      : params_(params), ctrl_(ctrl), log_lambda_(std::log(params.lambda)) {
    const auto s = detail::walk_series(params_, ctrl_, [](std::int64_t, double) {});
    log_ref_ = s.log_ref;
    log_sum_ = std::log(s.total());
    first_ = s.first;
    last_ = s.last;
  }

  const CmpParams& params() const noexcept { return params_; }
  const SeriesControl& control() const noexcept { return ctrl_; }

  double log_normalizer() const noexcept { return log_ref_ + log_sum_; }

  double log_pmf(std::int64_t x) const {
    if (x < 0) return -std::numeric_limits<double>::infinity();
    // Subtract the mode term first: both operands share magnitude, which keeps
    // the result accurate even when log Z itself is in the millions.
    return (detail::log_term(x, log_lambda_, params_.nu) - log_ref_) - log_sum_;
  }

  double pmf(std::int64_t x) const { return std::exp(log_pmf(x)); }

  /// Range of x values the truncated series covered; the mass outside it is
  /// below rel_tol.
  std::int64_t support_first() const noexcept { return first_; }
  std::int64_t support_last() const noexcept { return last_; }

 private:
  CmpParams params_;
  SeriesControl ctrl_;
  double log_lambda_;
  double log_ref_ = 0.0;
  double log_sum_ = 0.0;
  std::int64_t first_ = 0;
  std::int64_t last_ = 0;
};

namespace detail {

// Unnormalized weights over the truncated support, ordered by x.
struct SupportTable {
  std::int64_t first = 0;
  std::vector<double> weights;
};

inline SupportTable support_table(const CmpParams& p, const SeriesControl& ctrl) {
  std::vector<std::pair<std::int64_t, double>> visited;
  const auto s = walk_series(p, ctrl, [&](std::int64_t j, double w) { visited.emplace_back(j, w); });
  SupportTable table;
  table.first = s.first;
  table.weights.assign(static_cast<std::size_t>(s.last - s.first + 1), 0.0);
  for (const auto& [j, w] : visited) table.weights[static_cast<std::size_t>(j - s.first)] = w;
  return table;
}

}  // namespace detail

inline double log_normalizer(const CmpParams& params, const SeriesControl& ctrl = {}) {
  return CmpDistribution(params, ctrl).log_normalizer();
}

inline double log_pmf(std::int64_t x, const CmpParams& params, const SeriesControl& ctrl = {}) {
  return CmpDistribution(params, ctrl).log_pmf(x);
}

/// Mean and variance by direct summation over the truncated support.
inline Moments mean_and_variance(const CmpParams& params, const SeriesControl& ctrl = {}) {
  const auto table = detail::support_table(params, ctrl);
  double total = 0.0;
  double first_moment = 0.0;
  for (std::size_t i = 0; i < table.weights.size(); ++i) {
    total += table.weights[i];
    first_moment += static_cast<double>(table.first + static_cast<std::int64_t>(i)) * table.weights[i];
  }
  Moments m;
  m.mean = first_moment / total;
  double second = 0.0;
  for (std::size_t i = 0; i < table.weights.size(); ++i) {
    const double d = static_cast<double>(table.first + static_cast<std::int64_t>(i)) - m.mean;
    second += d * d * table.weights[i];
  }
  m.variance = second / total;
  return m;
}

/// Inverse-cdf sampler over the truncated support. Draws are a pure function
/// of the seed.
class CmpSampler {
 public:
  explicit CmpSampler(const CmpParams& params, const SeriesControl& ctrl = {}) {
    auto table = detail::support_table(params, ctrl);
    first_ = table.first;
    cumulative_.resize(table.weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < table.weights.size(); ++i) {
      acc += table.weights[i];
      cumulative_[i] = acc;
    }
  }

  template <class Engine>
  std::int64_t operator()(Engine& engine) const {
    // 53 random bits -> uniform double in [0, 1), identical on every platform.
    const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    const double target = u * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    if (it == cumulative_.end()) --it;
    return first_ + static_cast<std::int64_t>(it - cumulative_.begin());
  }

 private:
  std::int64_t first_ = 0;
  std::vector<double> cumulative_;
};

inline std::vector<std::int64_t> sample(const CmpParams& params, std::size_t n, std::uint64_t seed,
                                        const SeriesControl& ctrl = {}) {
  if (n == 0) throw Error(ErrorCode::invalid_argument, "sample size must be at least 1");
  const CmpSampler sampler(params, ctrl);
  std::mt19937_64 engine(seed);
  std::vector<std::int64_t> out(n);
  for (auto& x : out) x = sampler(engine);
  return out;
}

enum class Dispersion { over, equi, under };

constexpr std::string_view to_string(Dispersion d) {
  switch (d) {
    case Dispersion::over: return "over-dispersion";
    case Dispersion::equi: return "equi-dispersion";
    case Dispersion::under: return "under-dispersion";
  }
  return "unknown";
}

/// DI = mean / variance. DI < 1 is over-dispersion, DI > 1 under-dispersion.
inline double dispersion_index(double mean, double variance) {
  if (!(variance > 0.0)) {
    std::ostringstream os;
    os << "variance must be positive, got " << variance;
    throw Error(ErrorCode::zero_or_negative_variance, os.str());
  }
  return mean / variance;
}

inline Dispersion classify_dispersion(double di) {
  if (di < 1.0) return Dispersion::over;
  if (di > 1.0) return Dispersion::under;
  return Dispersion::equi;
}

/// Solves E[X](lambda, nu) = mean for lambda at fixed nu.
inline double lambda_for_mean(double mean, double nu, const SeriesControl& ctrl = {}) {
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    throw Error(ErrorCode::invalid_argument, "target mean must be positive and finite");
  }
  if (!(nu >= 0.0)) throw Error(ErrorCode::invalid_argument, "nu must be non-negative");
  if (nu == 0.0) return mean / (1.0 + mean);  // geometric: mean = lambda / (1 - lambda)

  auto gap = [&](double log_lambda) {
    try {
      return mean_and_variance({std::exp(log_lambda), nu}, ctrl).mean - mean;
    } catch (const Error&) {
      // Only reachable for absurdly large lambda^(1/nu); the mean is huge there.
      return std::numeric_limits<double>::max();
    }
  };

  // Asymptotic mean ~ lambda^(1/nu) - (nu - 1) / (2 nu) as a starting point.
  const double shifted = mean + (nu - 1.0) / (2.0 * nu);
  const double guess = nu * std::log(shifted > 0.5 ? shifted : std::max(mean, 1e-3));
  double lo = guess - 0.5;
  double hi = guess + 0.5;
  double f_lo = gap(lo);
  double f_hi = gap(hi);
  for (int i = 0; i < 200 && f_lo > 0.0; ++i) {
    hi = lo;
    f_hi = f_lo;
    lo -= 1.0 + 0.5 * i;
    f_lo = gap(lo);
  }
  for (int i = 0; i < 200 && f_hi < 0.0; ++i) {
    lo = hi;
    f_lo = f_hi;
    hi += 0.5;
    f_hi = gap(hi);
  }
  if (f_lo > 0.0 || f_hi < 0.0) {
    throw Error(ErrorCode::series_not_converged, "could not bracket lambda for the requested mean");
  }
  if (f_lo == 0.0) return std::exp(lo);
  if (f_hi == 0.0) return std::exp(hi);
  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(gap, lo, hi, f_lo, f_hi,
                                                        boost::math::tools::eps_tolerance<double>(50),
                                                        max_iter);
  return std::exp(0.5 * (a + b));
}

}  // namespace cmprank
