#include "qkd/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include "qkd/errors.hpp"

namespace qkd {

OptimizationResult maximize_on_log_grid(const std::function<double(double)>& fn, double lo,
                                        double hi, double tol, int coarse_points) {
  if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("need 0 < lo < hi");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  if (coarse_points < 3) throw std::invalid_argument("need at least 3 coarse points");

  const int n = coarse_points;
  const double span = std::log(hi / lo);
  std::vector<double> grid(n), val(n);
  int best = 0;
  for (int k = 0; k < n; ++k) {
    grid[k] = lo * std::exp(span * k / (n - 1));
    val[k] = fn(grid[k]);
    if (val[k] > val[best]) best = k;
  }
  OptimizationResult res;
  res.iterations = n;
  if (!(val[best] > 0.0)) {
    // nothing to refine: report the best grid point, flagged unconverged
    res.argmax = grid[best];
    res.value = val[best];
    res.converged = false;
    return res;
  }

  double a = grid[best > 0 ? best - 1 : 0];
  double b = grid[best < n - 1 ? best + 1 : n - 1];
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = fn(x1);
  double f2 = fn(x2);
  res.iterations += 2;
  while (b - a > tol && res.iterations < 100000) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = fn(x2);
    }
    ++res.iterations;
  }
  res.argmax = 0.5 * (a + b);
  res.value = fn(res.argmax);
  res.converged = true;
  if (res.value < val[best]) {  // guards against a non-unimodal objective
    res.argmax = grid[best];
    res.value = val[best];
  }
  return res;
}

OptimizationResult maximize_rate_over_mu_for_link(Protocol protocol,
                                                  const LinkEfficiencies& link,
                                                  const ExperimentPreset& preset, double mu_lo,
                                                  double mu_hi, double tol,
                                                  const RateOptions& options) {
  return maximize_on_log_grid(
      [&](double mu) { return rate_for_link(protocol, link, preset, mu, options).r; }, mu_lo,
      mu_hi, tol);
}

OptimizationResult maximize_rate_over_mu(Protocol protocol, const ExperimentPreset& preset,
                                         double distance_km, double mu_lo, double mu_hi,
                                         double tol, const RateOptions& options) {
  return maximize_rate_over_mu_for_link(protocol, link_efficiency(preset, distance_km), preset,
                                        mu_lo, mu_hi, tol, options);
}

double optimal_mu_no_decoy_approx(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::domain_error("eta must be in (0, 1]");
  // root of eta exp(-eta mu) - mu exp(-mu); positive at 0, negative at 1
  auto g = [eta](double mu) { return eta * std::exp(-eta * mu) - mu * std::exp(-mu); };
  if (g(1.0) >= 0.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double optimal_mu_decoy_approx(double e_detector) {
  if (!(e_detector > 0.0 && e_detector < 0.5))
    throw std::domain_error("e_detector must be in (0, 0.5)");
  const double h = binary_entropy(e_detector);
  const double ratio = h / (1.0 - h);
  if (ratio >= 1.0)
    throw std::domain_error("error rate too high: (1 - mu) exp(-mu) never reaches H2(e)/(1 - H2(e))");
  auto g = [ratio](double mu) { return (1.0 - mu) * std::exp(-mu) - ratio; };
  double lo = 0.0, hi = 1.0;  // g(0) = 1 - ratio > 0, g(1) = -ratio < 0
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

MuPolicy MuPolicy::fixed_value(double v) { return MuPolicy{Kind::fixed, v}; }
MuPolicy MuPolicy::optimal() { return MuPolicy{Kind::optimal, 0.0}; }
MuPolicy MuPolicy::track_eta() { return MuPolicy{Kind::track_eta, 0.0}; }

MuPolicy MuPolicy::parse(const std::string& text) {
  if (text == "optimal") return optimal();
  if (text == "eta") return track_eta();
  try {
    size_t consumed = 0;
    const double v = std::stod(text, &consumed);
    if (consumed != text.size()) throw std::invalid_argument("trailing junk");
    if (!(v > 0.0)) throw std::invalid_argument("not positive");
    return fixed_value(v);
  } catch (const std::exception&) {
    throw ConfigError("bad mu policy '" + text + "' (want a positive number, 'optimal' or 'eta')");
  }
}

std::string MuPolicy::to_string() const {
  switch (kind) {
    case Kind::optimal: return "optimal";
    case Kind::track_eta: return "eta";
    case Kind::fixed: break;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

double resolve_mu(const MuPolicy& policy, Protocol protocol, const LinkEfficiencies& link,
                  const ExperimentPreset& preset, const RateOptions& options) {
  switch (policy.kind) {
    case MuPolicy::Kind::fixed:
      return policy.value;
    case MuPolicy::Kind::track_eta:
      return std::clamp(link.eta, 1e-12, 1.0);
    case MuPolicy::Kind::optimal:
      return maximize_rate_over_mu_for_link(protocol, link, preset, 1e-6, 1.0, 1e-5, options)
          .argmax;
  }
  throw std::invalid_argument("bad mu policy");
}

CutoffResult cutoff_distance(Protocol protocol, const ExperimentPreset& preset,
                             const MuPolicy& mu, double threshold, const RateOptions& options) {
  if (!(threshold >= 0.0)) throw std::domain_error("threshold must be >= 0");
  int evals = 0;
  auto rate_at = [&](double d) {
    ++evals;
    const LinkEfficiencies link = link_efficiency(preset, d);
    const double m = resolve_mu(mu, protocol, link, preset, options);
    return rate_for_link(protocol, link, preset, m, options).r;
  };
  if (!(rate_at(0.0) > threshold))
    throw std::domain_error("rate does not exceed the threshold even at zero distance");
  constexpr double kScanLimitKm = 50000.0;
  double lo = 0.0, hi = 0.0;
  for (double d = 1.0;; d += 1.0) {
    if (!(rate_at(d) > threshold)) {
      lo = d - 1.0;
      hi = d;
      break;
    }
    if (d >= kScanLimitKm)
      throw std::domain_error("rate still exceeds the threshold at the scan limit");
  }
  while (hi - lo > 0.01) {
    const double mid = 0.5 * (lo + hi);
    (rate_at(mid) > threshold ? lo : hi) = mid;
  }
  CutoffResult res;
  res.distance_km = lo;
  res.rate_at_cutoff = rate_at(lo);
  res.iterations = evals;
  return res;
}

}  // namespace qkd
