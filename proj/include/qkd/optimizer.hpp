#pragma once

#include <functional>
#include <string>

#include "qkd/postprocessing.hpp"

namespace qkd {

struct OptimizationResult {
  double argmax = 0.0;
  double value = 0.0;
  int iterations = 0;      // function evaluations
  bool converged = false;  // false when the objective never went positive
};

// Maximize fn over [lo, hi], 0 < lo < hi. A log-spaced coarse grid brackets
// the maximum (source intensities span decades), then golden section refines
// until the bracket is narrower than tol.
OptimizationResult maximize_on_log_grid(const std::function<double(double)>& fn, double lo,
                                        double hi, double tol, int coarse_points = 64);

OptimizationResult maximize_rate_over_mu_for_link(Protocol protocol,
                                                  const LinkEfficiencies& link,
                                                  const ExperimentPreset& preset,
                                                  double mu_lo = 1e-6, double mu_hi = 1.0,
                                                  double tol = 1e-7,
                                                  const RateOptions& options = RateOptions());
OptimizationResult maximize_rate_over_mu(Protocol protocol, const ExperimentPreset& preset,
                                         double distance_km, double mu_lo = 1e-6,
                                         double mu_hi = 1.0, double tol = 1e-7,
                                         const RateOptions& options = RateOptions());

// Analytic intensity choices. Without decoys the optimum balances detection
// gain against the multiphoton fraction: root of mu exp(-mu) = eta exp(-eta mu),
// approaching eta for small eta. With decoys it solves
// (1 - mu) exp(-mu) = H2(e) / (1 - H2(e)), independent of the channel.
double optimal_mu_no_decoy_approx(double eta);
double optimal_mu_decoy_approx(double e_detector);

// Source intensity rule for distance scans: a fixed value, numerically
// optimal at each distance, or tracking the channel transmittance (mu = eta).
struct MuPolicy {
  enum class Kind { fixed, optimal, track_eta };
  Kind kind = Kind::fixed;
  double value = 0.1;

  static MuPolicy fixed_value(double v);
  static MuPolicy optimal();
  static MuPolicy track_eta();
  static MuPolicy parse(const std::string& text);  // number | "optimal" | "eta"
  std::string to_string() const;
};

double resolve_mu(const MuPolicy& policy, Protocol protocol, const LinkEfficiencies& link,
                  const ExperimentPreset& preset, const RateOptions& options = RateOptions());

struct CutoffResult {
  double distance_km = 0.0;
  double rate_at_cutoff = 0.0;
  int iterations = 0;
};

// Largest distance where the key rate still exceeds threshold, found by a
// 1 km forward scan and bisection to 0.01 km. Throws std::domain_error when
// the rate is already at or below threshold at zero distance, or never drops
// within the scan limit.
CutoffResult cutoff_distance(Protocol protocol, const ExperimentPreset& preset,
                             const MuPolicy& mu, double threshold = 0.0,
                             const RateOptions& options = RateOptions());

}  // namespace qkd
