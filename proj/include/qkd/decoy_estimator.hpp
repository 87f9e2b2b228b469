#pragma once

#include <span>
#include <string>
#include <vector>

#include "qkd/channel_model.hpp"

namespace qkd {

// One decoy intensity setting and its measured click and error rates.
struct DecoyObservation {
  double mu = 0.0;
  double p_d = 0.0;
  double delta = 0.5;
};

// What an ideal vacuum decoy should show: clicks at the dark rate, QBER 1/2.
DetectionStats expected_vacuum_stats(const ExperimentPreset& preset);

struct VacuumCheckResult {
  bool pass = false;
  double p_dark_expected = 0.0;
  double rel_p_residual = 0.0;      // |p_d - p_dark| / p_dark
  double rel_delta_residual = 0.0;  // |delta - 1/2| / (1/2)
};

// Sanity check of a measured vacuum decoy against the preset's dark rate.
// Passes when both relative residuals are within tol.
VacuumCheckResult vacuum_consistency_check(const DecoyObservation& obs,
                                           const ExperimentPreset& preset, double tol);

// Photon-number yields recovered from decoy measurements. eta[i] estimates
// the transmittance of (i+1)-photon pulses; p_s_tilde and delta_s_tilde are
// the dark-adjusted single-photon click rate and error rate reconstructed
// from the weakest intensity.
struct YieldEstimate {
  std::vector<double> eta;
  double p_dark = 0.0;
  double p_s_tilde = 0.0;
  double delta_s_tilde = 0.0;
  bool clamped = false;           // some recovered value left [0, 1]
  bool delta_degenerate = false;  // no signal clicks above dark floor
  double condition = 1.0;         // 1-norm condition estimate of the solve
  bool condition_warning = false; // condition above 1e12
};

// Single weak intensity (mu <= mu_guard so multiphoton terms are negligible):
// eta_1 = (p_d - p_dark) / (mu exp(-mu)).
YieldEstimate weak_decoy_estimate(const DecoyObservation& obs, double p_dark,
                                  double mu_guard = 0.1);

// m intensities give a linear system for the first m photon-number yields:
// sum_i eta_i mu_j^i exp(-mu_j) / i! = p_d(mu_j) - p_dark exp(-mu_j).
// Solved by Gaussian elimination with partial pivoting and column scaling.
YieldEstimate multi_decoy_solve(std::span<const DecoyObservation> observations,
                                double p_dark);

// Forward model for tests and round trips: click rate as an explicit
// photon-number sum truncated at n_trunc terms, matching detection_stats as
// n_trunc grows.
std::vector<DecoyObservation> simulate_decoy_observations(const LinkEfficiencies& link,
                                                          double e_detector,
                                                          std::span<const double> mus,
                                                          int n_trunc = 100);
std::vector<DecoyObservation> simulate_decoy_observations(const ExperimentPreset& preset,
                                                          double distance_km,
                                                          std::span<const double> mus,
                                                          int n_trunc = 100);

// Lines of "mu p_d delta", '#' starts a comment.
std::vector<DecoyObservation> read_decoy_file(const std::string& path);

// key=value lines, deterministic field order.
std::string serialize_yield_estimate(const YieldEstimate& estimate);

}  // namespace qkd
