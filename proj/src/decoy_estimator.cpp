#include "qkd/decoy_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "qkd/errors.hpp"
#include "qkd/sweep.hpp"

namespace qkd {

DetectionStats expected_vacuum_stats(const ExperimentPreset& preset) {
  return detection_stats(link_efficiency(preset, 0.0), 0.0, preset.e_detector);
}

VacuumCheckResult vacuum_consistency_check(const DecoyObservation& obs,
                                           const ExperimentPreset& preset, double tol) {
  if (!(tol >= 0.0)) throw std::invalid_argument("tolerance must be >= 0");
  VacuumCheckResult res;
  res.p_dark_expected = preset.p_dark();
  if (res.p_dark_expected > 0.0) {
    res.rel_p_residual = std::abs(obs.p_d - res.p_dark_expected) / res.p_dark_expected;
  } else {
    res.rel_p_residual = obs.p_d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  res.rel_delta_residual = std::abs(obs.delta - 0.5) / 0.5;
  res.pass = res.rel_p_residual <= tol && res.rel_delta_residual <= tol;
  return res;
}

namespace {

bool clamp_unit(double& v) {
  if (v < 0.0) {
    v = 0.0;
    return true;
  }
  if (v > 1.0) {
    v = 1.0;
    return true;
  }
  return false;
}

// Dark-adjusted single-photon click and error rates from the weakest
// intensity, shared by both estimators so they agree term for term.
void fill_reduced_single_photon(const DecoyObservation& obs, double p_dark, YieldEstimate& est) {
  const double em = std::exp(-obs.mu);
  est.p_s_tilde = obs.p_d - p_dark * em;
  const double p_s_weak = obs.p_d - p_dark;
  if (p_s_weak > 0.0) {
    double d = (obs.delta * obs.p_d - 0.5 * p_dark * em) / p_s_weak;
    est.clamped = clamp_unit(d) || est.clamped;
    est.delta_s_tilde = d;
  } else {
    est.delta_degenerate = true;
    est.delta_s_tilde = 0.5;
  }
}

void check_observation(const DecoyObservation& obs) {
  if (!(obs.p_d >= 0.0 && obs.p_d <= 1.0))
    throw std::invalid_argument("decoy click rate outside [0, 1]");
  if (!(obs.delta >= 0.0 && obs.delta <= 1.0))
    throw std::invalid_argument("decoy error rate outside [0, 1]");
}

}  // namespace

YieldEstimate weak_decoy_estimate(const DecoyObservation& obs, double p_dark, double mu_guard) {
  if (!(p_dark >= 0.0 && p_dark <= 1.0)) throw std::invalid_argument("p_dark outside [0, 1]");
  check_observation(obs);
  if (!(obs.mu > 0.0 && obs.mu <= mu_guard))
    throw std::domain_error("weak decoy estimate needs 0 < mu <= guard; "
                            "multiphoton terms are not negligible otherwise");
  if (obs.p_d < p_dark)
    throw std::domain_error("observed click rate is below the dark floor");
  YieldEstimate est;
  est.p_dark = p_dark;
  double eta1 = (obs.p_d - p_dark) / (obs.mu * std::exp(-obs.mu));
  est.clamped = clamp_unit(eta1);
  est.eta = {eta1};
  fill_reduced_single_photon(obs, p_dark, est);
  return est;
}

YieldEstimate multi_decoy_solve(std::span<const DecoyObservation> observations, double p_dark) {
  const size_t m = observations.size();
  if (m == 0) throw std::invalid_argument("need at least one decoy intensity");
  if (!(p_dark >= 0.0 && p_dark <= 1.0)) throw std::invalid_argument("p_dark outside [0, 1]");
  for (size_t j = 0; j < m; ++j) {
    check_observation(observations[j]);
    if (!(observations[j].mu > 0.0))
      throw std::invalid_argument("decoy intensities must be > 0");
    for (size_t k = 0; k < j; ++k) {
      if (observations[j].mu == observations[k].mu)
        throw std::invalid_argument("duplicate decoy intensity");
    }
  }

  // a[j][i] = mu_j^(i+1) exp(-mu_j) / (i+1)!, the Poisson weight of the
  // (i+1)-photon class at intensity mu_j.
  std::vector<std::vector<double>> a(m, std::vector<double>(m));
  std::vector<double> b(m);
  for (size_t j = 0; j < m; ++j) {
    const double mu = observations[j].mu;
    double term = mu * std::exp(-mu);
    for (size_t i = 0; i < m; ++i) {
      a[j][i] = term;
      term *= mu / static_cast<double>(i + 2);
    }
    b[j] = observations[j].p_d - p_dark * std::exp(-mu);
  }

  // Column scaling keeps the pivots comparable across the huge dynamic range
  // of the Poisson weights.
  std::vector<double> scale(m);
  for (size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (size_t j = 0; j < m; ++j) s = std::max(s, std::abs(a[j][i]));
    if (s <= 0.0) throw std::domain_error("decoy system is singular");
    scale[i] = s;
    for (size_t j = 0; j < m; ++j) a[j][i] /= s;
  }

  const std::vector<std::vector<double>> a_scaled = a;  // kept for the condition estimate

  // LU factorization with partial pivoting, pivot order recorded in perm.
  std::vector<size_t> perm(m);
  for (size_t j = 0; j < m; ++j) perm[j] = j;
  for (size_t c = 0; c < m; ++c) {
    size_t piv = c;
    for (size_t r = c + 1; r < m; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-300) throw std::domain_error("decoy system is singular");
    std::swap(a[c], a[piv]);
    std::swap(perm[c], perm[piv]);
    for (size_t r = c + 1; r < m; ++r) {
      a[r][c] /= a[c][c];
      for (size_t k = c + 1; k < m; ++k) a[r][k] -= a[r][c] * a[c][k];
    }
  }

  auto lu_solve = [&](const std::vector<double>& rhs) {
    std::vector<double> x(m);
    for (size_t r = 0; r < m; ++r) {
      x[r] = rhs[perm[r]];
      for (size_t k = 0; k < r; ++k) x[r] -= a[r][k] * x[k];
    }
    for (size_t r = m; r-- > 0;) {
      for (size_t k = r + 1; k < m; ++k) x[r] -= a[r][k] * x[k];
      x[r] /= a[r][r];
    }
    return x;
  };

  YieldEstimate est;
  est.p_dark = p_dark;
  std::vector<double> x = lu_solve(b);

  // Exact 1-norm condition number of the scaled system (m is tiny, so the
  // m extra solves for the inverse are free).
  double norm_a = 0.0, norm_inv = 0.0;
  for (size_t i = 0; i < m; ++i) {
    double col = 0.0;
    for (size_t j = 0; j < m; ++j) col += std::abs(a_scaled[j][i]);
    norm_a = std::max(norm_a, col);
    std::vector<double> e(m, 0.0);
    e[i] = 1.0;
    std::vector<double> inv_col = lu_solve(e);
    col = 0.0;
    for (size_t j = 0; j < m; ++j) col += std::abs(inv_col[j]);
    norm_inv = std::max(norm_inv, col);
  }
  est.condition = norm_a * norm_inv;
  est.condition_warning = est.condition > 1e12;

  est.eta.resize(m);
  for (size_t i = 0; i < m; ++i) {
    double v = x[i] / scale[i];
    est.clamped = clamp_unit(v) || est.clamped;
    est.eta[i] = v;
  }

  const auto weakest = std::min_element(
      observations.begin(), observations.end(),
      [](const DecoyObservation& a1, const DecoyObservation& a2) { return a1.mu < a2.mu; });
  fill_reduced_single_photon(*weakest, p_dark, est);
  return est;
}

std::vector<DecoyObservation> simulate_decoy_observations(const LinkEfficiencies& link,
                                                          double e_detector,
                                                          std::span<const double> mus,
                                                          int n_trunc) {
  if (n_trunc < 1) throw std::invalid_argument("n_trunc must be >= 1");
  if (!(e_detector >= 0.0 && e_detector <= 0.5))
    throw std::domain_error("e_detector must be in [0, 0.5]");
  std::vector<DecoyObservation> out;
  out.reserve(mus.size());
  for (double mu : mus) {
    if (!(mu >= 0.0)) throw std::domain_error("mu must be >= 0");
    double p_signal = 0.0;
    if (mu > 0.0) {
      double term = mu * std::exp(-mu);  // Poisson weight of the one-photon class
      for (int i = 1; i <= n_trunc; ++i) {
        p_signal += i_photon_transmittance(link.eta, i) * term;
        term *= mu / static_cast<double>(i + 1);
      }
    }
    DecoyObservation obs;
    obs.mu = mu;
    obs.p_d = link.p_dark + p_signal;
    obs.delta =
        obs.p_d > 0.0 ? (0.5 * link.p_dark + e_detector * p_signal) / obs.p_d : 0.5;
    out.push_back(obs);
  }
  return out;
}

std::vector<DecoyObservation> simulate_decoy_observations(const ExperimentPreset& preset,
                                                          double distance_km,
                                                          std::span<const double> mus,
                                                          int n_trunc) {
  return simulate_decoy_observations(link_efficiency(preset, distance_km), preset.e_detector,
                                     mus, n_trunc);
}

std::vector<DecoyObservation> read_decoy_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open decoy file '" + path + "'");
  std::vector<DecoyObservation> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    DecoyObservation obs;
    if (!(row >> obs.mu)) continue;
    std::string extra;
    if (!(row >> obs.p_d >> obs.delta) || (row >> extra))
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'mu p_d delta'");
    out.push_back(obs);
  }
  if (out.empty()) throw ConfigError(path + ": no decoy observations found");
  return out;
}

std::string serialize_yield_estimate(const YieldEstimate& est) {
  std::string out;
  for (size_t i = 0; i < est.eta.size(); ++i) {
    out += "eta_" + std::to_string(i + 1) + "=" + format_sci(est.eta[i]) + "\n";
  }
  out += "p_dark=" + format_sci(est.p_dark) + "\n";
  out += "p_s_tilde=" + format_sci(est.p_s_tilde) + "\n";
  out += "delta_s_tilde=" + format_sci(est.delta_s_tilde) + "\n";
  out += "clamped=" + std::string(est.clamped ? "1" : "0") + "\n";
  out += "delta_degenerate=" + std::string(est.delta_degenerate ? "1" : "0") + "\n";
  out += "condition=" + format_sci(est.condition) + "\n";
  out += "condition_warning=" + std::string(est.condition_warning ? "1" : "0") + "\n";
  return out;
}

}  // namespace qkd
