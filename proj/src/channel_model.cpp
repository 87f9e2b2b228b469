#include "qkd/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qkd {

namespace {

// Probabilities this small are indistinguishable from zero for every rate in
// the model; flushing them avoids denormal noise in long-distance scans.
constexpr double kProbFloor = 1e-300;

double flushed(double p) { return p < kProbFloor ? 0.0 : p; }

// 1 - (1 + mu) exp(-mu). The direct form cancels badly for small mu, where
// the series mu^2/2 - mu^3/3 + mu^4/8 - mu^5/30 + mu^6/144 - mu^7/840 is
// accurate to well below 1e-13 relative.
double multi_emission_prob(double mu) {
  if (mu < 1e-2) {
    return mu * mu *
           (1.0 / 2 - mu * (1.0 / 3 - mu * (1.0 / 8 - mu * (1.0 / 30 - mu * (1.0 / 144 - mu / 840)))));
  }
  return 1.0 - (1.0 + mu) * std::exp(-mu);
}

}  // namespace

LinkEfficiencies link_efficiency(const ExperimentPreset& preset, double distance_km) {
  if (!(distance_km >= 0.0)) throw std::domain_error("distance_km must be >= 0");
  preset.validate();
  LinkEfficiencies link;
  link.t_ab = flushed(std::pow(10.0, -preset.alpha_db_per_km * distance_km / 10.0));
  link.eta_bob = preset.eta_bob();
  link.eta = flushed(link.t_ab * link.eta_bob);
  link.p_dark = preset.p_dark();
  return link;
}

LinkEfficiencies link_from_eta(double eta, double p_dark) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::domain_error("eta must be in [0, 1]");
  if (!(p_dark >= 0.0 && p_dark <= 1.0)) throw std::domain_error("p_dark must be in [0, 1]");
  LinkEfficiencies link;
  link.t_ab = eta;
  link.eta_bob = 1.0;
  link.eta = eta;
  link.p_dark = p_dark;
  return link;
}

double i_photon_transmittance(double eta, int i) {
  if (i < 0) throw std::invalid_argument("photon number must be >= 0");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::domain_error("eta must be in [0, 1]");
  if (i == 0) return 0.0;
  return -std::expm1(static_cast<double>(i) * std::log1p(-eta));
}

DetectionStats detection_stats(const LinkEfficiencies& link, double mu, double e_detector) {
  if (!(mu >= 0.0)) throw std::domain_error("mu must be >= 0");
  if (!(e_detector >= 0.0 && e_detector <= 0.5))
    throw std::domain_error("e_detector must be in [0, 0.5]");
  DetectionStats s;
  s.p_signal = flushed(-std::expm1(-link.eta * mu));
  s.p_s = flushed(link.eta * mu * std::exp(-mu));
  s.p_m = std::max(0.0, s.p_signal - s.p_s);
  s.s_m = multi_emission_prob(mu);
  s.p_d = link.p_dark + s.p_signal;
  if (s.p_d > 0.0) {
    s.delta = (0.5 * link.p_dark + e_detector * s.p_signal) / s.p_d;
    s.f1_decoy = s.p_s / s.p_d;
    s.f1_pessimistic = std::max(0.0, s.p_d - link.p_dark - s.s_m) / s.p_d;
  } else {
    s.delta = 0.5;  // no clicks at all: the error rate limit is dark dominated
  }
  return s;
}

PhotonClassYields dark_adjusted_yields(const DetectionStats& stats, double mu, double p_dark,
                                       double e_detector, DarkErrorWeighting weighting) {
  if (!(mu >= 0.0)) throw std::domain_error("mu must be >= 0");
  if (!(p_dark >= 0.0 && p_dark <= 1.0)) throw std::domain_error("p_dark must be in [0, 1]");
  const double em = std::exp(-mu);
  PhotonClassYields y;
  y.p_dark_t = p_dark * em;
  y.p_s_t = stats.p_s + p_dark * mu * em;
  y.p_m_t = stats.p_m + p_dark * stats.s_m;

  double num_s, den_s, num_m, den_m;
  if (weighting == DarkErrorWeighting::emission_conditioned) {
    num_s = 0.5 * p_dark * mu * em + e_detector * stats.p_s;
    den_s = y.p_s_t;
    num_m = 0.5 * p_dark * stats.s_m + e_detector * stats.p_m;
    den_m = y.p_m_t;
  } else {
    num_s = 0.5 * p_dark + e_detector * stats.p_s;
    den_s = p_dark + stats.p_s;
    num_m = 0.5 * p_dark + e_detector * stats.p_m;
    den_m = p_dark + stats.p_m;
  }
  y.delta_s_t = den_s > 0.0 ? num_s / den_s : e_detector;
  y.delta_m_t = den_m > 0.0 ? num_m / den_m : 0.5;
  return y;
}

double key_bit_rate(double r, double nu_a, double nu_b) {
  if (!(r >= 0.0)) throw std::domain_error("rate must be >= 0");
  if (!(nu_a > 0.0 && nu_b > 0.0)) throw std::domain_error("clock rates must be > 0");
  return std::min(nu_b, nu_a * r);
}

}  // namespace qkd
