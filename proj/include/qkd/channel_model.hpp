#pragma once

#include "qkd/presets.hpp"

namespace qkd {

// Transmittances and dark rate at a fixed source-receiver separation.
struct LinkEfficiencies {
  double t_ab = 1.0;     // fiber transmittance
  double eta_bob = 1.0;  // receiver transmittance
  double eta = 1.0;      // end to end: t_ab * eta_bob
  double p_dark = 0.0;   // total dark count probability per slot
};

// Per-pulse click probabilities for a phase-randomized coherent source of
// mean photon number mu. Detection of an i photon pulse has probability
// 1 - (1 - eta)^i; photon numbers are Poissonian.
struct DetectionStats {
  double p_signal = 0.0;  // any true-photon click: 1 - exp(-eta mu)
  double p_s = 0.0;       // click from a single-photon pulse: eta mu exp(-mu)
  double p_m = 0.0;       // click from a multiphoton pulse
  double s_m = 0.0;       // multiphoton emission probability: 1 - (1 + mu) exp(-mu)
  double p_d = 0.0;       // raw click rate: p_dark + p_signal
  double delta = 0.0;     // QBER: (p_dark/2 + e_detector p_signal) / p_d
  double f1_decoy = 0.0;        // single-photon click fraction, p_s / p_d
  double f1_pessimistic = 0.0;  // fraction assuming every multiphoton emission clicks
};

// How dark counts are weighted inside the per-class error rates. The pulse
// averaged form pairs the full dark rate with the class click rate; the
// emission conditioned form only counts darks that coincide with an emission
// of that class, which is the quantity a vacuum+weak decoy measurement
// recovers and is what the decoy key rate uses.
enum class DarkErrorWeighting { pulse_averaged, emission_conditioned };

// Click rates and error rates split by photon-number class, with dark counts
// reassigned to the class of the pulse they coincide with.
struct PhotonClassYields {
  double p_dark_t = 0.0;    // dark-only clicks: p_dark exp(-mu)
  double p_s_t = 0.0;       // single-photon class: p_s + p_dark mu exp(-mu)
  double p_m_t = 0.0;       // multiphoton class: p_m + p_dark s_m
  double delta_s_t = 0.0;   // error rate of the single-photon class
  double delta_m_t = 0.0;   // error rate of the multiphoton class
};

LinkEfficiencies link_efficiency(const ExperimentPreset& preset, double distance_km);

// Link with the end-to-end transmittance given directly (receiver folded in).
LinkEfficiencies link_from_eta(double eta, double p_dark);

// 1 - (1 - eta)^i, the click probability of an i photon pulse. i >= 0.
double i_photon_transmittance(double eta, int i);

DetectionStats detection_stats(const LinkEfficiencies& link, double mu, double e_detector);

PhotonClassYields dark_adjusted_yields(const DetectionStats& stats, double mu, double p_dark,
                                       double e_detector,
                                       DarkErrorWeighting weighting = DarkErrorWeighting::pulse_averaged);

// Secure bits per second: min(nu_b, nu_a * r).
double key_bit_rate(double r, double nu_a, double nu_b);

}  // namespace qkd
