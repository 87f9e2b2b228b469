#include <cmath>
#include <random>
#include <vector>

#include "approx.hpp"
#include "doctest.h"
#include "qkd/postprocessing.hpp"

using namespace qkd;

namespace {

// Independent oracle: Poisson-weighted photon-number expansion in long double,
// summed term by term instead of using the closed forms under test.
long double poisson_click_series(long double eta, long double mu, int n_max = 400) {
  long double term = std::exp(-mu);  // photon number 0
  long double sum = 0.0L;
  for (int i = 1; i <= n_max; ++i) {
    term *= mu / i;
    sum += (1.0L - std::pow(1.0L - eta, i)) * term;
  }
  return sum;
}

long double poisson_multiphoton_series(long double mu, int n_max = 400) {
  long double term = std::exp(-mu);  // photon number 0
  long double sum = 0.0L;
  for (int i = 1; i <= n_max; ++i) {
    term *= mu / i;
    if (i >= 2) sum += term;
  }
  return sum;
}

}  // namespace

TEST_SUITE("properties") {

TEST_CASE("click probabilities match a photon-number series on random links") {
  std::mt19937 gen(12345);
  std::uniform_real_distribution<double> log_eta(-6.0, 0.0);
  std::uniform_real_distribution<double> log_mu(-6.0, std::log10(5.0));
  for (int it = 0; it < 1000; ++it) {
    const double eta = std::pow(10.0, log_eta(gen));
    const double mu = std::pow(10.0, log_mu(gen));
    const LinkEfficiencies link = link_from_eta(eta, 0.0);
    const DetectionStats s = detection_stats(link, mu, 0.01);

    const double series = static_cast<double>(
        poisson_click_series(static_cast<long double>(eta), static_cast<long double>(mu)));
    CHECK(rel_err(s.p_signal, series) < 1e-12);
    CHECK(std::abs(s.p_s + s.p_m - s.p_signal) <= 1e-12 * s.p_signal);

    const double mp = static_cast<double>(
        poisson_multiphoton_series(static_cast<long double>(mu)));
    CHECK(rel_err(s.s_m, mp) < 1e-11);

    CHECK(s.p_s >= 0.0);
    CHECK(s.p_s <= s.p_signal);
    CHECK(s.p_signal <= s.p_d);
    CHECK(s.p_d <= 1.0);
    CHECK(s.delta >= 0.0);
    CHECK(s.delta <= 0.5);
    CHECK(s.f1_decoy >= 0.0);
    CHECK(s.f1_decoy <= 1.0);
    CHECK(s.f1_pessimistic >= 0.0);
    CHECK(s.f1_pessimistic <= 1.0);
    CHECK(s.f1_pessimistic <= s.f1_decoy * (1.0 + 1e-12) + 1e-15);
  }
}

TEST_CASE("detection statistics stay in range with dark counts") {
  std::mt19937 gen(54321);
  std::uniform_real_distribution<double> log_eta(-6.0, 0.0);
  std::uniform_real_distribution<double> log_mu(-4.0, std::log10(5.0));
  std::uniform_real_distribution<double> log_dark(-8.0, -3.0);
  for (int it = 0; it < 1000; ++it) {
    const LinkEfficiencies link =
        link_from_eta(std::pow(10.0, log_eta(gen)), std::pow(10.0, log_dark(gen)));
    const DetectionStats s = detection_stats(link, std::pow(10.0, log_mu(gen)), 0.033);
    CHECK(s.p_d <= 1.0);
    CHECK(s.p_d >= s.p_signal);
    CHECK(s.delta >= 0.0);
    CHECK(s.delta <= 0.5);
    CHECK(s.f1_decoy <= 1.0 + 1e-15);
    CHECK(s.f1_pessimistic <= s.f1_decoy * (1.0 + 1e-12) + 1e-15);
  }
}

TEST_CASE("collision-entropy residue dominates the entropic one") {
  const EcEfficiencyTable table;
  std::mt19937 gen(2024);
  std::uniform_real_distribution<double> d_delta(1e-6, 0.2);
  for (int it = 0; it < 500; ++it) {
    const double delta = d_delta(gen);
    std::uniform_real_distribution<double> d_f1(std::max(2.2 * delta, 0.05), 1.0);
    const double f1 = d_f1(gen);
    const double lut = residue_lutkenhaus(delta, f1, table);
    const double gllp = residue_gllp(delta, f1, table);
    CHECK(lut + 1e-12 >= gllp);
    CHECK(lut >= 0.0);
    CHECK(lut <= 1.0);
    CHECK(gllp >= 0.0);
    CHECK(gllp <= 1.0);
  }
}

TEST_CASE("decoy residue equals the tagged bound over random links") {
  const EcEfficiencyTable table;
  const ExperimentPreset gys = preset_by_name("GYS");
  std::mt19937 gen(777);
  std::uniform_real_distribution<double> d_dist(0.0, 150.0);
  std::uniform_real_distribution<double> log_mu(std::log10(0.05), 0.0);
  for (int it = 0; it < 200; ++it) {
    const double mu = std::pow(10.0, log_mu(gen));
    const LinkEfficiencies link = link_efficiency(gys, d_dist(gen));
    const DetectionStats s = detection_stats(link, mu, gys.e_detector);
    const PhotonClassYields y = dark_adjusted_yields(s, mu, link.p_dark, gys.e_detector,
                                                     DarkErrorWeighting::emission_conditioned);
    // class rates partition the click rate
    CHECK(rel_err(y.p_dark_t + y.p_s_t + y.p_m_t, s.p_d) < 1e-12);

    const std::vector<TaggedClass> classes = {{y.p_s_t / s.p_d, y.delta_s_t},
                                              {y.p_dark_t / s.p_d, 0.5},
                                              {y.p_m_t / s.p_d, 0.5}};
    CHECK(residue_decoy(s, y, table) == residue_tagged(s.delta, classes, table));
  }
}

TEST_CASE("no protocol beats the single-photon ceiling") {
  const ExperimentPreset gys = preset_by_name("GYS");
  for (double d : {0.0, 25.0, 50.0, 75.0, 100.0, 125.0}) {
    for (double mu : {0.1, 0.5, 1.0}) {
      const double upper = rate_for_protocol(Protocol::upper_bound, gys, d, mu).r;
      for (Protocol p : {Protocol::lutkenhaus, Protocol::gllp, Protocol::gllp_decoy,
                         Protocol::asymptotic}) {
        const double r = rate_for_protocol(p, gys, d, mu).r;
        CHECK(r <= upper * (1.0 + 1e-12) + 1e-18);
      }
    }
  }
}

TEST_CASE("click rate grows with intensity and transmittance") {
  const ExperimentPreset gys = preset_by_name("GYS");
  const LinkEfficiencies link = link_efficiency(gys, 50.0);
  double prev = 0.0;
  for (int k = 0; k <= 40; ++k) {
    const double mu = 1e-4 * std::pow(2e4, k / 40.0);
    const double p_d = detection_stats(link, mu, gys.e_detector).p_d;
    CHECK(p_d >= prev);
    prev = p_d;
  }
  prev = 0.0;
  for (int k = 0; k <= 40; ++k) {
    const double eta = std::pow(10.0, -6.0 + 6.0 * k / 40.0);
    const double p_d = detection_stats(link_from_eta(eta, 1.7e-6), 0.5, gys.e_detector).p_d;
    CHECK(p_d >= prev);
    prev = p_d;
  }
}

TEST_CASE("rates are reproducible bit for bit") {
  const ExperimentPreset gys = preset_by_name("GYS");
  for (double d : {0.0, 40.0, 120.0}) {
    const RateResult a = rate_for_protocol(Protocol::gllp_decoy, gys, d, 0.5);
    const RateResult b = rate_for_protocol(Protocol::gllp_decoy, gys, d, 0.5);
    CHECK(a.r == b.r);
    CHECK(a.eta_post == b.eta_post);
    CHECK(a.yields.delta_s_t == b.yields.delta_s_t);
  }
}

}  // TEST_SUITE
