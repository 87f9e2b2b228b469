#include "qkd/postprocessing.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "approx.hpp"
#include "doctest.h"
#include "qkd/errors.hpp"

using namespace qkd;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

}  // namespace

TEST_SUITE("postprocessing") {

TEST_CASE("binary entropy") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == 1.0);
  CHECK(rel_err(binary_entropy(0.11), 0.499915958164528) < 1e-14);
  CHECK(rel_err(binary_entropy(0.02), 0.14144054254182065) < 1e-14);
  CHECK(rel_err(binary_entropy(0.033), 0.20922047786915265) < 1e-14);
  CHECK(rel_err(binary_entropy(0.01), 0.080793135895911173) < 1e-14);
  CHECK(rel_err(binary_entropy(0.25), 0.81127812445913286) < 1e-14);
  CHECK(rel_err(binary_entropy(0.3), binary_entropy(0.7)) < 1e-14);
  CHECK_THROWS_AS(binary_entropy(-0.01), std::domain_error);
  CHECK_THROWS_AS(binary_entropy(1.01), std::domain_error);
}

TEST_CASE("error correction table, interpolation") {
  const EcEfficiencyTable f;
  CHECK(f(0.01) == 1.16);
  CHECK(f(0.05) == 1.16);
  CHECK(f(0.10) == 1.22);
  CHECK(f(0.15) == 1.35);
  CHECK(rel_err(f(0.075), 1.19) < 1e-14);
  CHECK(rel_err(f(0.125), 1.285) < 1e-14);
  // clamped flat outside the knot range
  CHECK(f(0.0) == 1.16);
  CHECK(f(0.001) == 1.16);
  CHECK(f(0.4) == 1.35);
  CHECK_THROWS_AS(f(0.51), std::domain_error);
  CHECK_THROWS_AS(f(-0.01), std::domain_error);
}

TEST_CASE("error correction table, least squares line") {
  const EcEfficiencyTable f(EcMode::least_squares_line);
  CHECK(rel_err(f.line_slope(), 1.3656884875846501) < 1e-12);
  CHECK(rel_err(f.line_intercept(), 1.1166591422121896) < 1e-12);
  CHECK(rel_err(f(0.033), 1.1617268623024831) < 1e-12);
  // the line never reports better than the Shannon limit
  const EcEfficiencyTable dip({{0.01, 1.0}, {0.5, 3.0}}, EcMode::least_squares_line);
  CHECK(dip(0.0) == 1.0);
}

TEST_CASE("error correction table validation") {
  CHECK_THROWS_AS(EcEfficiencyTable({}, EcMode::interpolate), ConfigError);
  CHECK_THROWS_AS(EcEfficiencyTable({{0.1, 1.2}, {0.1, 1.3}}, EcMode::interpolate), ConfigError);
  CHECK_THROWS_AS(EcEfficiencyTable({{0.2, 1.2}, {0.1, 1.3}}, EcMode::interpolate), ConfigError);
  CHECK_THROWS_AS(EcEfficiencyTable({{0.1, 0.9}}, EcMode::interpolate), ConfigError);
  CHECK_THROWS_AS(EcEfficiencyTable({{0.6, 1.2}}, EcMode::interpolate), ConfigError);
  CHECK_THROWS_AS(EcEfficiencyTable({{0.1, 1.2}}, EcMode::least_squares_line), ConfigError);
  CHECK_NOTHROW(EcEfficiencyTable({{0.1, 1.2}}, EcMode::interpolate));
}

TEST_CASE("error correction table from file") {
  const std::string good = write_temp("qkd_ec_good.txt",
                                      "# measured code performance\n"
                                      "0.01 1.16\n"
                                      "0.05 1.16  # mid\n"
                                      "0.10 1.22\n"
                                      "0.15 1.35\n");
  const EcEfficiencyTable f = EcEfficiencyTable::from_file(good, EcMode::interpolate);
  CHECK(f.knots().size() == 4);
  CHECK(rel_err(f(0.075), 1.19) < 1e-14);

  CHECK_THROWS_AS(EcEfficiencyTable::from_file("/nonexistent/ec.txt", EcMode::interpolate),
                  IoError);
  const std::string bad = write_temp("qkd_ec_bad.txt", "0.01 1.16\n0.05\n");
  CHECK_THROWS_AS(EcEfficiencyTable::from_file(bad, EcMode::interpolate), ConfigError);
  const std::string junk = write_temp("qkd_ec_junk.txt", "0.01 1.16 extra\n");
  CHECK_THROWS_AS(EcEfficiencyTable::from_file(junk, EcMode::interpolate), ConfigError);
}

TEST_CASE("ec mode names") {
  CHECK(ec_mode_from_name("interpolate") == EcMode::interpolate);
  CHECK(ec_mode_from_name("regression") == EcMode::least_squares_line);
  CHECK_THROWS_AS(ec_mode_from_name("spline"), ConfigError);
  CHECK(ec_mode_name(EcMode::interpolate) == "interpolate");
  CHECK(ec_mode_name(EcMode::least_squares_line) == "regression");
}

TEST_CASE("residues against high-precision references") {
  const EcEfficiencyTable f;
  CHECK(rel_err(residue_lutkenhaus(0.01, 0.9, f), 0.75043184050974281) < 1e-12);
  CHECK(rel_err(residue_gllp(0.01, 0.9, f), 0.7270149292241298) < 1e-12);
  CHECK(rel_err(residue_lutkenhaus(0.05, 0.7, f), 0.13013900335532399) < 1e-12);
  CHECK(rel_err(residue_gllp(0.05, 0.7, f), 0.10791690109687792) < 1e-12);
}

TEST_CASE("residue edge behavior") {
  const EcEfficiencyTable f;
  // error-free, all single photons: the whole key survives
  CHECK(residue_lutkenhaus(0.0, 1.0, f) == 1.0);
  CHECK(residue_gllp(0.0, 1.0, f) == 1.0);
  // no provable single photons
  CHECK(residue_lutkenhaus(0.01, 0.0, f) == 0.0);
  CHECK(residue_gllp(0.01, 0.0, f) == 0.0);
  // single-photon error pushed past 1/2
  CHECK(residue_lutkenhaus(0.3, 0.5, f) == 0.0);
  CHECK(residue_gllp(0.3, 0.5, f) == 0.0);
  CHECK_THROWS_AS(residue_gllp(0.6, 0.9, f), std::domain_error);
  CHECK_THROWS_AS(residue_gllp(0.1, 1.2, f), std::domain_error);
}

TEST_CASE("tagged residue") {
  const EcEfficiencyTable f;
  const TaggedClass classes[] = {{0.5, 0.02}, {0.2, 0.5}, {0.1, 0.25}};
  CHECK(rel_err(residue_tagged(0.05, classes, f), 0.11593144602866728) < 1e-12);
  // a class at phase error 1/2 contributes nothing
  const TaggedClass only_half[] = {{0.9, 0.5}};
  CHECK(residue_tagged(0.0, only_half, f) == 0.0);
  const TaggedClass bad_frac[] = {{1.2, 0.1}};
  CHECK_THROWS_AS(residue_tagged(0.05, bad_frac, f), std::invalid_argument);
  const TaggedClass bad_phase[] = {{0.5, 1.2}};
  CHECK_THROWS_AS(residue_tagged(0.05, bad_phase, f), std::invalid_argument);
}

TEST_CASE("decoy residue equals the tagged bound on its classes") {
  const EcEfficiencyTable f;
  const auto gys = preset_by_name("GYS");
  const LinkEfficiencies link = link_efficiency(gys, 100.0);
  const DetectionStats s = detection_stats(link, 0.5, gys.e_detector);
  const PhotonClassYields cond = dark_adjusted_yields(s, 0.5, link.p_dark, gys.e_detector,
                                                      DarkErrorWeighting::emission_conditioned);
  CHECK(rel_err(residue_decoy(s, cond, f), 0.20389336473850473) < 1e-12);
  const PhotonClassYields avg = dark_adjusted_yields(s, 0.5, link.p_dark, gys.e_detector,
                                                     DarkErrorWeighting::pulse_averaged);
  CHECK(rel_err(residue_decoy(s, avg, f), 0.18978249747143025) < 1e-12);

  const TaggedClass classes[] = {
      {cond.p_s_t / s.p_d, cond.delta_s_t},
      {cond.p_dark_t / s.p_d, 0.5},
      {cond.p_m_t / s.p_d, 0.5},
  };
  CHECK(residue_decoy(s, cond, f) == residue_tagged(s.delta, classes, f));
}

TEST_CASE("protocol names") {
  for (Protocol p : all_protocols()) {
    CHECK(protocol_from_name(protocol_name(p)) == p);
  }
  CHECK(all_protocols().size() == 5);
  CHECK_THROWS_AS(protocol_from_name("bb84"), ConfigError);
}

TEST_CASE("rate for protocol, GYS at 100 km with decoys") {
  const auto gys = preset_by_name("GYS");
  const RateResult res = rate_for_protocol(Protocol::gllp_decoy, gys, 100.0, 0.5);
  CHECK(rel_err(res.eta_post, 0.20389336473850473) < 1e-12);
  CHECK(rel_err(res.r, 0.5 * res.stats.p_d * res.eta_post) < 1e-15);
  CHECK(res.b == 1e9 * res.r);  // below the throughput ceiling
  CHECK(res.distance_km == 100.0);
  CHECK(res.mu == 0.5);
}

TEST_CASE("rate for protocol, no-decoy bounds at zero distance") {
  const auto gys = preset_by_name("GYS");
  // without decoys the intensity has to track the transmittance (0.045 here);
  // at mu = 0.1 the pessimistic multiphoton bound already eats the whole key
  const RateResult zero = rate_for_protocol(Protocol::gllp, gys, 0.0, 0.1);
  CHECK(zero.r == 0.0);
  const RateResult lut = rate_for_protocol(Protocol::lutkenhaus, gys, 0.0, 0.045);
  const RateResult gllp = rate_for_protocol(Protocol::gllp, gys, 0.0, 0.045);
  CHECK(lut.r > 0.0);
  CHECK(gllp.r > 0.0);
  CHECK(lut.r >= gllp.r - 1e-15);  // collision entropy bound is the milder one
  // identity behind the CSV columns
  CHECK(rel_err(lut.r, gys.q * lut.stats.p_d * lut.eta_post) < 1e-15);
}

TEST_CASE("rate for protocol, reference curves at GYS 30 km") {
  const auto gys = preset_by_name("GYS");
  const RateResult upper = rate_for_protocol(Protocol::upper_bound, gys, 30.0, 0.5);
  CHECK(rel_err(upper.r, 0.5 * 0.0025302339194644081) < 1e-12);
  CHECK(rel_err(upper.yields.p_s_t, 0.00319967051327581) < 1e-13);
  const RateResult asym = rate_for_protocol(Protocol::asymptotic, gys, 30.0, 0.5);
  CHECK(rel_err(asym.r, 0.5 * 0.0012530939075127906) < 1e-12);
}

TEST_CASE("upper bound is maximized at mu = 1") {
  // q p_s_t (1 - H2(e)) with p_s_t ~ mu exp(-mu), so the peak sits at 1
  const auto gys = preset_by_name("GYS");
  const double at1 = rate_for_protocol(Protocol::upper_bound, gys, 50.0, 1.0).r;
  for (double mu : {0.2, 0.5, 0.9, 0.99, 1.01, 1.1, 2.0}) {
    CHECK(rate_for_protocol(Protocol::upper_bound, gys, 50.0, mu).r <= at1 * (1.0 + 1e-12));
  }
}

TEST_CASE("sift factor scales every protocol linearly") {
  ExperimentPreset gys = preset_by_name("GYS");
  ExperimentPreset full = gys;
  full.q = 1.0;
  for (Protocol p : all_protocols()) {
    const double half = rate_for_protocol(p, gys, 40.0, 0.5).r;
    const double whole = rate_for_protocol(p, full, 40.0, 0.5).r;
    CHECK(whole == 2.0 * half);
  }
}

TEST_CASE("throughput ceiling saturates when the link is short") {
  ExperimentPreset gys = preset_by_name("GYS");
  gys.nu_b = 1e3;  // deliberately tiny ceiling
  const RateResult res = rate_for_protocol(Protocol::gllp_decoy, gys, 0.0, 0.5);
  CHECK(res.b == 1e3);
}

}  // TEST_SUITE
