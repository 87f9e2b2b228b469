#pragma once

#include <span>
#include <string>
#include <vector>

#include "qkd/channel_model.hpp"

namespace qkd {

// Shannon entropy of a bit, in bits. Defined on [0, 1], zero at the ends.
double binary_entropy(double x);

enum class EcMode { interpolate, least_squares_line };

EcMode ec_mode_from_name(const std::string& name);
std::string ec_mode_name(EcMode mode);

struct EcKnot {
  double qber = 0.0;
  double factor = 1.0;
};

// Error correction inefficiency f(delta) >= 1 relative to the Shannon limit,
// tabulated from measured code performance. Evaluation either interpolates
// piecewise linearly between knots (clamped flat outside the knot range) or
// uses a least squares line through the knots (clamped below at 1).
class EcEfficiencyTable {
 public:
  explicit EcEfficiencyTable(EcMode mode = EcMode::interpolate);
  EcEfficiencyTable(std::vector<EcKnot> knots, EcMode mode);
  static EcEfficiencyTable from_file(const std::string& path, EcMode mode);

  double operator()(double qber) const;

  EcMode mode() const { return mode_; }
  const std::vector<EcKnot>& knots() const { return knots_; }
  double line_slope() const;
  double line_intercept() const;

 private:
  void validate_and_fit();

  std::vector<EcKnot> knots_;
  EcMode mode_ = EcMode::interpolate;
  double slope_ = 0.0;
  double intercept_ = 0.0;
  bool fitted_ = false;
};

// Secure fraction of the sifted key that survives error correction and
// privacy amplification, per post-processing analysis. All residues take the
// observed QBER delta, a lower bound f1 on the single-photon click fraction
// and the error correction table; they return 0 when no key is provable.
//
// residue_lutkenhaus uses the single-photon collision entropy bound
// 1 - log2(1 + 4x - 4x^2) with x = delta / f1; residue_gllp compresses by
// 1 - H2(x) on the single-photon fraction. Both subtract f(delta) H2(delta)
// for error correction.
double residue_lutkenhaus(double delta, double f1, const EcEfficiencyTable& f);
double residue_gllp(double delta, double f1, const EcEfficiencyTable& f);

// One photon-number class of clicks: its fraction of all clicks and the
// phase error rate charged to it.
struct TaggedClass {
  double fraction = 0.0;
  double phase_error = 0.5;
};

// General tagged-signal bound: error correction paid on the full sifted key,
// privacy amplification credited per class, sum over classes of
// fraction * (1 - H2(phase_error)).
double residue_tagged(double delta_bit, std::span<const TaggedClass> classes,
                      const EcEfficiencyTable& f);

// Tagged bound with the decoy-estimated classes: single photons at their
// measured error rate, dark and multiphoton clicks charged 1/2.
double residue_decoy(const DetectionStats& stats, const PhotonClassYields& yields,
                     const EcEfficiencyTable& f);

enum class Protocol { lutkenhaus, gllp, gllp_decoy, upper_bound, asymptotic };

Protocol protocol_from_name(const std::string& name);
std::string protocol_name(Protocol p);
const std::vector<Protocol>& all_protocols();

struct RateOptions {
  EcEfficiencyTable table;  // defaults to the built-in knots, interpolate mode
};

struct RateResult {
  Protocol protocol = Protocol::gllp;
  double distance_km = 0.0;
  double mu = 0.0;
  LinkEfficiencies link;
  DetectionStats stats;
  PhotonClassYields yields;  // emission-conditioned errors (decoy rate path)
  double eta_post = 0.0;     // usable fraction of sifted clicks: r / (q p_d)
  double r = 0.0;            // secure bits per source pulse
  double b = 0.0;            // secure bits per second
};

// Secure key rate of one protocol on one link. lutkenhaus and gllp use the
// pessimistic single-photon fraction (no decoy information); gllp_decoy uses
// the decoy-estimated classes; upper_bound is q p_s_t (1 - H2(e_detector));
// asymptotic is the infinite-decoy reference with dark counts ignored.
RateResult rate_for_link(Protocol protocol, const LinkEfficiencies& link,
                         const ExperimentPreset& preset, double mu,
                         const RateOptions& options = RateOptions());
RateResult rate_for_protocol(Protocol protocol, const ExperimentPreset& preset,
                             double distance_km, double mu, const RateOptions& options = RateOptions());

}  // namespace qkd
