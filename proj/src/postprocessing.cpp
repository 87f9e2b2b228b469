#include "qkd/postprocessing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qkd/errors.hpp"

namespace qkd {

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("binary_entropy: argument outside [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

EcMode ec_mode_from_name(const std::string& name) {
  if (name == "interpolate") return EcMode::interpolate;
  if (name == "regression") return EcMode::least_squares_line;
  throw ConfigError("unknown ec mode '" + name + "' (have: interpolate, regression)");
}

std::string ec_mode_name(EcMode mode) {
  return mode == EcMode::interpolate ? "interpolate" : "regression";
}

namespace {

std::vector<EcKnot> builtin_knots() {
  return {{0.01, 1.16}, {0.05, 1.16}, {0.10, 1.22}, {0.15, 1.35}};
}

}  // namespace

EcEfficiencyTable::EcEfficiencyTable(EcMode mode) : knots_(builtin_knots()), mode_(mode) {
  validate_and_fit();
}

EcEfficiencyTable::EcEfficiencyTable(std::vector<EcKnot> knots, EcMode mode)
    : knots_(std::move(knots)), mode_(mode) {
  validate_and_fit();
}

void EcEfficiencyTable::validate_and_fit() {
  if (knots_.empty()) throw ConfigError("error correction table needs at least one knot");
  for (size_t i = 0; i < knots_.size(); ++i) {
    if (!(knots_[i].qber >= 0.0 && knots_[i].qber <= 0.5))
      throw ConfigError("error correction knot QBER outside [0, 0.5]");
    if (!(knots_[i].factor >= 1.0))
      throw ConfigError("error correction factor below the Shannon limit");
    if (i > 0 && !(knots_[i].qber > knots_[i - 1].qber))
      throw ConfigError("error correction knots must have strictly increasing QBER");
  }
  if (knots_.size() >= 2) {
    const double n = static_cast<double>(knots_.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& k : knots_) {
      sx += k.qber;
      sy += k.factor;
      sxx += k.qber * k.qber;
      sxy += k.qber * k.factor;
    }
    slope_ = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    intercept_ = (sy - slope_ * sx) / n;
    fitted_ = true;
  }
  if (mode_ == EcMode::least_squares_line && !fitted_)
    throw ConfigError("least squares line needs at least two knots");
}

double EcEfficiencyTable::line_slope() const {
  if (!fitted_) throw ConfigError("least squares line needs at least two knots");
  return slope_;
}

double EcEfficiencyTable::line_intercept() const {
  if (!fitted_) throw ConfigError("least squares line needs at least two knots");
  return intercept_;
}

double EcEfficiencyTable::operator()(double qber) const {
  if (!(qber >= 0.0 && qber <= 0.5)) throw std::domain_error("QBER outside [0, 0.5]");
  if (mode_ == EcMode::least_squares_line) return std::max(1.0, intercept_ + slope_ * qber);
  if (qber <= knots_.front().qber) return knots_.front().factor;
  if (qber >= knots_.back().qber) return knots_.back().factor;
  for (size_t i = 1; i < knots_.size(); ++i) {
    if (qber <= knots_[i].qber) {
      const auto& a = knots_[i - 1];
      const auto& b = knots_[i];
      return a.factor + (qber - a.qber) * (b.factor - a.factor) / (b.qber - a.qber);
    }
  }
  return knots_.back().factor;  // unreachable
}

EcEfficiencyTable EcEfficiencyTable::from_file(const std::string& path, EcMode mode) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open error correction table '" + path + "'");
  std::vector<EcKnot> knots;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    double qber, factor;
    if (!(row >> qber)) continue;  // blank or comment-only line
    std::string extra;
    if (!(row >> factor) || (row >> extra))
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'qber factor'");
    knots.push_back({qber, factor});
  }
  return EcEfficiencyTable(std::move(knots), mode);
}

namespace {

void check_residue_args(double delta, double f1) {
  if (!(delta >= 0.0 && delta <= 0.5)) throw std::domain_error("QBER outside [0, 0.5]");
  if (!(f1 >= 0.0 && f1 <= 1.0))
    throw std::domain_error("single-photon fraction outside [0, 1]");
}

}  // namespace

double residue_lutkenhaus(double delta, double f1, const EcEfficiencyTable& f) {
  check_residue_args(delta, f1);
  if (f1 <= 0.0) return 0.0;
  const double x = delta / f1;  // error rate concentrated on single-photon clicks
  if (x > 0.5) return 0.0;
  const double pa = f1 * (1.0 - std::log2(1.0 + 4.0 * x - 4.0 * x * x));
  return std::max(0.0, pa - f(delta) * binary_entropy(delta));
}

double residue_gllp(double delta, double f1, const EcEfficiencyTable& f) {
  check_residue_args(delta, f1);
  if (f1 <= 0.0) return 0.0;
  const double x = delta / f1;
  if (x > 0.5) return 0.0;
  const double pa = f1 * (1.0 - binary_entropy(x));
  return std::max(0.0, pa - f(delta) * binary_entropy(delta));
}

double residue_tagged(double delta_bit, std::span<const TaggedClass> classes,
                      const EcEfficiencyTable& f) {
  if (!(delta_bit >= 0.0 && delta_bit <= 0.5)) throw std::domain_error("QBER outside [0, 0.5]");
  double pa = 0.0;
  for (const auto& c : classes) {
    if (!(c.fraction >= 0.0 && c.fraction <= 1.0))
      throw std::invalid_argument("class fraction outside [0, 1]");
    if (!(c.phase_error >= 0.0 && c.phase_error <= 1.0))
      throw std::invalid_argument("class phase error outside [0, 1]");
    pa += c.fraction * (1.0 - binary_entropy(c.phase_error));
  }
  return std::max(0.0, pa - f(delta_bit) * binary_entropy(delta_bit));
}

double residue_decoy(const DetectionStats& stats, const PhotonClassYields& yields,
                     const EcEfficiencyTable& f) {
  if (stats.p_d <= 0.0) return 0.0;
  const TaggedClass classes[] = {
      {yields.p_s_t / stats.p_d, yields.delta_s_t},
      {yields.p_dark_t / stats.p_d, 0.5},
      {yields.p_m_t / stats.p_d, 0.5},
  };
  return residue_tagged(stats.delta, classes, f);
}

Protocol protocol_from_name(const std::string& name) {
  if (name == "lutkenhaus") return Protocol::lutkenhaus;
  if (name == "gllp") return Protocol::gllp;
  if (name == "gllp-decoy") return Protocol::gllp_decoy;
  if (name == "upper-bound") return Protocol::upper_bound;
  if (name == "asymptotic") return Protocol::asymptotic;
  throw ConfigError("unknown protocol '" + name +
                    "' (have: lutkenhaus, gllp, gllp-decoy, upper-bound, asymptotic)");
}

std::string protocol_name(Protocol p) {
  switch (p) {
    case Protocol::lutkenhaus: return "lutkenhaus";
    case Protocol::gllp: return "gllp";
    case Protocol::gllp_decoy: return "gllp-decoy";
    case Protocol::upper_bound: return "upper-bound";
    case Protocol::asymptotic: return "asymptotic";
  }
  throw std::invalid_argument("bad protocol enum");
}

const std::vector<Protocol>& all_protocols() {
  static const std::vector<Protocol> all = {Protocol::lutkenhaus, Protocol::gllp,
                                            Protocol::gllp_decoy, Protocol::upper_bound,
                                            Protocol::asymptotic};
  return all;
}

RateResult rate_for_link(Protocol protocol, const LinkEfficiencies& link,
                         const ExperimentPreset& preset, double mu, const RateOptions& options) {
  if (!(mu >= 0.0)) throw std::domain_error("mu must be >= 0");
  RateResult res;
  res.protocol = protocol;
  res.mu = mu;
  res.link = link;
  res.stats = detection_stats(link, mu, preset.e_detector);
  res.yields = dark_adjusted_yields(res.stats, mu, link.p_dark, preset.e_detector,
                                    DarkErrorWeighting::emission_conditioned);
  const EcEfficiencyTable& f = options.table;
  const DetectionStats& s = res.stats;
  double val = 0.0;  // secure fraction per emitted pulse, before the sift factor
  switch (protocol) {
    case Protocol::lutkenhaus:
      val = s.p_d * residue_lutkenhaus(s.delta, s.f1_pessimistic, f);
      break;
    case Protocol::gllp:
      val = s.p_d * residue_gllp(s.delta, s.f1_pessimistic, f);
      break;
    case Protocol::gllp_decoy:
      val = s.p_d * residue_decoy(s, res.yields, f);
      break;
    case Protocol::upper_bound:
      // everything the single-photon class could ever deliver
      val = res.yields.p_s_t * (1.0 - binary_entropy(preset.e_detector));
      break;
    case Protocol::asymptotic: {
      // infinite-decoy reference, dark counts ignored on both terms
      const double h = binary_entropy(preset.e_detector);
      val = std::max(0.0, -s.p_signal * f(preset.e_detector) * h + s.p_s * (1.0 - h));
      break;
    }
  }
  res.r = preset.q * val;
  res.eta_post = s.p_d > 0.0 ? val / s.p_d : 0.0;
  res.b = key_bit_rate(res.r, preset.nu_a, preset.nu_b);
  return res;
}

RateResult rate_for_protocol(Protocol protocol, const ExperimentPreset& preset,
                             double distance_km, double mu, const RateOptions& options) {
  RateResult res = rate_for_link(protocol, link_efficiency(preset, distance_km), preset, mu,
                                 options);
  res.distance_km = distance_km;
  return res;
}

}  // namespace qkd
