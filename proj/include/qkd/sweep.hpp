#pragma once

#include <limits>
#include <string>
#include <vector>

#include "qkd/optimizer.hpp"

namespace qkd {

// Scientific notation with nine fractional digits and a compact exponent:
// 0.5 -> "5.000000000e-1", 0 -> "0.000000000e0". Byte-stable across runs.
std::string format_sci(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string emit_csv(const CsvTable& table, char sep = ',');

// Inclusive start:stop:step. For intensity and transmittance sweeps the step
// is in decades (log-spaced points); for distance sweeps it is linear km.
struct SweepRange {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;
};

SweepRange parse_range(const std::string& text);
std::vector<double> linear_grid(const SweepRange& range);
std::vector<double> decade_grid(const SweepRange& range);

enum class SweepCommand {
  qber_vs_mu,
  qber_vs_distance,
  rate_vs_distance,
  optimal_mu_vs_eta,
  optimal_mu_vs_distance,
  cutoff,
};

struct SweepSpec {
  SweepCommand command = SweepCommand::rate_vs_distance;
  ExperimentPreset preset;
  std::vector<Protocol> protocols;  // command-specific default when empty
  MuPolicy mu = MuPolicy::fixed_value(0.1);
  SweepRange range;
  // qber_vs_mu: total link loss in dB, eta = 10^(-loss/10), receiver ideal.
  double loss_db = std::numeric_limits<double>::quiet_NaN();
  double threshold = 0.0;  // cutoff command
  RateOptions rate_options;
};

// Pure sweep driver: every CLI table command goes through here.
CsvTable run_sweep(const SweepSpec& spec);

}  // namespace qkd
