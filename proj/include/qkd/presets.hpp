#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qkd {

// Source, fiber and detector parameters for one BB84 link.
//
// Receiver transmittance is normally 10^(-t_bob_db/10) * eta_d; a preset can
// pin the combined value directly through eta_bob_override (used when only
// the product was measured).
struct ExperimentPreset {
  std::string name = "custom";
  double wavelength_nm = 0.0;      // informational
  double alpha_db_per_km = 0.0;    // fiber attenuation
  double t_bob_db = 0.0;           // internal loss on the receiver side
  double eta_d = 1.0;              // detector quantum efficiency
  double eta_bob_override = -1.0;  // combined receiver transmittance, if >= 0
  double e_detector = 0.0;         // intrinsic misalignment error
  double d_b = 0.0;                // dark count probability per detector per slot
  int detector_count = 2;
  double q = 0.5;                  // basis sift factor
  double nu_a = 1e9;               // source clock, Hz
  double nu_b = 1e6;               // post-processing throughput ceiling, Hz

  double eta_bob() const;  // receiver transmittance including the detector
  double p_dark() const;   // total dark probability: detector_count * d_b
  void validate() const;   // throws ConfigError when a field is out of range
};

// Built-in parameter sets: T8, G13, KTH, GYS.
const std::vector<ExperimentPreset>& builtin_presets();
const ExperimentPreset& preset_by_name(const std::string& name);

// key = value parameter files, '#' starts a comment. When base is given the
// file only overrides fields; standalone files must define alpha_db_per_km,
// e_detector, d_b and a receiver efficiency (eta_bob or eta_d).
ExperimentPreset parse_parameter_stream(std::istream& in, const std::string& origin,
                                        const ExperimentPreset* base);
ExperimentPreset load_parameters(const std::optional<std::string>& preset_name,
                                 const std::optional<std::string>& config_path);

}  // namespace qkd
