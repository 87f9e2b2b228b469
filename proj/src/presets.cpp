#include "qkd/presets.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "qkd/errors.hpp"

namespace qkd {

double ExperimentPreset::eta_bob() const {
  if (eta_bob_override >= 0.0) return eta_bob_override;
  return std::pow(10.0, -t_bob_db / 10.0) * eta_d;
}

double ExperimentPreset::p_dark() const { return detector_count * d_b; }

void ExperimentPreset::validate() const {
  auto bad = [this](const std::string& what) {
    throw ConfigError("parameter set '" + name + "': " + what);
  };
  if (!(alpha_db_per_km >= 0.0)) bad("alpha_db_per_km must be >= 0");
  if (!(t_bob_db >= 0.0)) bad("t_bob_db must be >= 0");
  if (!(e_detector >= 0.0 && e_detector <= 0.5)) bad("e_detector must be in [0, 0.5]");
  if (!(d_b >= 0.0 && d_b <= 1.0)) bad("d_b must be in [0, 1]");
  if (detector_count < 1) bad("detector_count must be >= 1");
  if (!(q > 0.0 && q <= 1.0)) bad("q must be in (0, 1]");
  if (!(nu_a > 0.0)) bad("nu_a must be > 0");
  if (!(nu_b > 0.0)) bad("nu_b must be > 0");
  if (eta_bob_override < 0.0 && !(eta_d > 0.0 && eta_d <= 1.0)) bad("eta_d must be in (0, 1]");
  const double eb = eta_bob();
  if (!(eb > 0.0 && eb <= 1.0)) bad("receiver transmittance must land in (0, 1]");
  if (!(p_dark() <= 1.0)) bad("total dark probability exceeds 1");
}

const std::vector<ExperimentPreset>& builtin_presets() {
  static const std::vector<ExperimentPreset> presets = [] {
    std::vector<ExperimentPreset> v;
    ExperimentPreset t8;
    t8.name = "T8";
    t8.wavelength_nm = 830.0;
    t8.alpha_db_per_km = 2.5;
    t8.t_bob_db = 8.0;
    t8.eta_d = 0.5;
    t8.e_detector = 0.01;
    t8.d_b = 5e-8;
    v.push_back(t8);

    ExperimentPreset g13;
    g13.name = "G13";
    g13.wavelength_nm = 1300.0;
    g13.alpha_db_per_km = 0.32;
    g13.t_bob_db = 3.2;
    g13.eta_d = 0.17;
    g13.e_detector = 0.0014;
    g13.d_b = 8.2e-5;
    v.push_back(g13);

    ExperimentPreset kth;
    kth.name = "KTH";
    kth.wavelength_nm = 1550.0;
    kth.alpha_db_per_km = 0.2;
    kth.t_bob_db = 1.0;
    kth.eta_d = 0.18;
    kth.e_detector = 0.01;
    kth.d_b = 2e-4;
    v.push_back(kth);

    // GYS pins the measured receiver transmittance directly.
    ExperimentPreset gys;
    gys.name = "GYS";
    gys.wavelength_nm = 1550.0;
    gys.alpha_db_per_km = 0.21;
    gys.t_bob_db = 5.0;
    gys.eta_d = 0.12;
    gys.eta_bob_override = 0.045;
    gys.e_detector = 0.033;
    gys.d_b = 8.5e-7;
    v.push_back(gys);
    return v;
  }();
  return presets;
}

const ExperimentPreset& preset_by_name(const std::string& name) {
  for (const auto& p : builtin_presets()) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const auto& p : builtin_presets()) {
    if (!known.empty()) known += ", ";
    known += p.name;
  }
  throw ConfigError("unknown preset '" + name + "' (have: " + known + ")");
}

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& text, const std::string& origin) {
  const std::string t = trim(text);
  try {
    size_t consumed = 0;
    double v = std::stod(t, &consumed);
    if (consumed != t.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(origin + ": bad numeric value for '" + key + "': '" + t + "'");
  }
}

int parse_int(const std::string& key, const std::string& text, const std::string& origin) {
  const double v = parse_double(key, text, origin);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw ConfigError(origin + ": '" + key + "' must be an integer");
  return i;
}

}  // namespace

ExperimentPreset parse_parameter_stream(std::istream& in, const std::string& origin,
                                        const ExperimentPreset* base) {
  ExperimentPreset p = base ? *base : ExperimentPreset{};
  std::map<std::string, bool> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    seen[key] = true;
    if (key == "name") p.name = val;
    else if (key == "wavelength_nm") p.wavelength_nm = parse_double(key, val, origin);
    else if (key == "alpha_db_per_km") p.alpha_db_per_km = parse_double(key, val, origin);
    else if (key == "t_bob_db") p.t_bob_db = parse_double(key, val, origin);
    else if (key == "eta_d") p.eta_d = parse_double(key, val, origin);
    else if (key == "eta_bob") p.eta_bob_override = parse_double(key, val, origin);
    else if (key == "e_detector") p.e_detector = parse_double(key, val, origin);
    else if (key == "d_b") p.d_b = parse_double(key, val, origin);
    else if (key == "detector_count") p.detector_count = parse_int(key, val, origin);
    else if (key == "q") p.q = parse_double(key, val, origin);
    else if (key == "nu_a") p.nu_a = parse_double(key, val, origin);
    else if (key == "nu_b") p.nu_b = parse_double(key, val, origin);
    else throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  if (!base) {
    for (const char* req : {"alpha_db_per_km", "e_detector", "d_b"}) {
      if (!seen.count(req))
        throw ConfigError(origin + ": missing required key '" + std::string(req) + "'");
    }
    if (!seen.count("eta_bob") && !seen.count("eta_d"))
      throw ConfigError(origin + ": needs a receiver efficiency (eta_bob or eta_d)");
    if (!seen.count("name")) p.name = "custom";
  }
  p.validate();
  return p;
}

ExperimentPreset load_parameters(const std::optional<std::string>& preset_name,
                                 const std::optional<std::string>& config_path) {
  if (!preset_name && !config_path)
    throw ConfigError("no parameters given: pass --preset and/or --config");
  const ExperimentPreset* base = nullptr;
  ExperimentPreset base_storage;
  if (preset_name) {
    base_storage = preset_by_name(*preset_name);
    base = &base_storage;
  }
  if (!config_path) return base_storage;
  std::ifstream in(*config_path);
  if (!in) throw IoError("cannot open config file '" + *config_path + "'");
  return parse_parameter_stream(in, *config_path, base);
}

}  // namespace qkd
