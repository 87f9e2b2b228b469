#include "qkd/sweep.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include "qkd/errors.hpp"

namespace qkd {

std::string format_sci(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[64];
  const auto out = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 9);
  std::string s(buf, out.ptr);
  const auto e = s.find('e');
  const std::string mantissa = s.substr(0, e);
  std::string exponent = s.substr(e + 1);
  const bool neg = exponent[0] == '-';
  size_t i = (neg || exponent[0] == '+') ? 1 : 0;
  while (i + 1 < exponent.size() && exponent[i] == '0') ++i;
  return mantissa + "e" + (neg ? "-" : "") + exponent.substr(i);
}

std::string emit_csv(const CsvTable& table, char sep) {
  std::string out;
  auto join = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out += sep;
      out += cells[i];
    }
    out += '\n';
  };
  join(table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw std::logic_error("CSV row width does not match the header");
    join(row);
  }
  return out;
}

SweepRange parse_range(const std::string& text) {
  const auto c1 = text.find(':');
  const auto c2 = c1 == std::string::npos ? std::string::npos : text.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos || text.find(':', c2 + 1) != std::string::npos)
    throw ConfigError("bad range '" + text + "' (want start:stop:step)");
  auto num = [&](const std::string& part) {
    try {
      size_t consumed = 0;
      const double v = std::stod(part, &consumed);
      if (consumed != part.size()) throw std::invalid_argument("trailing junk");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("bad range component '" + part + "' in '" + text + "'");
    }
  };
  SweepRange r;
  r.start = num(text.substr(0, c1));
  r.stop = num(text.substr(c1 + 1, c2 - c1 - 1));
  r.step = num(text.substr(c2 + 1));
  if (!(r.step > 0.0)) throw ConfigError("range step must be > 0");
  if (!(r.stop >= r.start)) throw ConfigError("range stop must be >= start");
  return r;
}

std::vector<double> linear_grid(const SweepRange& range) {
  if (!(range.step > 0.0)) throw std::invalid_argument("range step must be > 0");
  if (!(range.stop >= range.start)) throw std::invalid_argument("range stop must be >= start");
  const int n = static_cast<int>(std::floor((range.stop - range.start) / range.step + 1e-9));
  std::vector<double> grid(n + 1);
  for (int k = 0; k <= n; ++k) grid[k] = range.start + k * range.step;
  return grid;
}

std::vector<double> decade_grid(const SweepRange& range) {
  if (!(range.start > 0.0)) throw std::invalid_argument("log-spaced range needs start > 0");
  if (!(range.step > 0.0)) throw std::invalid_argument("range step must be > 0");
  if (!(range.stop >= range.start)) throw std::invalid_argument("range stop must be >= start");
  const double l0 = std::log10(range.start);
  const double l1 = std::log10(range.stop);
  const int n = static_cast<int>(std::floor((l1 - l0) / range.step + 1e-9));
  std::vector<double> grid(n + 1);
  for (int k = 0; k <= n; ++k) grid[k] = std::pow(10.0, l0 + k * range.step);
  return grid;
}

namespace {

std::vector<Protocol> protocols_or(const SweepSpec& spec, std::initializer_list<Protocol> def) {
  if (!spec.protocols.empty()) return spec.protocols;
  return def;
}

CsvTable sweep_qber_vs_mu(const SweepSpec& spec) {
  if (!(spec.loss_db >= 0.0))
    throw ConfigError("qber-vs-mu needs --loss-db (total link loss, dB)");
  const LinkEfficiencies link =
      link_from_eta(std::pow(10.0, -spec.loss_db / 10.0), spec.preset.p_dark());
  CsvTable t;
  t.header = {"mu",  "eta", "p_dark", "p_signal",  "p_s",
              "p_m", "p_d", "qber",   "f1_decoy",  "f1_pessimistic"};
  for (double mu : decade_grid(spec.range)) {
    const DetectionStats s = detection_stats(link, mu, spec.preset.e_detector);
    t.rows.push_back({format_sci(mu), format_sci(link.eta), format_sci(link.p_dark),
                      format_sci(s.p_signal), format_sci(s.p_s), format_sci(s.p_m),
                      format_sci(s.p_d), format_sci(s.delta), format_sci(s.f1_decoy),
                      format_sci(s.f1_pessimistic)});
  }
  return t;
}

CsvTable sweep_qber_vs_distance(const SweepSpec& spec) {
  const Protocol prot = protocols_or(spec, {Protocol::gllp_decoy}).front();
  CsvTable t;
  t.header = {"distance_km", "t_ab", "eta", "p_dark", "mu",       "p_signal",
              "p_s",         "p_m",  "p_d", "qber",   "f1_decoy", "f1_pessimistic"};
  for (double d : linear_grid(spec.range)) {
    const LinkEfficiencies link = link_efficiency(spec.preset, d);
    const double mu = resolve_mu(spec.mu, prot, link, spec.preset, spec.rate_options);
    const DetectionStats s = detection_stats(link, mu, spec.preset.e_detector);
    t.rows.push_back({format_sci(d), format_sci(link.t_ab), format_sci(link.eta),
                      format_sci(link.p_dark), format_sci(mu), format_sci(s.p_signal),
                      format_sci(s.p_s), format_sci(s.p_m), format_sci(s.p_d),
                      format_sci(s.delta), format_sci(s.f1_decoy),
                      format_sci(s.f1_pessimistic)});
  }
  return t;
}

CsvTable sweep_rate_vs_distance(const SweepSpec& spec) {
  const std::vector<Protocol> prots =
      protocols_or(spec, {Protocol::lutkenhaus, Protocol::gllp, Protocol::gllp_decoy,
                          Protocol::upper_bound, Protocol::asymptotic});
  CsvTable t;
  t.header = {"distance_km", "protocol", "mu",        "q",         "t_ab",
              "eta",         "p_dark",   "p_d",       "qber",      "f1_pessimistic",
              "p_s_tilde",   "delta_1",  "eta_post",  "r",         "b"};
  for (double d : linear_grid(spec.range)) {
    const LinkEfficiencies link = link_efficiency(spec.preset, d);
    for (Protocol prot : prots) {
      const double mu = resolve_mu(spec.mu, prot, link, spec.preset, spec.rate_options);
      const RateResult res = rate_for_link(prot, link, spec.preset, mu, spec.rate_options);
      t.rows.push_back({format_sci(d), protocol_name(prot), format_sci(mu),
                        format_sci(spec.preset.q), format_sci(link.t_ab), format_sci(link.eta),
                        format_sci(link.p_dark), format_sci(res.stats.p_d),
                        format_sci(res.stats.delta), format_sci(res.stats.f1_pessimistic),
                        format_sci(res.yields.p_s_t), format_sci(res.yields.delta_s_t),
                        format_sci(res.eta_post), format_sci(res.r), format_sci(res.b)});
    }
  }
  return t;
}

CsvTable sweep_optimal_mu_vs_eta(const SweepSpec& spec) {
  const Protocol prot = protocols_or(spec, {Protocol::gllp}).front();
  CsvTable t;
  t.header = {"eta", "protocol", "mu_opt", "r", "iterations", "converged"};
  for (double eta : decade_grid(spec.range)) {
    // dark-free link: this scan probes the loss-scaling law itself
    const LinkEfficiencies link = link_from_eta(eta, 0.0);
    const OptimizationResult res =
        maximize_rate_over_mu_for_link(prot, link, spec.preset, 1e-6, 1.0, 1e-7,
                                       spec.rate_options);
    t.rows.push_back({format_sci(eta), protocol_name(prot), format_sci(res.argmax),
                      format_sci(res.value), std::to_string(res.iterations),
                      res.converged ? "1" : "0"});
  }
  return t;
}

CsvTable sweep_optimal_mu_vs_distance(const SweepSpec& spec) {
  const Protocol prot = protocols_or(spec, {Protocol::gllp_decoy}).front();
  CsvTable t;
  t.header = {"distance_km", "eta", "protocol", "mu_opt", "r", "iterations", "converged"};
  for (double d : linear_grid(spec.range)) {
    const LinkEfficiencies link = link_efficiency(spec.preset, d);
    const OptimizationResult res =
        maximize_rate_over_mu_for_link(prot, link, spec.preset, 1e-6, 1.0, 1e-7,
                                       spec.rate_options);
    t.rows.push_back({format_sci(d), format_sci(link.eta), protocol_name(prot),
                      format_sci(res.argmax), format_sci(res.value),
                      std::to_string(res.iterations), res.converged ? "1" : "0"});
  }
  return t;
}

CsvTable sweep_cutoff(const SweepSpec& spec) {
  const std::vector<Protocol> prots = protocols_or(spec, {Protocol::gllp_decoy});
  CsvTable t;
  t.header = {"protocol", "mu_policy", "threshold", "cutoff_km", "rate_at_cutoff", "iterations"};
  for (Protocol prot : prots) {
    const CutoffResult res =
        cutoff_distance(prot, spec.preset, spec.mu, spec.threshold, spec.rate_options);
    t.rows.push_back({protocol_name(prot), spec.mu.to_string(), format_sci(spec.threshold),
                      format_sci(res.distance_km), format_sci(res.rate_at_cutoff),
                      std::to_string(res.iterations)});
  }
  return t;
}

}  // namespace

CsvTable run_sweep(const SweepSpec& spec) {
  spec.preset.validate();
  switch (spec.command) {
    case SweepCommand::qber_vs_mu: return sweep_qber_vs_mu(spec);
    case SweepCommand::qber_vs_distance: return sweep_qber_vs_distance(spec);
    case SweepCommand::rate_vs_distance: return sweep_rate_vs_distance(spec);
    case SweepCommand::optimal_mu_vs_eta: return sweep_optimal_mu_vs_eta(spec);
    case SweepCommand::optimal_mu_vs_distance: return sweep_optimal_mu_vs_distance(spec);
    case SweepCommand::cutoff: return sweep_cutoff(spec);
  }
  throw std::invalid_argument("bad sweep command");
}

}  // namespace qkd
