// qkdlab: BB84 key-rate tables from the command line.
//
// Every table command prints CSV (or tab-separated with --gnuplot-friendly)
// to stdout or to the file given with -o. decoy-solve prints key=value lines.
// Exit codes: 0 ok, 2 bad configuration, 3 out-of-domain request, 4 I/O.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qkd/decoy_estimator.hpp"
#include "qkd/errors.hpp"
#include "qkd/sweep.hpp"

namespace {

struct CommonOpts {
  std::string preset;
  std::string config;
  std::string output;
  std::string ec_mode = "interpolate";
  std::string ec_table_file;
  bool gnuplot = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--preset", o.preset, "built-in parameter set (T8, G13, KTH, GYS)");
  cmd->add_option("--config", o.config, "key=value parameter file, overrides the preset");
  cmd->add_option("-o,--output", o.output, "write the table to this file instead of stdout");
  cmd->add_option("--ec-mode", o.ec_mode,
                  "error correction evaluation: interpolate or regression")
      ->default_str("interpolate");
  cmd->add_option("--ec-table", o.ec_table_file, "error correction knot file (qber factor lines)");
  cmd->add_flag("--gnuplot-friendly", o.gnuplot, "tab separated output");
}

qkd::ExperimentPreset resolve_preset(const CommonOpts& o) {
  std::optional<std::string> preset, config;
  if (!o.preset.empty()) preset = o.preset;
  if (!o.config.empty()) config = o.config;
  return qkd::load_parameters(preset, config);
}

qkd::RateOptions resolve_rate_options(const CommonOpts& o) {
  const qkd::EcMode mode = qkd::ec_mode_from_name(o.ec_mode);
  qkd::RateOptions opts;
  if (!o.ec_table_file.empty()) {
    opts.table = qkd::EcEfficiencyTable::from_file(o.ec_table_file, mode);
  } else {
    opts.table = qkd::EcEfficiencyTable(mode);
  }
  return opts;
}

std::vector<qkd::Protocol> parse_protocols(const std::string& csv) {
  std::vector<qkd::Protocol> out;
  size_t start = 0;
  while (start <= csv.size()) {
    const size_t comma = csv.find(',', start);
    const std::string name = csv.substr(start, comma == std::string::npos ? csv.size() - start
                                                                          : comma - start);
    if (!name.empty()) out.push_back(qkd::protocol_from_name(name));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void write_output(const std::string& text, const CommonOpts& o) {
  if (o.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(o.output);
  if (!out) throw qkd::IoError("cannot open output file '" + o.output + "'");
  out << text;
  if (!out) throw qkd::IoError("failed writing output file '" + o.output + "'");
}

void run_table_command(const qkd::SweepSpec& spec, const CommonOpts& o) {
  const qkd::CsvTable table = qkd::run_sweep(spec);
  write_output(qkd::emit_csv(table, o.gnuplot ? '\t' : ','), o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BB84 weak-coherent-pulse key rate laboratory"};
  app.require_subcommand(1);

  struct {
    CommonOpts common;
    std::string range;
    double loss_db = -1.0;
  } qvm;
  auto* cmd_qvm = app.add_subcommand("qber-vs-mu", "QBER versus source intensity at fixed loss");
  add_common(cmd_qvm, qvm.common);
  cmd_qvm->add_option("--range", qvm.range, "mu range start:stop:step, step in decades")
      ->required();
  cmd_qvm->add_option("--loss-db", qvm.loss_db, "total link loss in dB")->required();

  struct {
    CommonOpts common;
    std::string range;
    std::string mu;
    std::string protocol;
  } qvd;
  auto* cmd_qvd = app.add_subcommand("qber-vs-distance", "QBER versus fiber length");
  add_common(cmd_qvd, qvd.common);
  cmd_qvd->add_option("--range", qvd.range, "distance range start:stop:step in km")->required();
  cmd_qvd->add_option("--mu", qvd.mu, "source intensity: number, 'optimal' or 'eta'")
      ->required();
  cmd_qvd->add_option("--protocol", qvd.protocol, "protocol used when --mu optimal");

  struct {
    CommonOpts common;
    std::string range;
    std::string mu;
    std::string protocol;
  } rvd;
  auto* cmd_rvd = app.add_subcommand("rate-vs-distance", "secure key rate versus fiber length");
  add_common(cmd_rvd, rvd.common);
  cmd_rvd->add_option("--range", rvd.range, "distance range start:stop:step in km")->required();
  cmd_rvd->add_option("--mu", rvd.mu, "source intensity: number, 'optimal' or 'eta'")
      ->required();
  cmd_rvd->add_option("--protocol", rvd.protocol,
                      "comma separated protocols (default: all five)");

  struct {
    CommonOpts common;
    std::string range;
    std::string protocol;
  } ove;
  auto* cmd_ove = app.add_subcommand("optimal-mu-vs-eta",
                                     "optimal intensity versus transmittance on dark-free links");
  add_common(cmd_ove, ove.common);
  cmd_ove->add_option("--range", ove.range, "eta range start:stop:step, step in decades")
      ->required();
  cmd_ove->add_option("--protocol", ove.protocol, "protocol to optimize (default: gllp)");

  struct {
    CommonOpts common;
    std::string range;
    std::string protocol;
  } ovd;
  auto* cmd_ovd = app.add_subcommand("optimal-mu-vs-distance",
                                     "optimal intensity versus fiber length");
  add_common(cmd_ovd, ovd.common);
  cmd_ovd->add_option("--range", ovd.range, "distance range start:stop:step in km")->required();
  cmd_ovd->add_option("--protocol", ovd.protocol, "protocol to optimize (default: gllp-decoy)");

  struct {
    CommonOpts common;
    std::string mu;
    std::string protocol;
    double threshold = 0.0;
  } cut;
  auto* cmd_cut = app.add_subcommand("cutoff", "largest distance with rate above a threshold");
  add_common(cmd_cut, cut.common);
  cmd_cut->add_option("--mu", cut.mu, "source intensity: number, 'optimal' or 'eta'")
      ->required();
  cmd_cut->add_option("--protocol", cut.protocol,
                      "comma separated protocols (default: gllp-decoy)");
  cmd_cut->add_option("--threshold", cut.threshold, "rate threshold (default 0)");

  struct {
    CommonOpts common;
    std::string decoy_file;
    double p_dark = -1.0;
  } dec;
  auto* cmd_dec = app.add_subcommand("decoy-solve",
                                     "photon-number yields from measured decoy intensities");
  add_common(cmd_dec, dec.common);
  cmd_dec->add_option("--decoy-file", dec.decoy_file, "lines of 'mu p_d delta'")->required();
  cmd_dec->add_option("--p-dark", dec.p_dark,
                      "dark rate override (default: from preset/config)");

  try {
    app.parse(argc, argv);

    if (cmd_qvm->parsed()) {
      qkd::SweepSpec spec;
      spec.command = qkd::SweepCommand::qber_vs_mu;
      spec.preset = resolve_preset(qvm.common);
      spec.range = qkd::parse_range(qvm.range);
      spec.loss_db = qvm.loss_db;
      spec.rate_options = resolve_rate_options(qvm.common);
      run_table_command(spec, qvm.common);
    } else if (cmd_qvd->parsed()) {
      qkd::SweepSpec spec;
      spec.command = qkd::SweepCommand::qber_vs_distance;
      spec.preset = resolve_preset(qvd.common);
      spec.range = qkd::parse_range(qvd.range);
      spec.mu = qkd::MuPolicy::parse(qvd.mu);
      if (!qvd.protocol.empty()) spec.protocols = parse_protocols(qvd.protocol);
      spec.rate_options = resolve_rate_options(qvd.common);
      run_table_command(spec, qvd.common);
    } else if (cmd_rvd->parsed()) {
      qkd::SweepSpec spec;
      spec.command = qkd::SweepCommand::rate_vs_distance;
      spec.preset = resolve_preset(rvd.common);
      spec.range = qkd::parse_range(rvd.range);
      spec.mu = qkd::MuPolicy::parse(rvd.mu);
      if (!rvd.protocol.empty()) spec.protocols = parse_protocols(rvd.protocol);
      spec.rate_options = resolve_rate_options(rvd.common);
      run_table_command(spec, rvd.common);
    } else if (cmd_ove->parsed()) {
      qkd::SweepSpec spec;
      spec.command = qkd::SweepCommand::optimal_mu_vs_eta;
      spec.preset = resolve_preset(ove.common);
      spec.range = qkd::parse_range(ove.range);
      if (!ove.protocol.empty()) spec.protocols = parse_protocols(ove.protocol);
      spec.rate_options = resolve_rate_options(ove.common);
      run_table_command(spec, ove.common);
    } else if (cmd_ovd->parsed()) {
      qkd::SweepSpec spec;
      spec.command = qkd::SweepCommand::optimal_mu_vs_distance;
      spec.preset = resolve_preset(ovd.common);
      spec.range = qkd::parse_range(ovd.range);
      if (!ovd.protocol.empty()) spec.protocols = parse_protocols(ovd.protocol);
      spec.rate_options = resolve_rate_options(ovd.common);
      run_table_command(spec, ovd.common);
    } else if (cmd_cut->parsed()) {
      qkd::SweepSpec spec;
      spec.command = qkd::SweepCommand::cutoff;
      spec.preset = resolve_preset(cut.common);
      spec.mu = qkd::MuPolicy::parse(cut.mu);
      spec.threshold = cut.threshold;
      if (!cut.protocol.empty()) spec.protocols = parse_protocols(cut.protocol);
      spec.rate_options = resolve_rate_options(cut.common);
      run_table_command(spec, cut.common);
    } else if (cmd_dec->parsed()) {
      const auto observations = qkd::read_decoy_file(dec.decoy_file);
      double p_dark = dec.p_dark;
      if (p_dark < 0.0) {
        if (dec.common.preset.empty() && dec.common.config.empty())
          throw qkd::ConfigError("decoy-solve needs --p-dark or a preset/config for the dark rate");
        p_dark = resolve_preset(dec.common).p_dark();
      }
      const qkd::YieldEstimate est = qkd::multi_decoy_solve(observations, p_dark);
      write_output(qkd::serialize_yield_estimate(est), dec.common);
    }
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const qkd::IoError& e) {
    std::cerr << "qkdlab: " << e.what() << "\n";
    return 4;
  } catch (const qkd::ConfigError& e) {
    std::cerr << "qkdlab: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "qkdlab: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "qkdlab: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "qkdlab: " << e.what() << "\n";
    return 1;
  }
}
