// Command-line front end: simulate, interpolate, reconstruct, table1, figure4.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "eit/forward.hpp"
#include "eit/geometry.hpp"
#include "eit/harness.hpp"
#include "eit/interpolate.hpp"
#include "eit/io.hpp"
#include "eit/reconstruct.hpp"
#include "eit/text.hpp"

namespace {

struct Options {
  std::string config_path;
  long long seed = -1;
  std::vector<double> noise;
  std::vector<double> radii;
  std::vector<std::string> methods;
  std::vector<int> electrodes;
  std::vector<std::string> overrides;
  std::string out;
  std::string input;
  std::string mask;
  bool sensitivity = false;
};

eit::ExperimentConfig resolve(const Options& o) {
  eit::ExperimentConfig config = o.config_path.empty() ? eit::ExperimentConfig{} : eit::load_config(o.config_path);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    config.set(std::string(eit::trim(kv.substr(0, eq))), std::string(eit::trim(kv.substr(eq + 1))));
  }
  if (o.seed >= 0) config.seed = static_cast<std::uint64_t>(o.seed);
  if (!o.noise.empty()) config.noise_levels = o.noise;
  if (!o.radii.empty()) config.radii = o.radii;
  if (!o.methods.empty()) config.methods = o.methods;
  if (!o.electrodes.empty()) {
    config.electrodes = o.electrodes;
    config.figure_electrodes = o.electrodes.front();
  }
  if (!o.out.empty()) config.output_dir = o.out;
  config.validate();
  return config;
}

std::string mesh_text(const eit::Mesh& mesh) {
  std::ostringstream out;
  eit::write_mesh(out, mesh);
  return out.str();
}

void add_measurement(eit::RunArtifacts& a, const std::string& stem, const eit::MeasurementMatrix& v) {
  a.add(stem + ".csv", eit::matrix_csv(v.values));
  a.add(stem + ".mask.csv", eit::mask_text(v));
}

void finish(const eit::ExperimentConfig& config, const eit::RunArtifacts& artifacts) {
  eit::export_run(config, artifacts, config.output_dir);
  std::cout << "wrote " << artifacts.files.size() + 2 << " files to " << config.output_dir << '\n';
}

int run_simulate(const Options& o) {
  const auto config = resolve(o);
  const int m = config.figure_electrodes;
  const auto sim = eit::simulate(config, m);
  eit::RunArtifacts a;
  a.add("forward_mesh.txt", mesh_text(sim.mesh.mesh));
  add_measurement(a, "U_reference", sim.u_reference);
  add_measurement(a, "U", sim.u_perturbed);
  add_measurement(a, "V", sim.v);
  for (double delta : config.noise_levels) {
    const auto noisy = eit::add_noise(sim.v, {delta, config.seed, config.symmetrize_noise});
    add_measurement(a, "V_delta_" + eit::format_double(delta), noisy);
  }
  if (o.sensitivity) {
    const eit::ReconstructionModel model(config, m);
    a.add("reconstruction_mesh.txt", mesh_text(model.mesh().mesh));
    std::ostringstream s;
    eit::write_sensitivity_csv(s, model.sensitivity());
    a.add("sensitivity.csv", s.str());
  }
  std::cout << "m = " << m << ", forward nodes " << sim.mesh.mesh.node_count() << ", ||V||_F = "
            << eit::format_double(sim.v.values.norm()) << '\n';
  finish(config, a);
  return 0;
}

eit::MeasurementMatrix input_or_simulated(const Options& o, const eit::ExperimentConfig& config, bool noisy) {
  if (!o.input.empty()) return eit::load_measurement(o.input, o.mask);
  const auto sim = eit::simulate(config, config.figure_electrodes);
  if (!noisy) return sim.v;
  return eit::add_noise(sim.v, {config.noise_levels.front(), config.seed, config.symmetrize_noise});
}

bool fully_known(const eit::Matrix& v) { return v.allFinite(); }

int run_interpolate(const Options& o) {
  const auto config = resolve(o);
  const auto v = input_or_simulated(o, config, false);
  const auto masked = eit::mask_current_driven(v);
  eit::ReconstructionModel model(config, v.m());
  eit::RunArtifacts a;
  add_measurement(a, "input", v);
  std::ostringstream errors;
  errors << "method,radius,relative_error\n";
  for (const auto& spec : eit::expand_methods(config)) {
    const auto filled = model.interpolate(spec.method, spec.radius, masked);
    std::string name = spec.method;
    if (spec.method == "geometric") name += "_r" + eit::format_double(spec.radius);
    add_measurement(a, "interpolated_" + name, filled);
    if (fully_known(v.values)) {
      const double e = eit::interpolation_error(v.values, filled.values);
      errors << spec.method << ',' << (spec.method == "geometric" ? eit::format_double(spec.radius) : "") << ','
             << eit::format_double(e) << '\n';
      std::cout << spec.label() << ": relative error " << e << '\n';
    }
  }
  if (fully_known(v.values)) a.add("errors.csv", errors.str());
  finish(config, a);
  return 0;
}

int run_reconstruct(const Options& o) {
  auto config = resolve(o);
  config.noise_levels.resize(1);
  if (o.input.empty()) {
    const auto figure = eit::run_reconstruction_figure(config);
    eit::RunArtifacts a;
    eit::add_figure_artifacts(a, figure);
    for (const auto& ov : figure.overlaps) {
      std::cout << ov.source << ": jaccard vs full " << ov.jaccard << ", agreement " << ov.agreement << '\n';
    }
    for (const auto& note : figure.notes) std::cout << note << '\n';
    finish(config, a);
    return 0;
  }
  const double delta = config.noise_levels.front();
  const auto v = eit::load_measurement(o.input, o.mask);
  eit::ReconstructionModel model(config, v.m());
  eit::RunArtifacts a;
  std::vector<std::pair<std::string, eit::MeasurementMatrix>> sources;
  if (fully_known(v.values)) sources.emplace_back("full", v);
  const auto masked = eit::mask_current_driven(v);
  for (const auto& spec : eit::expand_methods(config)) {
    sources.emplace_back(spec.label(), model.interpolate(spec.method, spec.radius, masked));
  }
  for (const auto& [label, data] : sources) {
    const auto field = eit::indicator_or_empty(data.values, model.sensitivity(), delta, label);
    std::string stem;
    for (char c : label) {
      if (c == ' ') stem += '_';
      else if (c != '=') stem += c;
    }
    std::ostringstream csv, svg;
    eit::write_indicator_csv(csv, model.partition(), field);
    eit::render_indicator_svg(svg, model.mesh().mesh, model.partition(), field.beta, label);
    a.add("beta_" + stem + ".csv", csv.str());
    a.add("beta_" + stem + ".svg", svg.str());
    if (!field.note.empty()) std::cout << label << ": " << field.note << '\n';
  }
  finish(config, a);
  return 0;
}

int run_table(const Options& o) {
  const auto config = resolve(o);
  const auto table = eit::run_table1(config);
  table.write_csv(std::cout);
  eit::RunArtifacts a;
  eit::add_table_artifacts(a, table);
  finish(config, a);
  return 0;
}

int run_figure(const Options& o) {
  const auto config = resolve(o);
  const auto figure = eit::run_reconstruction_figure(config);
  std::cout << "m = " << figure.m << ", pixels " << figure.model->partition().size() << '\n';
  for (const auto& ov : figure.overlaps) {
    std::cout << "delta " << eit::format_double(ov.delta) << ", " << ov.source << ": jaccard vs full " << ov.jaccard
              << ", agreement " << ov.agreement << '\n';
  }
  for (const auto& note : figure.notes) std::cout << note << '\n';
  eit::RunArtifacts a;
  eit::add_figure_artifacts(a, figure);
  finish(config, a);
  return 0;
}

void common_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "key = value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "noise seed")->check(CLI::NonNegativeNumber);
  cmd->add_option("--noise", o.noise, "relative noise level (repeatable)");
  cmd->add_option("--radius", o.radii, "support bound radius (repeatable)");
  cmd->add_option("--method", o.methods, "linear or geometric (repeatable)")
      ->check(CLI::IsMember({"linear", "geometric"}));
  cmd->add_option("-m,--electrodes", o.electrodes, "electrode count (repeatable)");
  cmd->add_option("--set", o.overrides, "config override key=value (repeatable)");
  cmd->add_option("--out", o.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Difference EIT with interpolated current-driven electrode voltages"};
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("simulate", "forward solve and write U, V and noisy V");
  common_flags(sim, o);
  sim->add_flag("--sensitivity", o.sensitivity, "also write the reconstruction mesh and sensitivities");

  auto* interp = app.add_subcommand("interpolate", "fill current-driven entries of a measurement matrix");
  common_flags(interp, o);
  interp->add_option("--input", o.input, "measurement CSV (default: simulate)")->check(CLI::ExistingFile);
  interp->add_option("--mask", o.mask, "mask CSV for --input")->check(CLI::ExistingFile);

  auto* recon = app.add_subcommand("reconstruct", "monotonicity indicator from full and interpolated data");
  common_flags(recon, o);
  recon->add_option("--input", o.input, "noisy measurement CSV (default: simulate)")->check(CLI::ExistingFile);
  recon->add_option("--mask", o.mask, "mask CSV for --input")->check(CLI::ExistingFile);

  auto* table = app.add_subcommand("table1", "interpolation error table");
  common_flags(table, o);
  auto* figure = app.add_subcommand("figure4", "indicator panels for every noise level and method");
  common_flags(figure, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return run_simulate(o);
    if (interp->parsed()) return run_interpolate(o);
    if (recon->parsed()) return run_reconstruct(o);
    if (table->parsed()) return run_table(o);
    if (figure->parsed()) return run_figure(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
