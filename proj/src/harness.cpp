#include "eit/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "eit/io.hpp"
#include "eit/text.hpp"

namespace eit {

namespace {

std::vector<std::string> list_items(const std::string& value) {
  std::vector<std::string> items;
  for (auto& field : split_fields(value, ',')) {
    if (!field.empty()) items.push_back(std::move(field));
  }
  return items;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& value, Parse parse) {
  std::vector<T> out;
  for (const auto& item : list_items(value)) out.push_back(parse(item));
  return out;
}

bool parse_bool(const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw std::invalid_argument("not a boolean: '" + value + "'");
}

template <typename T, typename Format>
std::string join(const std::vector<T>& items, Format format) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += format(items[i]);
  }
  return out;
}

std::string slug(const std::string& label) {
  std::string out;
  for (char c : label) {
    if (c == ' ') out += '_';
    else if (c != '=') out += c;
  }
  return out;
}

std::string identity(const std::string& s) { return s; }

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "electrodes") electrodes = parse_list<int>(value, parse_int);
  else if (key == "figure_electrodes") figure_electrodes = parse_int(value);
  else if (key == "forward_refinement") forward_refinement = parse_int(value);
  else if (key == "reconstruction_refinement") reconstruction_refinement = parse_int(value);
  else if (key == "forward_ring_phase") forward_ring_phase = parse_double(value);
  else if (key == "reconstruction_ring_phase") reconstruction_ring_phase = parse_double(value);
  else if (key == "pixel_coarsening") pixel_coarsening = parse_int(value);
  else if (key == "coverage") coverage = parse_double(value);
  else if (key == "phantom") phantom = value;
  else if (key == "sigma0") sigma0 = parse_double(value);
  else if (key == "noise_levels") noise_levels = parse_list<double>(value, parse_double);
  else if (key == "seed") {
    const int s = parse_int(value);
    if (s < 0) throw std::invalid_argument("seed must be non-negative");
    seed = static_cast<std::uint64_t>(s);
  } else if (key == "symmetrize_noise") symmetrize_noise = parse_bool(value);
  else if (key == "methods") methods = list_items(value);
  else if (key == "radii") radii = parse_list<double>(value, parse_double);
  else if (key == "output_dir") output_dir = value;
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

void ExperimentConfig::validate() const {
  if (electrodes.empty()) throw std::invalid_argument("config: electrodes list is empty");
  for (int m : electrodes) {
    if (m < 5) throw std::invalid_argument("config: electrode count " + std::to_string(m) + " is below 5");
  }
  if (figure_electrodes < 5) throw std::invalid_argument("config: figure_electrodes must be at least 5");
  for (double r : radii) {
    if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("config: bound radius " + format_double(r) + " is not in (0, 1)");
  }
  if (forward_refinement == reconstruction_refinement) {
    throw std::invalid_argument("config: forward and reconstruction refinement are both " +
                                std::to_string(forward_refinement) +
                                "; simulating and reconstructing on the same mesh is an inverse crime");
  }
  if (forward_refinement < 0 || reconstruction_refinement < 0) throw std::invalid_argument("config: negative refinement");
  if (pixel_coarsening < 0) throw std::invalid_argument("config: pixel_coarsening must be non-negative");
  if (!(coverage > 0.0 && coverage < 1.0)) throw std::invalid_argument("config: coverage must lie in (0, 1)");
  if (!(sigma0 > 0.0)) throw std::invalid_argument("config: sigma0 must be positive");
  for (double d : noise_levels) {
    if (!(d >= 0.0)) throw std::invalid_argument("config: noise levels must be non-negative");
  }
  if (methods.empty()) throw std::invalid_argument("config: methods list is empty");
  for (const auto& method : methods) {
    if (method != "linear" && method != "geometric") {
      throw std::invalid_argument("config: unknown method '" + method + "' (expected linear or geometric)");
    }
  }
  if (std::find(methods.begin(), methods.end(), "geometric") != methods.end() && radii.empty()) {
    throw std::invalid_argument("config: geometric method needs at least one radius");
  }
  phantom_by_id(phantom);
}

std::string ExperimentConfig::to_text(bool with_output_dir) const {
  std::ostringstream out;
  out << "electrodes = " << join(electrodes, [](int m) { return std::to_string(m); }) << '\n';
  out << "figure_electrodes = " << figure_electrodes << '\n';
  out << "forward_refinement = " << forward_refinement << '\n';
  out << "reconstruction_refinement = " << reconstruction_refinement << '\n';
  out << "forward_ring_phase = " << format_double(forward_ring_phase) << '\n';
  out << "reconstruction_ring_phase = " << format_double(reconstruction_ring_phase) << '\n';
  out << "pixel_coarsening = " << pixel_coarsening << '\n';
  out << "coverage = " << format_double(coverage) << '\n';
  out << "phantom = " << phantom << '\n';
  out << "sigma0 = " << format_double(sigma0) << '\n';
  out << "noise_levels = " << join(noise_levels, format_double) << '\n';
  out << "seed = " << seed << '\n';
  out << "symmetrize_noise = " << (symmetrize_noise ? "true" : "false") << '\n';
  out << "methods = " << join(methods, identity) << '\n';
  out << "radii = " << join(radii, format_double) << '\n';
  if (with_output_dir) out << "output_dir = " << output_dir << '\n';
  return out.str();
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(number) + ": expected key = value");
    }
    try {
      config.set(std::string(trim(body.substr(0, eq))), std::string(trim(body.substr(eq + 1))));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(number) + ": " + e.what());
    }
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return parse_config(in);
}

ReconstructionModel::ReconstructionModel(const ExperimentConfig& config, int m) {
  MeshOptions options;
  options.ring_phase = config.reconstruction_ring_phase;
  if (config.pixel_coarsening > 0) options.min_electrode_edges = 1;
  mesh_ = build_disk_mesh(config.reconstruction_refinement, m, config.coverage, options);
  for (int level = 0; level < config.pixel_coarsening; ++level) mesh_ = refine_uniform(mesh_);
  partition_ = build_pixel_partition(mesh_.mesh, config.pixel_coarsening);
  sensitivity_ = assemble_sensitivity(mesh_.mesh, mesh_.layout, partition_,
                                      ConductivityField::constant(mesh_.mesh, config.sigma0, "sigma0"));
}

const GeometricInterpolator& ReconstructionModel::interpolator(double radius) {
  auto& slot = interpolators_[radius];
  if (!slot) {
    const auto bound = bound_matrix(sensitivity_, support_bound(mesh_.mesh, partition_, radius));
    slot = std::make_unique<GeometricInterpolator>(bound);
  }
  return *slot;
}

MeasurementMatrix ReconstructionModel::interpolate(const std::string& method, double radius,
                                                   const MeasurementMatrix& masked) {
  if (method == "linear") return linear_interpolate(masked).matrix;
  if (method == "geometric") return interpolator(radius).interpolate(masked);
  throw std::invalid_argument("unknown interpolation method '" + method + "'");
}

Simulation simulate(const ExperimentConfig& config, int m) {
  Simulation sim;
  MeshOptions options;
  options.ring_phase = config.forward_ring_phase;
  sim.mesh = build_disk_mesh(config.forward_refinement, m, config.coverage, options);
  sim.phantom = phantom_by_id(config.phantom);
  sim.sigma = rasterize(sim.mesh.mesh, sim.phantom).scaled(config.sigma0);
  sim.sigma0 = ConductivityField::constant(sim.mesh.mesh, config.sigma0, "sigma0");
  sim.u_reference = measure(sim.mesh.mesh, sim.mesh.layout, sim.sigma0);
  sim.u_perturbed = measure(sim.mesh.mesh, sim.mesh.layout, sim.sigma);
  sim.v = difference(sim.u_perturbed, sim.u_reference);
  return sim;
}

std::string MethodSpec::label() const {
  if (method == "geometric") return "geometric r=" + format_double(radius);
  return method;
}

std::vector<MethodSpec> expand_methods(const ExperimentConfig& config) {
  std::vector<MethodSpec> out;
  for (const auto& method : config.methods) {
    if (method == "geometric") {
      for (double r : config.radii) out.push_back({method, r});
    } else {
      out.push_back({method, 0.0});
    }
  }
  return out;
}

double ErrorTable::at(const std::string& label, int m) const {
  const auto col = std::find(electrodes.begin(), electrodes.end(), m);
  if (col == electrodes.end()) throw std::out_of_range("error table has no column m=" + std::to_string(m));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].label() == label) return errors[r][col - electrodes.begin()];
  }
  throw std::out_of_range("error table has no row '" + label + "'");
}

void ErrorTable::write_csv(std::ostream& out) const {
  out << "method,radius";
  for (int m : electrodes) out << ",m" << m;
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << rows[r].method << ',' << (rows[r].method == "geometric" ? format_double(rows[r].radius) : "");
    for (double e : errors[r]) out << ',' << format_double(e);
    out << '\n';
  }
}

ErrorTable run_table1(const ExperimentConfig& config) {
  config.validate();
  ErrorTable table;
  table.electrodes = config.electrodes;
  table.rows = expand_methods(config);
  table.errors.assign(table.rows.size(), std::vector<double>(table.electrodes.size(), 0.0));
  for (std::size_t c = 0; c < table.electrodes.size(); ++c) {
    const int m = table.electrodes[c];
    const Simulation sim = simulate(config, m);
    const MeasurementMatrix masked = mask_current_driven(sim.v);
    std::unique_ptr<ReconstructionModel> model;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& spec = table.rows[r];
      if (spec.method == "geometric" && !model) model = std::make_unique<ReconstructionModel>(config, m);
      const MeasurementMatrix filled =
          spec.method == "geometric" ? model->interpolate(spec.method, spec.radius, masked)
                                     : linear_interpolate(masked).matrix;
      table.errors[r][c] = interpolation_error(sim.v.values, filled.values);
    }
  }
  return table;
}

IndicatorField indicator_or_empty(const Matrix& v_delta, const SensitivityTensor& s, double delta,
                                  const std::string& method) {
  if (v_delta.norm() == 0.0) {
    IndicatorField field;
    field.beta.assign(s.pixel_count(), 0.0);
    field.capped.assign(s.pixel_count(), 0);
    field.delta = delta;
    field.method = method;
    field.note = "no change detected";
    return field;
  }
  return beta_indicator(v_delta, s, delta, method);
}

const FigurePanel& FigureResult::panel(double delta, const std::string& source) const {
  for (const auto& p : panels) {
    if (p.delta == delta && p.source == source) return p;
  }
  throw std::out_of_range("figure has no panel '" + source + "' at delta " + format_double(delta));
}

FigureResult run_reconstruction_figure(const ExperimentConfig& config) {
  config.validate();
  FigureResult result;
  result.m = config.figure_electrodes;
  const Simulation sim = simulate(config, result.m);
  result.model = std::make_unique<ReconstructionModel>(config, result.m);
  const auto& s = result.model->sensitivity();
  const auto specs = expand_methods(config);

  for (double delta : config.noise_levels) {
    const MeasurementMatrix noisy = add_noise(sim.v, {delta, config.seed, config.symmetrize_noise});
    FigurePanel full{delta, "full", indicator_or_empty(noisy.values, s, delta, "full"), {}};
    full.above = threshold_mask(full.field.beta, 0.25);
    if (!full.field.note.empty()) result.notes.push_back("delta " + format_double(delta) + ": " + full.field.note);
    result.panels.push_back(full);

    const MeasurementMatrix masked = mask_current_driven(noisy);
    for (const auto& spec : specs) {
      const MeasurementMatrix filled = result.model->interpolate(spec.method, spec.radius, masked);
      FigurePanel panel{delta, spec.label(), indicator_or_empty(filled.values, s, delta, spec.label()), {}};
      panel.above = threshold_mask(panel.field.beta, 0.25);
      result.overlaps.push_back({delta, spec.label(), jaccard_index(full.above, panel.above),
                                 agreement_fraction(full.above, panel.above)});
      result.panels.push_back(std::move(panel));
    }
  }
  return result;
}

void RunArtifacts::add(std::string name, std::string content) {
  for (const auto& file : files) {
    if (file.first == name) throw std::logic_error("duplicate artifact " + name);
  }
  files.emplace_back(std::move(name), std::move(content));
}

std::string export_run(const ExperimentConfig& config, const RunArtifacts& artifacts,
                       const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory " + dir.string() + (ec ? ": " + ec.message() : ""));
  }
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("config.txt", config.to_text(false));
  files.insert(files.end(), artifacts.files.begin(), artifacts.files.end());

  std::ostringstream manifest;
  manifest << "# sha256 bytes path\n";
  for (const auto& [name, content] : files) {
    const fs::path path = dir / name;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    out << content;
    out.close();
    if (!out) throw std::runtime_error("cannot write " + path.string());
    manifest << sha256_hex(content) << ' ' << content.size() << ' ' << name << '\n';
  }
  const std::string text = manifest.str();
  std::ofstream out(dir / "manifest.txt", std::ios::binary);
  out << text;
  out.close();
  if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.txt").string());
  return text;
}

std::string matrix_csv(const Matrix& values) {
  std::ostringstream out;
  write_matrix_csv(out, values);
  return out.str();
}

std::string mask_text(const MeasurementMatrix& v) {
  std::ostringstream out;
  write_mask(out, v);
  return out.str();
}

void add_table_artifacts(RunArtifacts& artifacts, const ErrorTable& table) {
  std::ostringstream out;
  table.write_csv(out);
  artifacts.add("table1.csv", out.str());
}

void add_figure_artifacts(RunArtifacts& artifacts, const FigureResult& figure) {
  const auto& model = *figure.model;
  for (const auto& panel : figure.panels) {
    const std::string stem = "figure4/delta_" + format_double(panel.delta) + "_" + slug(panel.source);
    std::ostringstream csv;
    write_indicator_csv(csv, model.partition(), panel.field);
    artifacts.add(stem + ".csv", csv.str());
    std::ostringstream svg;
    render_indicator_svg(svg, model.mesh().mesh, model.partition(), panel.field.beta,
                         panel.source + ", delta " + format_double(panel.delta));
    artifacts.add(stem + ".svg", svg.str());
  }
  std::ostringstream overlap;
  overlap << "delta,source,jaccard,agreement\n";
  for (const auto& o : figure.overlaps) {
    overlap << format_double(o.delta) << ',' << o.source << ',' << format_double(o.jaccard) << ','
            << format_double(o.agreement) << '\n';
  }
  artifacts.add("figure4/overlap.csv", overlap.str());
  if (!figure.notes.empty()) {
    std::string notes;
    for (const auto& n : figure.notes) notes += n + '\n';
    artifacts.add("figure4/notes.txt", notes);
  }
}

}  // namespace eit
