#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "eit/forward.hpp"
#include "eit/geometry.hpp"
#include "eit/interpolate.hpp"
#include "eit/phantom.hpp"
#include "eit/reconstruct.hpp"
#include "eit/sensitivity.hpp"

namespace eit {

/// Flat `key = value` configuration. Lists are comma separated, `#` starts a
/// comment. Every key has a default and `to_text` echoes all of them.
struct ExperimentConfig {
  std::vector<int> electrodes{16, 24, 32};
  int figure_electrodes = 32;
  int forward_refinement = 5;
  int reconstruction_refinement = 4;
  double forward_ring_phase = 0.0;
  double reconstruction_ring_phase = 0.5;
  int pixel_coarsening = 0;
  double coverage = 0.5;
  std::string phantom = "three-inclusion";
  double sigma0 = 1.0;
  std::vector<double> noise_levels{1e-5, 1e-3};
  std::uint64_t seed = 1;
  bool symmetrize_noise = false;
  std::vector<std::string> methods{"linear", "geometric"};
  std::vector<double> radii{0.7, 0.8, 0.9};
  std::string output_dir = "out";

  /// Applies one `key = value` assignment; unknown keys throw.
  void set(const std::string& key, const std::string& value);
  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
  /// The output directory is left out of the echo when `with_output_dir` is
  /// false, so runs written to different places hash identically.
  std::string to_text(bool with_output_dir = true) const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Reconstruction side: its own mesh, pixels and reference sensitivities.
/// Geometric interpolators are built lazily, one per bound radius.
class ReconstructionModel {
 public:
  ReconstructionModel(const ExperimentConfig& config, int m);

  const DiskMesh& mesh() const { return mesh_; }
  const PixelPartition& partition() const { return partition_; }
  const SensitivityTensor& sensitivity() const { return sensitivity_; }
  const GeometricInterpolator& interpolator(double radius);

  /// Fills the current-driven entries of `masked` with `method` ("linear" or
  /// "geometric"); `radius` is only used by the geometric method.
  MeasurementMatrix interpolate(const std::string& method, double radius, const MeasurementMatrix& masked);

 private:
  DiskMesh mesh_;
  PixelPartition partition_;
  SensitivityTensor sensitivity_;
  std::map<double, std::unique_ptr<GeometricInterpolator>> interpolators_;
};

/// Forward side of one experiment: fine mesh, rasterised phantom and the
/// noiseless difference matrix V = U(sigma) - U(sigma0).
struct Simulation {
  DiskMesh mesh;
  Phantom phantom;
  ConductivityField sigma;
  ConductivityField sigma0;
  MeasurementMatrix u_reference;
  MeasurementMatrix u_perturbed;
  MeasurementMatrix v;
};

Simulation simulate(const ExperimentConfig& config, int m);

/// The methods and radii of a config expanded into table rows.
struct MethodSpec {
  std::string method;
  double radius = 0.0;  // geometric only

  std::string label() const;
};
std::vector<MethodSpec> expand_methods(const ExperimentConfig& config);

struct ErrorTable {
  std::vector<int> electrodes;
  std::vector<MethodSpec> rows;
  std::vector<std::vector<double>> errors;  // [row][electrode column]

  double at(const std::string& label, int m) const;
  void write_csv(std::ostream& out) const;
};

/// Relative Frobenius interpolation error on noiseless data for every m and
/// every method of the config.
ErrorTable run_table1(const ExperimentConfig& config);

struct FigurePanel {
  double delta = 0.0;
  std::string source;  // "full" or a method label
  IndicatorField field;
  std::vector<char> above;  // 25% threshold mask
};

struct PanelOverlap {
  double delta = 0.0;
  std::string source;
  double jaccard = 0.0;
  double agreement = 0.0;
};

struct FigureResult {
  int m = 0;
  std::unique_ptr<ReconstructionModel> model;
  std::vector<FigurePanel> panels;
  std::vector<PanelOverlap> overlaps;  // each interpolated panel against the full panel of its row
  std::vector<std::string> notes;

  const FigurePanel& panel(double delta, const std::string& source) const;
};

/// Monotonicity indicators for the full noisy matrix and every interpolated
/// variant, one row per noise level, at m = config.figure_electrodes.
FigureResult run_reconstruction_figure(const ExperimentConfig& config);

/// Indicator for one noisy matrix. A zero matrix gives an all-zero field with
/// a "no change detected" note instead of an error.
IndicatorField indicator_or_empty(const Matrix& v_delta, const SensitivityTensor& s, double delta,
                                  const std::string& method);

/// Named in-memory outputs of a run.
struct RunArtifacts {
  std::vector<std::pair<std::string, std::string>> files;  // relative path, content

  void add(std::string name, std::string content);
};

/// Writes `config.txt`, every artifact and `manifest.txt` (sha256 and size of
/// each file) below `dir`, creating it when missing. Returns the manifest text.
std::string export_run(const ExperimentConfig& config, const RunArtifacts& artifacts,
                       const std::filesystem::path& dir);

void add_table_artifacts(RunArtifacts& artifacts, const ErrorTable& table);
void add_figure_artifacts(RunArtifacts& artifacts, const FigureResult& figure);

std::string matrix_csv(const Matrix& values);
std::string mask_text(const MeasurementMatrix& v);

}  // namespace eit
