#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "eit/harness.hpp"
#include "eit/io.hpp"

using namespace eit;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.electrodes = {8, 12};
  c.figure_electrodes = 12;
  c.forward_refinement = 4;
  c.reconstruction_refinement = 3;
  c.radii = {0.8};
  return c;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("eit_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config text parses, echoes and round-trips") {
  std::istringstream in(
      "# comment\n"
      "electrodes = 8, 16 # trailing\n"
      "radii = 0.5,0.75\n"
      "methods = geometric\n"
      "seed = 42\n"
      "symmetrize_noise = true\n");
  const auto c = parse_config(in);
  CHECK(c.electrodes == std::vector<int>{8, 16});
  CHECK(c.radii == std::vector<double>{0.5, 0.75});
  CHECK(c.methods == std::vector<std::string>{"geometric"});
  CHECK(c.seed == 42);
  CHECK(c.symmetrize_noise);
  std::istringstream echo(c.to_text());
  CHECK(parse_config(echo).to_text() == c.to_text());
  CHECK(c.to_text(false).find("output_dir") == std::string::npos);

  std::istringstream unknown("colour = red\n");
  CHECK_THROWS_WITH_AS(parse_config(unknown), doctest::Contains("unknown config key"), std::invalid_argument);
  std::istringstream malformed("electrodes 8\n");
  CHECK_THROWS_AS(parse_config(malformed), std::invalid_argument);
}

TEST_CASE("config invariants are enforced") {
  auto c = small_config();
  CHECK_NOTHROW(c.validate());
  c.reconstruction_refinement = c.forward_refinement;
  CHECK_THROWS_WITH(c.validate(), doctest::Contains("inverse crime"));
  c = small_config();
  c.radii = {1.0};
  CHECK_THROWS(c.validate());
  c = small_config();
  c.electrodes = {4};
  CHECK_THROWS(c.validate());
  c = small_config();
  c.methods = {"cubic"};
  CHECK_THROWS(c.validate());
  c = small_config();
  c.phantom = "nothing";
  CHECK_THROWS(c.validate());
}

TEST_CASE("linear interpolation error falls with more electrodes") {
  ExperimentConfig c;
  c.electrodes = {8, 16, 24, 32};
  c.methods = {"linear", "geometric"};
  c.radii = {0.7};
  const auto table = run_table1(c);
  REQUIRE(table.rows.size() == 2);
  for (std::size_t i = 1; i < c.electrodes.size(); ++i) {
    CHECK(table.errors[0][i] < table.errors[0][i - 1]);
  }
  CHECK(table.at("geometric r=0.7", 24) < table.at("linear", 24));
  std::ostringstream csv;
  table.write_csv(csv);
  CHECK(csv.str().rfind("method,radius,m8,m16,m24,m32\nlinear,,", 0) == 0);
}

TEST_CASE("homogeneous phantom gives an empty figure with a note") {
  auto c = small_config();
  c.phantom = "homogeneous";
  c.noise_levels = {1e-3};
  const auto fig = run_reconstruction_figure(c);
  REQUIRE(fig.panels.size() == 3);
  for (const auto& p : fig.panels) {
    CHECK(p.field.note == "no change detected");
    CHECK(std::count(p.above.begin(), p.above.end(), 1) == 0);
  }
  CHECK_FALSE(fig.notes.empty());
  std::ostringstream svg;
  render_indicator_svg(svg, fig.model->mesh().mesh, fig.model->partition(), fig.panels[0].field.beta, "empty");
  CHECK(svg.str().find("<polygon") == std::string::npos);
  CHECK(svg.str().find("no change detected") != std::string::npos);
}

TEST_CASE("figure pipeline runs and reports overlaps") {
  auto c = small_config();
  c.noise_levels = {1e-3};
  c.methods = {"geometric", "linear"};
  const auto fig = run_reconstruction_figure(c);
  CHECK(fig.m == 12);
  CHECK(fig.panels.size() == 3);
  CHECK(fig.overlaps.size() == 2);
  CHECK(fig.panel(1e-3, "full").field.beta.size() == fig.model->partition().size());
  for (const auto& o : fig.overlaps) {
    CHECK(o.jaccard >= 0.0);
    CHECK(o.jaccard <= 1.0);
  }
  CHECK_THROWS(fig.panel(0.5, "full"));
}

TEST_CASE("export is deterministic and lists every file") {
  auto c = small_config();
  c.noise_levels = {1e-3};
  RunArtifacts first, second;
  add_figure_artifacts(first, run_reconstruction_figure(c));
  add_figure_artifacts(second, run_reconstruction_figure(c));
  const fs::path a = scratch_dir("a") / "nested" / "run";
  const fs::path b = scratch_dir("b");
  const std::string ma = export_run(c, first, a);
  const std::string mb = export_run(c, second, b);
  CHECK(ma == mb);
  CHECK(fs::exists(a / "manifest.txt"));
  std::size_t listed = 0;
  std::istringstream lines(ma);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    std::istringstream fields(line);
    std::string hash, name;
    std::size_t bytes = 0;
    fields >> hash >> bytes >> name;
    CHECK(fs::exists(a / name));
    CHECK(fs::file_size(a / name) == bytes);
    CHECK(sha256_hex(read_file(a / name)) == hash);
    ++listed;
  }
  std::size_t on_disk = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) on_disk += entry.is_regular_file();
  CHECK(listed + 1 == on_disk);

  const fs::path blocker = scratch_dir("blocker");
  std::ofstream(blocker) << "file";
  CHECK_THROWS_AS(export_run(c, first, blocker / "sub"), std::runtime_error);
  CHECK_THROWS_AS(first.add(first.files.front().first, "x"), std::logic_error);
}

TEST_CASE("csv and mask files round-trip") {
  Matrix v(5, 5);
  for (int j = 0; j < 5; ++j) {
    for (int k = 0; k < 5; ++k) v(j, k) = std::ldexp(1.0 / 3.0 + j - 2 * k, j - 40);
  }
  auto meas = mask_current_driven(MeasurementMatrix::from_values(v));
  meas.set_state(0, 0, EntryState::Interpolated);
  const fs::path dir = scratch_dir("csv");
  fs::create_directories(dir);
  std::ofstream(dir / "v.csv") << matrix_csv(meas.values);
  std::ofstream(dir / "v.mask.csv") << mask_text(meas);
  const auto back = load_measurement(dir / "v.csv", dir / "v.mask.csv");
  CHECK(back.mask == meas.mask);
  for (int j = 0; j < 5; ++j) {
    for (int k = 0; k < 5; ++k) {
      if (std::isnan(meas.values(j, k))) CHECK(std::isnan(back.values(j, k)));
      else CHECK(back.values(j, k) == meas.values(j, k));
    }
  }
  std::istringstream ragged("1,2\n3\n");
  CHECK_THROWS(read_matrix_csv(ragged));
  std::istringstream bad_flag("M,X\nM,M\n");
  CHECK_THROWS(read_mask(bad_flag, 2));
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("indicator and sensitivity exports") {
  const auto c = small_config();
  ReconstructionModel model(c, 8);
  std::ostringstream sens;
  write_sensitivity_csv(sens, model.sensitivity());
  std::istringstream lines(sens.str());
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 64);
    ++count;
  }
  CHECK(count == model.partition().size());

  IndicatorField field;
  field.beta.assign(model.partition().size(), 0.0);
  field.beta[0] = 1.0;
  field.beta[1] = 0.3;
  field.beta[2] = 0.1;
  std::ostringstream csv;
  write_indicator_csv(csv, model.partition(), field);
  CHECK(csv.str().rfind("pixel_index,centroid_x,centroid_y,beta\n0,", 0) == 0);
  std::ostringstream svg;
  render_indicator_svg(svg, model.mesh().mesh, model.partition(), field.beta, "t");
  const std::string text = svg.str();
  std::size_t polygons = 0;
  for (auto pos = text.find("<polygon"); pos != std::string::npos; pos = text.find("<polygon", pos + 1)) ++polygons;
  CHECK(polygons == model.partition().pixels[0].size() + model.partition().pixels[1].size());
  CHECK(text.find("#bd0026") != std::string::npos);
}
