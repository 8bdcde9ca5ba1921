#include "eit/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "eit/text.hpp"

namespace eit {

namespace {

std::vector<std::vector<std::string>> read_rows(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(split_fields(line, ','));
  }
  return rows;
}

std::string fixed(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4f", value);
  return buffer;
}

// Colour ramp from pale yellow (25% of max) to dark red (50% and above).
std::string ramp_colour(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255 + t * (189 - 255)));
  const int g = static_cast<int>(std::lround(237 + t * (0 - 237)));
  const int b = static_cast<int>(std::lround(160 + t * (38 - 160)));
  char buffer[8];
  std::snprintf(buffer, sizeof(buffer), "#%02x%02x%02x", r, g, b);
  return buffer;
}

}  // namespace

void write_matrix_csv(std::ostream& out, const Matrix& values) {
  for (Eigen::Index j = 0; j < values.rows(); ++j) {
    for (Eigen::Index k = 0; k < values.cols(); ++k) {
      if (k) out << ',';
      out << format_double(values(j, k));
    }
    out << '\n';
  }
}

Matrix read_matrix_csv(std::istream& in) {
  const auto rows = read_rows(in);
  if (rows.empty()) throw std::invalid_argument("matrix csv: no rows");
  const auto m = static_cast<Eigen::Index>(rows.size());
  Matrix values(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (static_cast<Eigen::Index>(rows[j].size()) != m) {
      throw std::invalid_argument("matrix csv: row " + std::to_string(j + 1) + " has " +
                                  std::to_string(rows[j].size()) + " fields, expected " + std::to_string(m));
    }
    for (Eigen::Index k = 0; k < m; ++k) values(j, k) = parse_double(rows[j][k]);
  }
  return values;
}

void write_mask(std::ostream& out, const MeasurementMatrix& v) {
  for (int j = 0; j < v.m(); ++j) {
    for (int k = 0; k < v.m(); ++k) {
      if (k) out << ',';
      out << static_cast<char>(v.state(j, k));
    }
    out << '\n';
  }
}

std::vector<EntryState> read_mask(std::istream& in, int m) {
  const auto rows = read_rows(in);
  if (static_cast<int>(rows.size()) != m) throw std::invalid_argument("mask: expected " + std::to_string(m) + " rows");
  std::vector<EntryState> mask;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != m) throw std::invalid_argument("mask: row length mismatch");
    for (const auto& field : row) {
      if (field == "M") mask.push_back(EntryState::Measured);
      else if (field == "C") mask.push_back(EntryState::CurrentDriven);
      else if (field == "I") mask.push_back(EntryState::Interpolated);
      else throw std::invalid_argument("mask: unknown flag '" + field + "'");
    }
  }
  return mask;
}

MeasurementMatrix load_measurement(const std::filesystem::path& csv_path, const std::filesystem::path& mask_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open " + csv_path.string());
  auto v = MeasurementMatrix::from_values(read_matrix_csv(in));
  if (!mask_path.empty()) {
    std::ifstream mask_in(mask_path);
    if (!mask_in) throw std::runtime_error("cannot open " + mask_path.string());
    v.mask = read_mask(mask_in, v.m());
  }
  return v;
}

void write_sensitivity_csv(std::ostream& out, const SensitivityTensor& s) {
  for (std::size_t i = 0; i < s.pixel_count(); ++i) {
    out << i;
    const Matrix& si = s.pixel_matrices[i];
    for (Eigen::Index j = 0; j < si.rows(); ++j) {
      for (Eigen::Index k = 0; k < si.cols(); ++k) out << ',' << format_double(si(j, k));
    }
    out << '\n';
  }
}

void write_indicator_csv(std::ostream& out, const PixelPartition& partition, const IndicatorField& field) {
  if (field.beta.size() != partition.size()) throw std::invalid_argument("indicator csv: pixel count mismatch");
  out << "pixel_index,centroid_x,centroid_y,beta\n";
  for (std::size_t i = 0; i < partition.size(); ++i) {
    out << i << ',' << format_double(partition.centroids[i].x) << ',' << format_double(partition.centroids[i].y)
        << ',' << format_double(field.beta[i]) << '\n';
  }
}

void render_indicator_svg(std::ostream& out, const Mesh& mesh, const PixelPartition& partition,
                          const std::vector<double>& values, const std::string& title) {
  if (values.size() != partition.size()) throw std::invalid_argument("render: pixel count mismatch");
  double peak = 0.0;
  for (double v : values) peak = std::max(peak, v);

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-1.1 -1.25 2.2 2.35\" width=\"320\" height=\"342\">\n";
  out << "<title>" << title << "</title>\n";
  out << "<rect x=\"-1.1\" y=\"-1.25\" width=\"2.2\" height=\"2.35\" fill=\"white\"/>\n";
  out << "<g stroke=\"none\">\n";
  if (peak > 0.0) {
    for (std::size_t i = 0; i < partition.size(); ++i) {
      const double ratio = values[i] / peak;
      if (ratio < 0.25) continue;
      const std::string colour = ramp_colour((ratio - 0.25) / 0.25);
      for (int t : partition.pixels[i]) {
        out << "<polygon fill=\"" << colour << "\" stroke=\"" << colour << "\" stroke-width=\"0.002\" points=\"";
        const auto& tri = mesh.triangles[t];
        for (int c = 0; c < 3; ++c) {
          if (c) out << ' ';
          out << fixed(mesh.nodes[tri[c]].x) << ',' << fixed(-mesh.nodes[tri[c]].y);
        }
        out << "\"/>\n";
      }
    }
  }
  out << "</g>\n";
  out << "<circle cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" stroke=\"black\" stroke-width=\"0.01\"/>\n";
  out << "<text x=\"0\" y=\"-1.1\" font-size=\"0.09\" text-anchor=\"middle\">" << title
      << (peak > 0.0 ? "" : " (no change detected)") << "</text>\n";
  out << "</svg>\n";
}

std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace eit
