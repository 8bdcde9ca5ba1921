#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "eit/forward.hpp"
#include "eit/geometry.hpp"
#include "eit/reconstruct.hpp"
#include "eit/sensitivity.hpp"

namespace eit {

/// m lines of m comma-separated shortest round-trip decimals. Masked entries
/// are written as `nan`.
void write_matrix_csv(std::ostream& out, const Matrix& values);
Matrix read_matrix_csv(std::istream& in);

/// Sidecar mask: m lines of m comma-separated flags from {M, C, I}.
void write_mask(std::ostream& out, const MeasurementMatrix& v);
std::vector<EntryState> read_mask(std::istream& in, int m);

/// Reads a measurement CSV and, when `mask_path` is non-empty, its mask.
/// Without a mask the current-driven entries are flagged by position.
MeasurementMatrix load_measurement(const std::filesystem::path& csv_path,
                                   const std::filesystem::path& mask_path = {});

/// One line per pixel: pixel index followed by the m^2 entries of S_i, row-major.
void write_sensitivity_csv(std::ostream& out, const SensitivityTensor& s);

/// `pixel_index,centroid_x,centroid_y,beta` per pixel, with a header line.
void write_indicator_csv(std::ostream& out, const PixelPartition& partition, const IndicatorField& field);

/// Heat map of a per-pixel indicator on the unit disk. Pixels below 25% of the
/// maximum are left transparent, values above 50% get the top colour.
void render_indicator_svg(std::ostream& out, const Mesh& mesh, const PixelPartition& partition,
                          const std::vector<double>& values, const std::string& title);

std::string sha256_hex(const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace eit
