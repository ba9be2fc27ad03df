#pragma once

/// \file
/// File formats: custom-set JSON, design JSON, moment JSON, point/rule CSV,
/// and atomic file writes.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "eqdesign/solver.hpp"

namespace eqdesign {

using json = nlohmann::json;

/// {"name": "...", "dim": d, "generators": [[{"exp": [..], "coef": c}, ...], ...],
///  "bounds": [[lo, hi], ...]}. "name" is optional; "bounds" defaults to
/// [-1, 1]^d. Throws ValidationError on malformed input or zero generators.
SemiAlgebraicSet parse_custom_set(const json& j);
SemiAlgebraicSet load_custom_set(const std::filesystem::path& path);

json polynomial_to_json(const Polynomial& p);
Polynomial polynomial_from_json(int dim, const json& terms);

json moments_to_json(const SemiAlgebraicSet& set, const MomentVector<double>& phi);

/// {"atoms": [[...], ...], "weights": [...], "objective", "gap", "iterations",
///  "converged", ...}; report fields are omitted when `report` is null.
json design_to_json(const DesignMeasure& design, const SolveReport* report = nullptr);
DesignMeasure design_from_json(const json& j);
DesignMeasure load_design(const std::filesystem::path& path);

/// Header x1..xd followed by one row per point (columns of `points`) and the
/// given extra columns.
std::string points_csv(const Eigen::MatrixXd& points, const std::vector<std::string>& extra_names,
                       const Eigen::MatrixXd& extra);

/// Reads a numeric CSV of points (one per row, optional header line). The
/// first `dim` columns are used.
Eigen::MatrixXd read_points_csv(const std::filesystem::path& path, int dim);

/// Writes via a temporary file in the same directory and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace eqdesign
