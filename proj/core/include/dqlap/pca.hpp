#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "dqlap/dataset.hpp"

namespace dqlap {

// Top-2 principal directions plus the data projected onto them.
struct Projection2D {
  std::array<std::vector<double>, 2> components;  // orthonormal, F entries each
  std::array<double, 2> explained_variance{};     // descending, non-negative
  std::vector<std::array<double, 2>> points;      // N (x, y) coordinates
  std::vector<int> labels;                        // class tag per point
};

// Mean-centers the data and extracts the top-2 principal directions by power
// iteration with deflation (eigenvalue-change tolerance 1e-10, at most 1000
// sweeps per component). Component signs are fixed by making each component's
// largest-magnitude entry positive. Requires >= 2 samples, >= 2 features and
// non-identical points.
Projection2D pca_project(const Dataset& data);

// Writes "x,y,label" rows; labels may come from ground truth or a model.
void write_projection_csv(const Projection2D& projection,
                          const std::vector<int>& labels,
                          const std::filesystem::path& path);

}  // namespace dqlap
