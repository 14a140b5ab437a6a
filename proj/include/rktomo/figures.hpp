#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rktomo/workflow.hpp"

namespace rktomo {

/// 8-bit RGB PNG of a non-negative map, normalized to its maximum. Row 0 of
/// the matrix is drawn at the bottom so the vertical axis increases upwards.
void write_heatmap_png(const Eigen::MatrixXd& values, const std::string& path);

/// |rho(eps2, eps1)| with eps1 horizontal and eps2 vertical.
void write_density_heatmap(const DensityMatrix& rho, const std::string& path);

/// Line plot of the four sweep series plus the theoretical purity.
std::string render_sweep_svg(const std::vector<SweepRow>& rows, const std::string& parameter);

}  // namespace rktomo
