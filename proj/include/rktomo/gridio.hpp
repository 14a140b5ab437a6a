#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rktomo/model.hpp"

namespace rktomo {

// Self-describing grid files.
//
// Text layout (.rkg):
//   #RKGRID 1
//   kind <interferogram|fourier_map|density_matrix>
//   value_type <real|complex>
//   axis <name> <min> <max> <count> <unit>      (rows first, then columns)
//   meta <key> <value...>                       (any number)
//   data
//   <one row per line; complex entries as "re im">
//
// The binary twin (.rkb) starts with "#RKGRIDB 1" and repeats the same header
// lines; "data\n" is followed by rows*cols (times two for complex) IEEE-754
// float64 values in little-endian byte order, row-major.

enum class GridFormat { Text, Binary };

struct GridAxis {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  int count = 0;
  std::string unit;
};

struct GridFile {
  std::string kind;
  bool complex_values = false;
  GridAxis rows;
  GridAxis cols;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<double> data;  // row-major, complex entries interleaved

  const std::string* find_meta(const std::string& key) const;
};

std::string encode_grid(const GridFile& g, GridFormat format);
GridFile decode_grid(const std::string& bytes);

void write_grid(const std::string& path, const GridFile& g, GridFormat format);
GridFile read_grid(const std::string& path);

/// Shortest decimal that reads back to the same double.
std::string format_double(double x);

GridFile to_grid(const Interferogram& s);
GridFile to_grid(const FourierMap& m);
GridFile to_grid(const DensityMatrix& rho);

Interferogram interferogram_from_grid(const GridFile& g);
FourierMap fourier_map_from_grid(const GridFile& g);
DensityMatrix density_matrix_from_grid(const GridFile& g);

}  // namespace rktomo
