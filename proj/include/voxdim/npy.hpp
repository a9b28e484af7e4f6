#pragma once

#include <Eigen/Core>

#include <filesystem>

namespace voxdim {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Reads a 2-D NPY array ('<f4' or '<f8', C or Fortran order) into doubles.
///
/// Errors: io_error (unreadable), parse_error (bad magic/header/dtype),
/// rank_error (not 2-D), truncated (short data section), non_finite.
RowMatrix read_npy_matrix(const std::filesystem::path& path);

/// Writes an NPY v1.0 file: little-endian float32, C order, shape (rows, cols).
/// The header is padded so the data starts on a 64-byte boundary, as numpy does.
void write_npy_matrix(const std::filesystem::path& path, const RowMatrix& matrix);

}  // namespace voxdim
