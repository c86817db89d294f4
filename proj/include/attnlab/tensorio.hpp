#pragma once

#include <filesystem>

#include "attnlab/linalg.hpp"

namespace attnlab {

// Tensor file format: a one-line JSON header
//   {"rows":R,"cols":C,"dtype":"f32","order":"row-major"}
// terminated by '\n', followed by rows*cols raw little-endian 32-bit floats.
// Values are upcast to double on load.
Matrix load_tensor(const std::filesystem::path& path);
void save_tensor(const std::filesystem::path& path, const Matrix& m);

}  // namespace attnlab
