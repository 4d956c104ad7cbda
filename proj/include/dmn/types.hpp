#ifndef DMN_TYPES_HPP
#define DMN_TYPES_HPP

#include <Eigen/Core>

#include <cstdint>
#include <string>

namespace dmn {

// All numerics run in 64-bit precision. Storage is row-major so that
// serialized buffers are plain row-major double arrays.
using Scalar = double;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Index  = Eigen::Index;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }
inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

} // namespace dmn

#endif
