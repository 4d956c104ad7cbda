#ifndef DMN_TESTS_TEST_UTIL_HPP
#define DMN_TESTS_TEST_UTIL_HPP

#include "dmn/tape.hpp"
#include "dmn/types.hpp"
#include "reference_dmn.hpp"

#include <random>

namespace testutil {

inline dmn::Matrix random_matrix(dmn::Index rows, dmn::Index cols, std::mt19937_64& rng,
                                 double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> unif(lo, hi);
  dmn::Matrix m(rows, cols);
  for (dmn::Index i = 0; i < rows; ++i)
    for (dmn::Index j = 0; j < cols; ++j) m(i, j) = unif(rng);
  return m;
}

inline refdmn::Mat to_ref(const dmn::Matrix& m) {
  refdmn::Mat out = refdmn::make_mat(static_cast<std::size_t>(m.rows()),
                                     static_cast<std::size_t>(m.cols()));
  for (dmn::Index i = 0; i < m.rows(); ++i)
    for (dmn::Index j = 0; j < m.cols(); ++j)
      out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  return out;
}

inline refdmn::Vec to_ref_vec(const dmn::Matrix& row) {
  refdmn::Vec out(static_cast<std::size_t>(row.size()));
  for (dmn::Index j = 0; j < row.size(); ++j)
    out[static_cast<std::size_t>(j)] = row(row.rows() == 1 ? 0 : j, row.rows() == 1 ? j : 0);
  return out;
}

inline double max_abs_diff(const dmn::Matrix& a, const refdmn::Mat& b) {
  double worst = 0.0;
  for (dmn::Index i = 0; i < a.rows(); ++i)
    for (dmn::Index j = 0; j < a.cols(); ++j)
      worst = std::max(worst, std::abs(a(i, j) - b[static_cast<std::size_t>(i)]
                                                  [static_cast<std::size_t>(j)]));
  return worst;
}

inline double max_abs_diff_vec(const dmn::Matrix& a, const refdmn::Vec& b) {
  double worst = 0.0;
  for (dmn::Index j = 0; j < a.size(); ++j)
    worst = std::max(worst, std::abs(a(0, j) - b[static_cast<std::size_t>(j)]));
  return worst;
}

/// Reduces a matrix node to a weighted-sum scalar: ones * (x .* w) * ones.
inline dmn::Var scalarize(dmn::Tape& tape, dmn::Var x, const dmn::Matrix& weights) {
  const dmn::Var w = tape.input(weights);
  const dmn::Var prod = dmn::hadamard(tape, x, w);
  const dmn::Var left = tape.input(dmn::Matrix::Ones(1, tape.value(prod).rows()));
  const dmn::Var right = tape.input(dmn::Matrix::Ones(tape.value(prod).cols(), 1));
  return dmn::matmul(tape, dmn::matmul(tape, left, prod), right);
}

} // namespace testutil

#endif
