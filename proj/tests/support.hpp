#pragma once

#include <initializer_list>
#include <vector>

#include <gtest/gtest.h>

#include "dldl/core.hpp"

namespace testing_support {

inline dldl::Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.begin()->size());
  dldl::Matrix m(n, c);
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline dldl::LabelMatrix labels(std::initializer_list<std::initializer_list<int>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.begin()->size());
  dldl::LabelMatrix m(n, c);
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (int v : r) m(i, j++) = static_cast<std::uint8_t>(v);
    ++i;
  }
  return m;
}

inline std::vector<double> to_vector(const dldl::Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace testing_support

// Expects `expr` to throw dldl::Error with the given code.
#define EXPECT_DLDL_ERROR(expr, error_code)                                  \
  do {                                                                       \
    try {                                                                    \
      (void)(expr);                                                          \
      ADD_FAILURE() << "expected " << dldl::to_string(error_code);           \
    } catch (const dldl::Error& e) {                                         \
      EXPECT_EQ(e.code(), error_code) << e.what();                           \
    }                                                                        \
  } while (0)
