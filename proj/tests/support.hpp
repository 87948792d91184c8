/*
 * Copyright 2026 The KAN-MCP Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef KANMCP_TESTS_SUPPORT_HPP
#define KANMCP_TESTS_SUPPORT_HPP

#include <gtest/gtest.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kanmcp/error.hpp"
#include "kanmcp/rng.hpp"
#include "kanmcp/tensor.hpp"

#define EXPECT_KIND(statement, expected_kind)                                                  \
  do {                                                                                         \
    try {                                                                                      \
      statement;                                                                               \
      ADD_FAILURE() << "expected " << ::kanmcp::to_string(expected_kind) << ", nothing thrown"; \
    } catch (const ::kanmcp::Error& e_) {                                                      \
      EXPECT_EQ(e_.kind(), expected_kind) << e_.describe();                                    \
    }                                                                                          \
  } while (0)

namespace kanmcp::testing {

inline std::vector<Scalar> normals(Rng& rng, std::size_t n, double sd = 1) {
  std::vector<Scalar> v(n);
  for (Scalar& x : v) x = static_cast<Scalar>(rng.normal(0, sd));
  return v;
}

inline Tensor random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double sd = 1) {
  return Tensor::matrix(rows, cols, normals(rng, rows * cols, sd));
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() / ("kanmcp_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace kanmcp::testing

#endif  // KANMCP_TESTS_SUPPORT_HPP
