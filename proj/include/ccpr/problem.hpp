// Copyright 2026 The ccpr-sim Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

namespace ccpr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct ProblemParams {
  std::size_t n_train = 2000;
  std::size_t n_test = 400;
  std::size_t dim = 1000;
  double noise_std = 0.0;
};

// Synthetic least-squares instance. The Gram matrix and X^T y are computed
// once; only theta changes across iterations.
struct RegressionProblem {
  Matrix x_train;
  Vector y_train;
  Matrix x_test;
  Vector y_test;
  Matrix gram;       // X_train^T X_train
  Vector xty;        // X_train^T y_train
  Vector theta_star;

  std::size_t dim() const { return static_cast<std::size_t>(gram.rows()); }
};

// Row-slices of the Gram matrix, one per submatrix W_k.
struct BlockPartition {
  std::size_t count = 0;
  std::size_t block_rows = 0;
  std::vector<Matrix> blocks;

  // W_k * theta for a single block.
  Vector product(std::size_t k, const Vector& theta) const;
  // Stacks W_k * theta over all k, i.e. W * theta.
  Vector stacked_product(const Vector& theta) const;
};

// Features are i.i.d. N(0,1) scaled by 1/sqrt(n_train); theta_star is
// i.i.d. N(0,1); labels carry additive N(0, noise_std^2) noise.
// Throws ConfigError on zero dimensions.
RegressionProblem generate_problem(const ProblemParams& params, std::uint64_t seed);

// W * theta - b (unnormalized; equals n_train times the gradient of the mean
// squared error loss).
Vector full_gradient(const RegressionProblem& problem, const Vector& theta);

// (1 / 2n) * ||y - X theta||^2
double mse_loss(const Matrix& x, const Vector& y, const Vector& theta);

BlockPartition partition_blocks(const RegressionProblem& problem, std::size_t count);

// Problem dumps: one file per field plus problem.meta holding the dimensions.
// Binary files are raw row-major little-endian float64 with no header.
enum class DumpFormat { binary, csv };

void export_problem(const RegressionProblem& problem, const std::filesystem::path& dir,
                    DumpFormat format);
RegressionProblem import_problem(const std::filesystem::path& dir);

}  // namespace ccpr
