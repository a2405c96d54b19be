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

#include "ccpr/problem.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "ccpr/error.hpp"
#include "ccpr/random.hpp"

namespace ccpr {

namespace {

Matrix standard_normal(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  // Fill row by row so the draw order is independent of Eigen's storage order.
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = normal(rng);
  return m;
}

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return __builtin_bswap64(v);
  }
}

void write_binary(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(m(r, c)));
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
}

Matrix read_binary(const std::filesystem::path& path, std::size_t rows, std::size_t cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  if (std::filesystem::file_size(path) != rows * cols * sizeof(double))
    throw DimensionError("unexpected size of " + path.string());
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      std::uint64_t bits = 0;
      in.read(reinterpret_cast<char*>(&bits), sizeof bits);
      m(r, c) = std::bit_cast<double>(to_little(bits));
    }
  }
  return m;
}

void write_csv(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << m(r, c);
    }
    out << '\n';
  }
}

Matrix read_csv(const std::filesystem::path& path, std::size_t rows, std::size_t cols) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  Matrix m(rows, cols);
  std::string line;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) throw DimensionError("too few rows in " + path.string());
    std::istringstream fields(line);
    std::string cell;
    for (std::size_t c = 0; c < cols; ++c) {
      if (!std::getline(fields, cell, ','))
        throw DimensionError("too few columns in " + path.string());
      m(r, c) = std::stod(cell);
    }
  }
  return m;
}

}  // namespace

Vector BlockPartition::product(std::size_t k, const Vector& theta) const {
  return blocks.at(k) * theta;
}

Vector BlockPartition::stacked_product(const Vector& theta) const {
  Vector out(count * block_rows);
  for (std::size_t k = 0; k < count; ++k)
    out.segment(k * block_rows, block_rows).noalias() = blocks[k] * theta;
  return out;
}

RegressionProblem generate_problem(const ProblemParams& params, std::uint64_t seed) {
  if (params.n_train == 0 || params.n_test == 0 || params.dim == 0)
    throw ConfigError("problem dimensions must be positive");
  if (!(params.noise_std >= 0.0)) throw ConfigError("noise_std must be non-negative");

  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(params.n_train));

  RegressionProblem p;
  p.theta_star = standard_normal(params.dim, 1, rng);
  p.x_train = standard_normal(params.n_train, params.dim, rng) * scale;
  p.x_test = standard_normal(params.n_test, params.dim, rng) * scale;
  p.y_train = p.x_train * p.theta_star;
  p.y_test = p.x_test * p.theta_star;
  if (params.noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, params.noise_std);
    for (Eigen::Index i = 0; i < p.y_train.size(); ++i) p.y_train(i) += noise(rng);
    for (Eigen::Index i = 0; i < p.y_test.size(); ++i) p.y_test(i) += noise(rng);
  }
  p.gram = p.x_train.transpose() * p.x_train;
  p.xty = p.x_train.transpose() * p.y_train;
  return p;
}

Vector full_gradient(const RegressionProblem& problem, const Vector& theta) {
  if (static_cast<std::size_t>(theta.size()) != problem.dim())
    throw DimensionError("theta has length " + std::to_string(theta.size()) + ", expected " +
                         std::to_string(problem.dim()));
  return problem.gram * theta - problem.xty;
}

double mse_loss(const Matrix& x, const Vector& y, const Vector& theta) {
  if (x.cols() != theta.size() || x.rows() != y.size())
    throw DimensionError("loss operands disagree in size");
  return (y - x * theta).squaredNorm() / (2.0 * static_cast<double>(y.size()));
}

BlockPartition partition_blocks(const RegressionProblem& problem, std::size_t count) {
  const std::size_t d = problem.dim();
  if (count == 0 || d % count != 0)
    throw ConfigError("block count " + std::to_string(count) + " does not divide d=" +
                      std::to_string(d));
  BlockPartition part;
  part.count = count;
  part.block_rows = d / count;
  part.blocks.reserve(count);
  for (std::size_t k = 0; k < count; ++k)
    part.blocks.emplace_back(problem.gram.middleRows(k * part.block_rows, part.block_rows));
  return part;
}

void export_problem(const RegressionProblem& problem, const std::filesystem::path& dir,
                    DumpFormat format) {
  std::filesystem::create_directories(dir);
  const bool binary = format == DumpFormat::binary;
  const auto ext = binary ? ".bin" : ".csv";
  auto dump = [&](const Matrix& m, const std::string& name) {
    const auto path = dir / (name + ext);
    binary ? write_binary(m, path) : write_csv(m, path);
  };
  dump(problem.x_train, "x_train");
  dump(problem.y_train, "y_train");
  dump(problem.x_test, "x_test");
  dump(problem.y_test, "y_test");
  dump(problem.gram, "gram");
  dump(problem.xty, "xty");
  dump(problem.theta_star, "theta_star");

  std::ofstream meta(dir / "problem.meta");
  meta << "format=" << (binary ? "binary" : "csv") << '\n'
       << "n_train=" << problem.x_train.rows() << '\n'
       << "n_test=" << problem.x_test.rows() << '\n'
       << "dim=" << problem.dim() << '\n';
  if (!meta) throw std::runtime_error("cannot write " + (dir / "problem.meta").string());
}

RegressionProblem import_problem(const std::filesystem::path& dir) {
  std::ifstream meta(dir / "problem.meta");
  if (!meta) throw std::runtime_error("missing " + (dir / "problem.meta").string());
  std::map<std::string, std::string> kv;
  for (std::string line; std::getline(meta, line);) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  for (const char* key : {"format", "n_train", "n_test", "dim"})
    if (!kv.count(key)) throw DimensionError(std::string("problem.meta lacks ") + key);

  const bool binary = kv["format"] == "binary";
  const std::size_t n = std::stoull(kv["n_train"]);
  const std::size_t n_test = std::stoull(kv["n_test"]);
  const std::size_t d = std::stoull(kv["dim"]);
  const auto ext = binary ? ".bin" : ".csv";
  auto load = [&](const std::string& name, std::size_t rows, std::size_t cols) {
    const auto path = dir / (name + ext);
    return binary ? read_binary(path, rows, cols) : read_csv(path, rows, cols);
  };

  RegressionProblem p;
  p.x_train = load("x_train", n, d);
  p.y_train = load("y_train", n, 1);
  p.x_test = load("x_test", n_test, d);
  p.y_test = load("y_test", n_test, 1);
  p.gram = load("gram", d, d);
  p.xty = load("xty", d, 1);
  p.theta_star = load("theta_star", d, 1);
  return p;
}

}  // namespace ccpr
