/*
 * Copyright 2026 The FlyAct Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "flyact/srkda.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "flyact/parallel.hpp"

namespace flyact {
namespace {

constexpr int kOracleMaxSamples = 64;
constexpr double kSolveResidualLimit = 1e-8;

void check_labels(const std::vector<int>& labels, int num_classes) {
  if (num_classes < 2) throw MissingClass("need at least 2 classes");
  std::vector<int> counts(num_classes, 0);
  for (int label : labels) {
    if (label < 0 || label >= num_classes) {
      throw DataError("label index " + std::to_string(label) + " outside [0, " +
                      std::to_string(num_classes) + ")");
    }
    ++counts[label];
  }
  for (int k = 0; k < num_classes; ++k) {
    if (counts[k] == 0) throw MissingClass("class " + std::to_string(k) + " has no samples");
  }
}

double rbf_from_d2(double d2, double gamma) {
  return std::exp(-d2 / (2.0 * gamma * gamma));
}

/// Flips each column so its largest-magnitude entry (first on ties) is
/// positive; removes the eigenvector sign ambiguity.
void normalize_column_signs(Eigen::MatrixXd& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Eigen::Index arg = 0;
    m.col(j).cwiseAbs().maxCoeff(&arg);
    if (m(arg, j) < 0.0) m.col(j) = -m.col(j);
  }
}

}  // namespace

KernelKind parse_kernel_kind(const std::string& name) {
  if (name == "rbf") return KernelKind::kRbf;
  if (name == "linear") return KernelKind::kLinear;
  throw ConfigError("unknown kernel kind '" + name + "' (expected rbf or linear)");
}

std::string kernel_kind_name(KernelKind kind) {
  return kind == KernelKind::kRbf ? "rbf" : "linear";
}

Eigen::MatrixXd build_kernel(const Eigen::MatrixXd& x, const KernelConfig& cfg) {
  const Eigen::Index n = x.rows();
  if (n < 2) throw DataError("kernel matrix needs at least 2 samples");
  if (!x.allFinite()) throw NonFiniteInput("signature matrix contains non-finite values");
  if (cfg.kind == KernelKind::kRbf && cfg.gamma <= 0.0) {
    throw DataError("rbf kernel requires gamma > 0");
  }

  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = cfg.kind == KernelKind::kRbf ? 1.0 : x.row(i).squaredNorm();
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = cfg.kind == KernelKind::kRbf
                           ? rbf_from_d2((x.row(i) - x.row(j)).squaredNorm(), cfg.gamma)
                           : x.row(i).dot(x.row(j));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Eigen::VectorXd kernel_column(const Eigen::MatrixXd& train, const KernelConfig& cfg,
                              const Eigen::VectorXd& sample) {
  if (sample.size() != train.cols()) {
    throw DimensionMismatch("sample has " + std::to_string(sample.size()) +
                            " dimensions, training data has " + std::to_string(train.cols()));
  }
  if (cfg.kind == KernelKind::kRbf && cfg.gamma <= 0.0) {
    throw DataError("rbf kernel requires gamma > 0");
  }
  Eigen::VectorXd col(train.rows());
  for (Eigen::Index i = 0; i < train.rows(); ++i) {
    col(i) = cfg.kind == KernelKind::kRbf
                 ? rbf_from_d2((train.row(i) - sample.transpose()).squaredNorm(), cfg.gamma)
                 : train.row(i).dot(sample.transpose());
  }
  return col;
}

double median_gamma(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  if (n < 2) throw DataError("median heuristic needs at least 2 samples");
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dists.push_back((x.row(i) - x.row(j)).norm());
    }
  }
  std::sort(dists.begin(), dists.end());
  const std::size_t m = dists.size();
  const double median =
      (m % 2 == 1) ? dists[m / 2] : 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
  if (!(median > 0.0)) {
    throw DegenerateData("median pairwise distance is zero; data has no spread");
  }
  return median;
}

LabelAffinity label_affinity(const std::vector<int>& labels, int num_classes) {
  check_labels(labels, num_classes);
  const Eigen::Index n = static_cast<Eigen::Index>(labels.size());
  LabelAffinity out;
  out.class_sizes.assign(num_classes, 0);
  for (int label : labels) ++out.class_sizes[label];

  out.matrix = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int k = labels[static_cast<std::size_t>(i)];
    const double w = 1.0 / out.class_sizes[k];
    for (Eigen::Index j = 0; j < n; ++j) {
      if (labels[static_cast<std::size_t>(j)] == k) out.matrix(i, j) = w;
    }
  }
  return out;
}

Eigen::MatrixXd response_vectors(const std::vector<int>& labels, int num_classes) {
  check_labels(labels, num_classes);
  const Eigen::Index n = static_cast<Eigen::Index>(labels.size());
  const Eigen::VectorXd ones_unit = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));

  Eigen::MatrixXd q(n, num_classes - 1);
  Eigen::Index col = 0;
  for (int k = 0; k < num_classes; ++k) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (labels[static_cast<std::size_t>(i)] == k) v(i) = 1.0;
    }
    // two orthogonalization passes keep the basis orthogonal to 1e-15
    for (int pass = 0; pass < 2; ++pass) {
      v -= ones_unit.dot(v) * ones_unit;
      for (Eigen::Index j = 0; j < col; ++j) v -= q.col(j).dot(v) * q.col(j);
    }
    const double norm = v.norm();
    if (norm < 1e-8) continue;  // the last indicator is spanned by the previous ones
    if (col == num_classes - 1) {
      throw DataError("response basis exceeded c-1 columns; labels are inconsistent");
    }
    q.col(col++) = v / norm;
  }
  if (col != num_classes - 1) {
    throw DataError("response basis has " + std::to_string(col) + " columns, expected " +
                    std::to_string(num_classes - 1));
  }
  return q;
}

Eigen::MatrixXd solve_projection(const Eigen::MatrixXd& k, const Eigen::MatrixXd& responses,
                                 double delta) {
  if (k.rows() != k.cols()) throw DataError("kernel matrix must be square");
  if (responses.rows() != k.rows()) {
    throw DimensionMismatch("responses have " + std::to_string(responses.rows()) +
                            " rows, kernel has " + std::to_string(k.rows()));
  }
  if (delta <= 0.0) throw DataError("regularization delta must be > 0");
  if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw DataError("kernel matrix must be symmetric");
  }

  Eigen::MatrixXd regularized = k;
  regularized.diagonal().array() += delta;
  const Eigen::LLT<Eigen::MatrixXd> llt(regularized);
  if (llt.info() != Eigen::Success) {
    throw FactorizationFailure("K + delta I is not positive definite; broken kernel");
  }

  Eigen::MatrixXd omega = llt.solve(responses);
  omega += llt.solve(responses - regularized * omega);  // one refinement step

  const Eigen::MatrixXd residual = responses - regularized * omega;
  for (Eigen::Index j = 0; j < residual.cols(); ++j) {
    const double r = residual.col(j).cwiseAbs().maxCoeff();
    if (!(r < kSolveResidualLimit)) {
      throw FactorizationFailure("projection solve residual " + std::to_string(r) +
                                 " exceeds " + std::to_string(kSolveResidualLimit));
    }
  }
  return omega;
}

Eigen::VectorXd project(const ProjectionModel& model, const Eigen::VectorXd& s) {
  return model.coefficients_omega.transpose() *
         kernel_column(model.train_signatures, model.kernel, s);
}

Eigen::MatrixXd project_batch(const ProjectionModel& model, const Eigen::MatrixXd& samples,
                              int threads) {
  Eigen::MatrixXd out(samples.rows(), model.coefficients_omega.cols());
  std::vector<Eigen::VectorXd> rows(static_cast<std::size_t>(samples.rows()));
  parallel_for(static_cast<std::size_t>(samples.rows()), threads, [&](std::size_t i) {
    rows[i] = project(model, samples.row(static_cast<Eigen::Index>(i)).transpose());
  });
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    out.row(i) = rows[static_cast<std::size_t>(i)].transpose();
  }
  return out;
}

Eigen::MatrixXd direct_kda_oracle(const Eigen::MatrixXd& k, const std::vector<int>& labels,
                                  int num_classes, double delta) {
  const Eigen::Index n = k.rows();
  if (n > kOracleMaxSamples) {
    throw OracleTooLarge("direct eigenproblem oracle is limited to " +
                         std::to_string(kOracleMaxSamples) + " samples, got " +
                         std::to_string(n));
  }
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw DimensionMismatch("labels do not match the kernel size");
  }
  if (delta <= 0.0) throw DataError("regularization delta must be > 0");
  check_labels(labels, num_classes);

  // Deflate the all-ones response: it shares the top eigenvalue of L but
  // projects every sample to the same value.
  Eigen::MatrixXd l = label_affinity(labels, num_classes).matrix;
  l -= Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));

  Eigen::MatrixXd a = k * l * k;
  Eigen::MatrixXd b = k * k + delta * k;
  a = ((a + a.transpose()) / 2.0).eval();
  b = ((b + b.transpose()) / 2.0).eval();

  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, b);
  if (solver.info() != Eigen::Success) {
    throw FactorizationFailure("generalized eigensolver failed; K K + delta K is singular");
  }

  const int directions = num_classes - 1;
  Eigen::MatrixXd omega(n, directions);
  for (int j = 0; j < directions; ++j) {
    omega.col(j) = solver.eigenvectors().col(n - 1 - j);  // largest eigenvalue first
  }
  normalize_column_signs(omega);
  return omega;
}

}  // namespace flyact
