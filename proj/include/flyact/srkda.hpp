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

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "flyact/errors.hpp"

namespace flyact {

enum class KernelKind { kRbf, kLinear };

KernelKind parse_kernel_kind(const std::string& name);
std::string kernel_kind_name(KernelKind kind);

/// Kernel and regularization settings for the discriminant solve.
/// gamma <= 0 means "pick the median pairwise distance at training time".
struct KernelConfig {
  KernelKind kind = KernelKind::kRbf;
  double gamma = 0.0;                   // rbf bandwidth
  double regularization_delta = 0.01;   // delta in (K + delta I) omega = responses
};

/// Within-class averaging matrix: entry (i, j) = 1/n_k when samples i and j
/// share class k, else 0. Symmetric, block structured, each row sums to 1.
struct LabelAffinity {
  Eigen::MatrixXd matrix;
  std::vector<int> class_sizes;
};

/// n x n kernel matrix over the rows of x. rbf uses
/// k(u, v) = exp(-|u - v|^2 / (2 gamma^2)) with an exactly-unit diagonal;
/// linear is x * x^T. Throws NonFiniteInput on non-finite rows.
Eigen::MatrixXd build_kernel(const Eigen::MatrixXd& x, const KernelConfig& cfg);

/// Kernel values of one sample against every training row.
Eigen::VectorXd kernel_column(const Eigen::MatrixXd& train, const KernelConfig& cfg,
                              const Eigen::VectorXd& sample);

/// Median of all pairwise Euclidean distances between distinct rows.
/// Throws DegenerateData when the median is not positive.
double median_gamma(const Eigen::MatrixXd& x);

/// Labels are class indices in [0, num_classes); every class must appear.
LabelAffinity label_affinity(const std::vector<int>& labels, int num_classes);

/// The c-1 discriminative response vectors: class indicators orthogonalized
/// against the all-ones vector and each other (Gram-Schmidt, class order),
/// unit norm. Each column is an eigenvector of the label affinity matrix
/// with eigenvalue exactly 1.
Eigen::MatrixXd response_vectors(const std::vector<int>& labels, int num_classes);

/// Solves (K + delta I) omega = responses column-wise via Cholesky, with one
/// step of iterative refinement. Throws FactorizationFailure if K + delta I
/// is not numerically positive definite or a column's max-norm residual
/// stays at or above 1e-8.
Eigen::MatrixXd solve_projection(const Eigen::MatrixXd& k, const Eigen::MatrixXd& responses,
                                 double delta);

/// Trained projection: kernel settings, the training signatures the kernel
/// is evaluated against, and the solved coefficient columns.
struct ProjectionModel {
  Eigen::MatrixXd train_signatures;     // n x d
  Eigen::MatrixXd coefficients_omega;   // n x (c-1)
  KernelConfig kernel;                  // gamma resolved (> 0)
  std::vector<std::string> class_names;
};

/// Out-of-sample projection z_j = sum_i omega(i, j) * k(x_i, s).
Eigen::VectorXd project(const ProjectionModel& model, const Eigen::VectorXd& s);

/// Row-wise batch projection; equals K * omega on the training set.
Eigen::MatrixXd project_batch(const ProjectionModel& model, const Eigen::MatrixXd& samples,
                              int threads = 1);

/// Desk-scale verification path (n <= 64): solves the dense generalized
/// eigenproblem (K L~ K) omega = lambda (K K + delta K) omega directly and
/// returns the top c-1 eigenvectors, each flipped so its largest-magnitude
/// entry is positive. L~ is the label affinity with the all-ones direction
/// deflated (L - 1 1^T / n): the constant vector is a non-discriminative
/// eigenvector of L and would otherwise sit in the same top eigenspace.
Eigen::MatrixXd direct_kda_oracle(const Eigen::MatrixXd& k, const std::vector<int>& labels,
                                  int num_classes, double delta);

}  // namespace flyact
