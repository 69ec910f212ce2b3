// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "paprx/errors.hpp"
#include "paprx/numerics/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace paprx {

inline constexpr double kPsdTolerance = 1e-10;

/// Relative Hermitian check ‖A − Aᴴ‖_F ≤ tol·max(1, ‖A‖_F).
inline bool is_hermitian(const ComplexMatrix& a, double tol = kPsdTolerance) {
    if (a.rows() != a.cols()) return false;
    const double scale = std::max(1.0, a.norm());
    return (a - a.adjoint()).norm() <= tol * scale;
}

/// Principal square root B of a Hermitian PSD matrix, B = Bᴴ and B·Bᴴ = A.
/// Eigenvalues down to −1e-10 (relative to max(1, λ_max)) are clamped to zero.
inline ComplexMatrix hermitian_sqrt(const ComplexMatrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw SizingError("hermitian_sqrt: matrix must be square and non-empty");
    }
    if (!is_hermitian(a)) throw ValidationError("hermitian_sqrt: matrix is not Hermitian");
    const ComplexMatrix sym = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sym);
    if (es.info() != Eigen::Success) throw ValidationError("hermitian_sqrt: eigensolver failed");
    Eigen::VectorXd ev = es.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) < -kPsdTolerance * scale) {
            throw ValidationError("hermitian_sqrt: matrix is not positive semidefinite");
        }
        ev(i) = std::sqrt(std::max(ev(i), 0.0));
    }
    const ComplexMatrix& v = es.eigenvectors();
    return v * ev.cast<cplx>().asDiagonal() * v.adjoint();
}

/// Largest eigenvalue of a Hermitian PSD matrix by power iteration.
inline double lambda_max_psd(const ComplexMatrix& a, int max_iters = 500, double tol = 1e-12) {
    const Eigen::Index n = a.rows();
    if (n == 0) return 0.0;
    ComplexVector v = ComplexVector::Constant(n, cplx(1.0, 0.0));
    // deterministic, not orthogonal to a single coordinate direction
    for (Eigen::Index i = 0; i < n; ++i) v(i) += cplx(0.0, 1e-3 * static_cast<double>(i + 1));
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        ComplexVector w = a * v;
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        const double next = std::real(v.dot(w));
        v = w / nw;
        if (std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return lambda;
}

}  // namespace paprx
