#pragma once

// Spectral extension of a symmetric curvature function to symmetric
// matrices: F(A) = f(eigenvalues of A), its derivative as a matrix, and the
// second derivative applied twice to a symmetric perturbation.  The second
// derivative mixes the Hessian of f on eigenvalues with divided differences
// of the gradient across eigenvalue pairs; near-coincident eigenvalues
// switch to the symmetrized Hessian limit so the value stays continuous.

#include <Eigen/Dense>

#include <atomic>
#include <memory>

#include "shrink/symfun.hpp"

namespace shrink::matrixfun {

// symmetric matrix with lazily computed, immutable spectral data.
// Eigenvalues are ascending; each eigenvector is sign-fixed so its
// largest-magnitude entry (first such index on ties) is positive, which
// makes decompositions reproducible across runs.
class SymMatrix {
public:
    // validates relative asymmetry <= 1e-14, then stores the symmetrized part
    explicit SymMatrix(const Eigen::MatrixXd& a);

    int dim() const { return static_cast<int>(mat_.rows()); }
    const Eigen::MatrixXd& mat() const { return mat_; }
    const Eigen::VectorXd& eigenvalues() const { return spectral().values; }
    const Eigen::MatrixXd& eigenvectors() const { return spectral().vectors; }

private:
    struct Spectral {
        Eigen::VectorXd values;
        Eigen::MatrixXd vectors;
    };
    const Spectral& spectral() const;

    Eigen::MatrixXd mat_;
    // single-assignment cache: losers of a concurrent first computation
    // discard their copy, readers always see a fully built decomposition
    mutable std::atomic<const Spectral*> cache_{nullptr};

public:
    SymMatrix(const SymMatrix& other);
    SymMatrix& operator=(const SymMatrix& other);
    ~SymMatrix();
};

// F(A) = f(eigenvalues); throws std::domain_error if the spectrum leaves
// the positive cone
double F_of(const symfun::SpeedFunction& f, const SymMatrix& A);

// dF(A) = Q diag(df_i) Q^T, the gradient as a symmetric matrix
Eigen::MatrixXd dF(const symfun::SpeedFunction& f, const SymMatrix& A);

// second derivative of F at A applied to (B, B):
//   sum_ik d2f_ik Bt_ii Bt_kk + 2 sum_{i>k} w_ik Bt_ik^2,  Bt = Q^T B Q,
// with w_ik the gradient divided difference across (lambda_i, lambda_k), or
// the symmetrized Hessian limit when |lambda_i - lambda_k| <= 1e-7 max|lambda|
double d2F_action(const symfun::SpeedFunction& f, const SymMatrix& A, const Eigen::MatrixXd& B);

} // namespace shrink::matrixfun
