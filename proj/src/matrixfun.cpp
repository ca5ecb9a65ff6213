#include "shrink/matrixfun.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace shrink::matrixfun {

// ====================================================================
// SymMatrix: validation + cached spectral decomposition
// ====================================================================

namespace {

void require_symmetric(const Eigen::MatrixXd& a, const char* what) {
    if (a.rows() != a.cols() || a.rows() < 1)
        throw std::invalid_argument(std::string(what) + " must be square and nonempty");
    double scale = a.cwiseAbs().maxCoeff();
    double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-14 * std::max(scale, 1e-300))
        throw std::invalid_argument(std::string(what) + " is not symmetric (relative asymmetry " +
                                    std::to_string(asym / std::max(scale, 1e-300)) + ")");
}

} // namespace

SymMatrix::SymMatrix(const Eigen::MatrixXd& a) {
    require_symmetric(a, "matrix");
    mat_ = 0.5 * (a + a.transpose());
}

SymMatrix::SymMatrix(const SymMatrix& other) : mat_(other.mat_) {
    const Spectral* c = other.cache_.load(std::memory_order_acquire);
    cache_.store(c ? new Spectral(*c) : nullptr, std::memory_order_release);
}

SymMatrix& SymMatrix::operator=(const SymMatrix& other) {
    if (this == &other) return *this;
    mat_ = other.mat_;
    const Spectral* c = other.cache_.load(std::memory_order_acquire);
    delete cache_.exchange(c ? new Spectral(*c) : nullptr);
    return *this;
}

SymMatrix::~SymMatrix() { delete cache_.load(std::memory_order_acquire); }

const SymMatrix::Spectral& SymMatrix::spectral() const {
    const Spectral* have = cache_.load(std::memory_order_acquire);
    if (have) return *have;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat_);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition failed to converge");
    auto built = std::make_unique<Spectral>();
    built->values = es.eigenvalues();  // ascending
    built->vectors = es.eigenvectors();
    for (int c = 0; c < built->vectors.cols(); ++c) {
        int imax = 0;
        double vmax = 0.0;
        for (int r = 0; r < built->vectors.rows(); ++r) {
            double v = std::abs(built->vectors(r, c));
            if (v > vmax) {  // strict: ties keep the first index
                vmax = v;
                imax = r;
            }
        }
        if (built->vectors(imax, c) < 0.0) built->vectors.col(c) *= -1.0;
    }

    const Spectral* expected = nullptr;
    const Spectral* mine = built.get();
    if (cache_.compare_exchange_strong(expected, mine, std::memory_order_acq_rel)) {
        built.release();
        return *mine;
    }
    return *expected;  // another thread won; drop our copy
}

// ====================================================================
// F, dF, d2F
// ====================================================================

namespace {

std::vector<double> spectrum_vector(const SymMatrix& A) {
    const Eigen::VectorXd& ev = A.eigenvalues();
    return std::vector<double>(ev.data(), ev.data() + ev.size());
}

} // namespace

double F_of(const symfun::SpeedFunction& f, const SymMatrix& A) {
    if (A.dim() != f.dim())
        throw std::invalid_argument("matrix dimension does not match the speed function");
    return f.eval(spectrum_vector(A));
}

Eigen::MatrixXd dF(const symfun::SpeedFunction& f, const SymMatrix& A) {
    if (A.dim() != f.dim())
        throw std::invalid_argument("matrix dimension does not match the speed function");
    symfun::DerivBundle b = f.derivs(spectrum_vector(A));
    const Eigen::MatrixXd& Q = A.eigenvectors();
    Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(b.grad.data(), b.n);
    return Q * g.asDiagonal() * Q.transpose();
}

double d2F_action(const symfun::SpeedFunction& f, const SymMatrix& A, const Eigen::MatrixXd& B) {
    int n = f.dim();
    if (A.dim() != n)
        throw std::invalid_argument("matrix dimension does not match the speed function");
    require_symmetric(B, "perturbation");
    if (B.rows() != n)
        throw std::invalid_argument("perturbation dimension does not match the base matrix");

    std::vector<double> lam = spectrum_vector(A);
    symfun::DerivBundle b = f.derivs(lam);
    Eigen::MatrixXd Bt = A.eigenvectors().transpose() * 0.5 * (B + B.transpose()) * A.eigenvectors();

    double lmax = 0.0;
    for (double v : lam) lmax = std::max(lmax, std::abs(v));

    double hess_part = 0.0;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) hess_part += b.h(i, k) * Bt(i, i) * Bt(k, k);

    double dd_part = 0.0;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < i; ++k) {
            double w;
            if (std::abs(lam[static_cast<std::size_t>(i)] - lam[static_cast<std::size_t>(k)]) <=
                1e-7 * lmax)
                w = 0.5 * (b.h(i, i) + b.h(k, k)) - b.h(i, k);
            else
                w = (b.grad[static_cast<std::size_t>(i)] - b.grad[static_cast<std::size_t>(k)]) /
                    (lam[static_cast<std::size_t>(i)] - lam[static_cast<std::size_t>(k)]);
            dd_part += 2.0 * w * Bt(i, k) * Bt(i, k);
        }

    return hess_part + dd_part;
}

} // namespace shrink::matrixfun
