#pragma once

// Spectral machinery for even 2*pi-periodic profiles sampled at the uniform
// nodes theta_j = j*pi/m, j = 0..m: forward cosine analysis, synthesis of the
// profile and its first/second derivatives, and the combination s' cot(theta)
// that axisymmetric curvature formulas need (its pole values are the s''
// limit, reproduced exactly through a Chebyshev recurrence).
//
// Numerical policy: transform sums are accumulated in long double, and
// analysis zeroes coefficients below a relative threshold (1e-14 by default).
// Differentiation amplifies coefficient noise by k^2, so without the cutoff
// a constant profile would pick up O(m^2.5 * eps) curvature error; with it,
// flat and band-limited profiles differentiate exactly.

#include <Eigen/Dense>

#include <atomic>
#include <memory>
#include <span>
#include <vector>

namespace shrink {

class CosineGrid {
public:
    explicit CosineGrid(int m);  // needs m >= 8 and even
    ~CosineGrid();
    CosineGrid(const CosineGrid&) = delete;
    CosineGrid& operator=(const CosineGrid&) = delete;

    int m() const { return m_; }
    int nodes() const { return m_ + 1; }
    const std::vector<double>& theta() const { return theta_; }

    // nodal values -> cosine coefficients a_0..a_m, with relative truncation
    std::vector<double> analyze(std::span<const double> values,
                                double rel_trunc = 1e-14) const;

    // coefficients -> profile, first/second derivative, and s' cot(theta)
    struct Fields {
        std::vector<double> value;
        std::vector<double> d1;
        std::vector<double> d2;
        std::vector<double> d1_cot;  // pole entries carry the d2 limit
    };
    Fields synthesize(std::span<const double> coeff) const;

    // dense nodal operators built from the untruncated transform (the smooth
    // linearization used by implicit solvers); computed once on demand
    const Eigen::MatrixXd& d2_op() const;     // values -> s''
    const Eigen::MatrixXd& d1cot_op() const;  // values -> s' cot(theta)

private:
    struct Ops;
    const Ops& ops() const;

    int m_;
    std::vector<double> theta_;
    std::vector<long double> cos_tab_;  // cos(t*pi/m), t = 0..2m-1
    std::vector<long double> sin_tab_;
    mutable std::atomic<const Ops*> ops_{nullptr};
};

} // namespace shrink
