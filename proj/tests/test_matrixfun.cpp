#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "shrink/matrixfun.hpp"
#include "shrink/rng.hpp"
#include "shrink/symfun.hpp"
#include "test_util.hpp"

using namespace shrink::matrixfun;
using shrink::Rng;
using shrink::symfun::SpeedFunction;

namespace {

// ====================================================================
// construction helpers and finite-difference oracles
// ====================================================================

Eigen::MatrixXd random_orthogonal(int n, Rng& rng) {
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    // make the factorization unique-ish: flip columns so R's diagonal is positive
    Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int c = 0; c < n; ++c)
        if (r(c, c) < 0) q.col(c) *= -1.0;
    return q;
}

Eigen::MatrixXd spd_with_eigenvalues(const std::vector<double>& lam, const Eigen::MatrixXd& q) {
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(lam.data(), static_cast<long>(lam.size()));
    return q * d.asDiagonal() * q.transpose();
}

Eigen::MatrixXd random_sym(int n, Rng& rng) {
    Eigen::MatrixXd b(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) b(i, j) = b(j, i) = rng.normal();
    return b;
}

double F_at(const SpeedFunction& f, const Eigen::MatrixXd& m) { return F_of(f, SymMatrix(m)); }

// d/dt F(A + tB) at t = 0, central difference
double fd_dF(const SpeedFunction& f, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
             double h) {
    return (F_at(f, a + h * b) - F_at(f, a - h * b)) / (2.0 * h);
}

// d^2/dt^2 F(A + tB) at t = 0, fourth-order five-point stencil
double fd_d2F(const SpeedFunction& f, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
              double h) {
    double f0 = F_at(f, a);
    double fp = F_at(f, a + h * b), fm = F_at(f, a - h * b);
    double fpp = F_at(f, a + 2.0 * h * b), fmm = F_at(f, a - 2.0 * h * b);
    return (-fpp + 16.0 * fp - 30.0 * f0 + 16.0 * fm - fmm) / (12.0 * h * h);
}

} // namespace

// ====================================================================
// basic consistency
// ====================================================================

TEST_CASE("diagonal matrices reproduce the vector function") {
    Rng rng(1000);
    for (const auto& f : testutil::catalog(3)) {
        for (int s = 0; s < 20; ++s) {
            std::vector<double> kap = rng.positive_cone_point(3);
            Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
            for (int i = 0; i < 3; ++i) d(i, i) = kap[static_cast<std::size_t>(i)];
            SymMatrix A(d);
            CHECK(F_of(f, A) == doctest::Approx(f.eval(kap)).epsilon(1e-13));
            Eigen::MatrixXd g = dF(f, A);
            auto bundle = f.derivs(kap);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    double expect = (i == j) ? bundle.grad[static_cast<std::size_t>(i)] : 0.0;
                    CHECK(std::abs(g(i, j) - expect) <= 1e-12 * (1.0 + std::abs(expect)));
                }
        }
    }
}

TEST_CASE("the linear speed extends to the trace") {
    Rng rng(1001);
    auto h1 = SpeedFunction::power_mean(3, 1.0);
    for (int s = 0; s < 20; ++s) {
        Eigen::MatrixXd q = random_orthogonal(3, rng);
        Eigen::MatrixXd a = spd_with_eigenvalues(rng.positive_cone_point(3), q);
        SymMatrix A(a);
        CHECK(F_of(h1, A) == doctest::Approx(a.trace()).epsilon(1e-13));
        CHECK((dF(h1, A) - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
        Eigen::MatrixXd b = random_sym(3, rng);
        CHECK(std::abs(d2F_action(h1, A, b)) <= 1e-12);
    }
}

TEST_CASE("conjugation invariance under orthogonal maps") {
    Rng rng(1002);
    for (const auto& f : testutil::catalog(3)) {
        for (int s = 0; s < 10; ++s) {
            Eigen::MatrixXd q0 = random_orthogonal(3, rng);
            Eigen::MatrixXd a = spd_with_eigenvalues(rng.positive_cone_point(3), q0);
            Eigen::MatrixXd b = random_sym(3, rng);
            Eigen::MatrixXd u = random_orthogonal(3, rng);
            SymMatrix A(a), Au(u * a * u.transpose());
            CHECK(F_of(f, A) == doctest::Approx(F_of(f, Au)).epsilon(1e-12));
            Eigen::MatrixXd lhs = dF(f, Au);
            Eigen::MatrixXd rhs = u * dF(f, A) * u.transpose();
            CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-11 * (1.0 + rhs.cwiseAbs().maxCoeff()));
            double d2a = d2F_action(f, A, b);
            double d2u = d2F_action(f, Au, u * b * u.transpose());
            CHECK(std::abs(d2a - d2u) <= 1e-10 * (1.0 + std::abs(d2a)));
        }
    }
}

TEST_CASE("spectral data is deterministic and sign-fixed") {
    Rng rng(1003);
    Eigen::MatrixXd a = spd_with_eigenvalues({0.5, 1.5, 4.0}, random_orthogonal(3, rng));
    SymMatrix A1(a), A2(a);
    CHECK((A1.eigenvectors() - A2.eigenvectors()).cwiseAbs().maxCoeff() == 0.0);
    for (int c = 0; c < 3; ++c) {
        int imax = 0;
        for (int r = 0; r < 3; ++r)
            if (std::abs(A1.eigenvectors()(r, c)) > std::abs(A1.eigenvectors()(imax, c))) imax = r;
        CHECK(A1.eigenvectors()(imax, c) > 0.0);
    }
    for (int c = 1; c < 3; ++c) CHECK(A1.eigenvalues()(c) >= A1.eigenvalues()(c - 1));
}

// ====================================================================
// derivative oracles
// ====================================================================

TEST_CASE("dF matches directional finite differences") {
    Rng rng(1100);
    for (int n : {2, 3, 5}) {
        for (const auto& f : testutil::catalog(n)) {
            for (int s = 0; s < 8; ++s) {
                std::vector<double> lam = rng.positive_cone_point(n);
                double lmin = *std::min_element(lam.begin(), lam.end());
                Eigen::MatrixXd a = spd_with_eigenvalues(lam, random_orthogonal(n, rng));
                Eigen::MatrixXd b = random_sym(n, rng);
                double h = 1e-5 * lmin / (b.cwiseAbs().maxCoeff() + 1.0);
                SymMatrix A(a);
                double inner = (dF(f, A).transpose() * b).trace();
                double fd = fd_dF(f, a, b, h);
                CHECK(std::abs(inner - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
            }
        }
    }
}

TEST_CASE("d2F_action matches five-point finite differences") {
    Rng rng(1101);
    for (int n : {2, 3, 5}) {
        for (const auto& f : testutil::catalog(n)) {
            for (int s = 0; s < 6; ++s) {
                std::vector<double> lam = rng.positive_cone_point(n);
                double lmin = *std::min_element(lam.begin(), lam.end());
                Eigen::MatrixXd a = spd_with_eigenvalues(lam, random_orthogonal(n, rng));
                Eigen::MatrixXd b = random_sym(n, rng);
                double h = 5e-3 * lmin / (b.cwiseAbs().maxCoeff() + 1.0);
                double d2 = d2F_action(f, SymMatrix(a), b);
                double fd = fd_d2F(f, a, b, h);
                CHECK(std::abs(d2 - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
            }
        }
    }
}

TEST_CASE("d2F_action with near-coincident eigenvalues stays accurate") {
    Rng rng(1102);
    auto f = SpeedFunction::quotient(3, 2, 1);
    for (double gap : {1e-2, 1e-4, 1e-6, 1e-7}) {
        for (int s = 0; s < 5; ++s) {
            std::vector<double> lam = {1.0 - gap / 2.0, 1.0 + gap / 2.0, 3.0};
            Eigen::MatrixXd a = spd_with_eigenvalues(lam, random_orthogonal(3, rng));
            Eigen::MatrixXd b = random_sym(3, rng);
            double h = 2e-3 / (b.cwiseAbs().maxCoeff() + 1.0);
            double d2 = d2F_action(f, SymMatrix(a), b);
            double fd = fd_d2F(f, a, b, h);
            CHECK(std::abs(d2 - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("divided-difference branch agrees with its limit across the threshold") {
    // symmetric eigenvalue splits around a common center: the exact value is
    // an even function of the gap, so branch values must agree to O(gap^2)
    Rng rng(1103);
    auto f = SpeedFunction::elem_mean_root(3, 2);
    Eigen::MatrixXd q = random_orthogonal(3, rng);
    Eigen::MatrixXd b = random_sym(3, rng);
    auto at_gap = [&](double gap) {
        std::vector<double> lam = {2.0 - gap / 2.0, 2.0 + gap / 2.0, 0.8};
        return d2F_action(f, SymMatrix(spd_with_eigenvalues(lam, q)), b);
    };
    double exact_side = at_gap(1e-4);   // divided-difference branch
    double limit_side = at_gap(1e-8);   // symmetrized Hessian branch
    double zero_gap = at_gap(0.0);
    CHECK(std::abs(exact_side - limit_side) <= 1e-6 * std::max(1.0, std::abs(zero_gap)));
    CHECK(std::abs(limit_side - zero_gap) <= 1e-9 * std::max(1.0, std::abs(zero_gap)));
}

// ====================================================================
// structural inequalities at the matrix level
// ====================================================================

TEST_CASE("concave speeds have nonpositive second derivative action") {
    Rng rng(1200);
    for (const auto& f : testutil::catalog(3)) {
        if (!f.traits().concave) continue;
        for (int s = 0; s < 40; ++s) {
            Eigen::MatrixXd a =
                spd_with_eigenvalues(rng.positive_cone_point(3), random_orthogonal(3, rng));
            Eigen::MatrixXd b = random_sym(3, rng);
            double d2 = d2F_action(f, SymMatrix(a), b);
            CHECK(d2 <= 1e-10 * (1.0 + std::abs(d2)));
        }
    }
}

TEST_CASE("inverse-concave speeds satisfy the matrix quadratic lower bound") {
    // d2F(B,B) + 2 sum_ik df_i Bt_ik^2 / lam_k  >=  2 <dF,B>^2 / F
    Rng rng(1201);
    for (const auto& f : testutil::catalog(3)) {
        if (!f.traits().inverse_concave) continue;
        for (int s = 0; s < 40; ++s) {
            Eigen::MatrixXd q = random_orthogonal(3, rng);
            Eigen::MatrixXd a = spd_with_eigenvalues(rng.positive_cone_point(3), q);
            Eigen::MatrixXd b = random_sym(3, rng);
            SymMatrix A(a);
            // gradient entries must live in the same (ascending) frame as bt
            std::vector<double> lam(A.eigenvalues().data(), A.eigenvalues().data() + 3);
            auto bundle = f.derivs(lam);
            Eigen::MatrixXd bt = A.eigenvectors().transpose() * b * A.eigenvectors();
            double cross = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int k = 0; k < 3; ++k)
                    cross += bundle.grad[static_cast<std::size_t>(i)] * bt(i, k) * bt(i, k) /
                             A.eigenvalues()(k);
            double inner = (dF(f, A).transpose() * b).trace();
            double lhs = d2F_action(f, A, b) + 2.0 * cross;
            double rhs = 2.0 * inner * inner / F_of(f, A);
            CHECK(lhs - rhs >= -1e-9 * (1.0 + std::abs(lhs) + std::abs(rhs)));
        }
    }
}

// ====================================================================
// validation
// ====================================================================

TEST_CASE("asymmetric input is rejected") {
    Eigen::MatrixXd m(2, 2);
    m << 1.0, 0.2, 0.3, 1.0;
    CHECK_THROWS_AS(SymMatrix{m}, std::invalid_argument);
}

TEST_CASE("spectra outside the positive cone are rejected at evaluation") {
    auto f = SpeedFunction::elem_mean_root(2, 2);
    Eigen::MatrixXd m(2, 2);
    m << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
    SymMatrix A(m);
    CHECK_THROWS_AS((void)F_of(f, A), std::domain_error);
    CHECK_THROWS_AS((void)dF(f, A), std::domain_error);
}

TEST_CASE("dimension mismatches are rejected") {
    auto f = SpeedFunction::elem_mean_root(3, 2);
    SymMatrix A(Eigen::MatrixXd::Identity(2, 2));
    CHECK_THROWS_AS((void)F_of(f, A), std::invalid_argument);
    SymMatrix A3(Eigen::MatrixXd::Identity(3, 3));
    CHECK_THROWS_AS((void)d2F_action(f, A3, Eigen::MatrixXd::Identity(2, 2)),
                    std::invalid_argument);
}
