#include "shrink/cosine_series.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace shrink {

namespace {
constexpr long double PI_L = 3.14159265358979323846264338327950288L;
}

struct CosineGrid::Ops {
    Eigen::MatrixXd d2;
    Eigen::MatrixXd d1cot;
};

CosineGrid::CosineGrid(int m) : m_(m) {
    if (m < 8 || m % 2 != 0)
        throw std::invalid_argument("grid size must be even and at least 8, got " +
                                    std::to_string(m));
    theta_.resize(static_cast<std::size_t>(m) + 1);
    for (int j = 0; j <= m; ++j)
        theta_[static_cast<std::size_t>(j)] =
            static_cast<double>(static_cast<long double>(j) * PI_L / m);
    cos_tab_.resize(static_cast<std::size_t>(2) * m);
    sin_tab_.resize(static_cast<std::size_t>(2) * m);
    for (int t = 0; t < 2 * m; ++t) {
        long double a = static_cast<long double>(t) * PI_L / m;
        cos_tab_[static_cast<std::size_t>(t)] = cosl(a);
        sin_tab_[static_cast<std::size_t>(t)] = sinl(a);
    }
}

CosineGrid::~CosineGrid() { delete ops_.load(std::memory_order_acquire); }

std::vector<double> CosineGrid::analyze(std::span<const double> values,
                                        double rel_trunc) const {
    if (static_cast<int>(values.size()) != m_ + 1)
        throw std::invalid_argument("profile has " + std::to_string(values.size()) +
                                    " nodes, grid expects " + std::to_string(m_ + 1));
    std::vector<double> coeff(static_cast<std::size_t>(m_) + 1);
    for (int k = 0; k <= m_; ++k) {
        long double acc = 0.5L * values[0];  // end weights are halved
        for (int j = 1; j < m_; ++j)
            acc += static_cast<long double>(values[static_cast<std::size_t>(j)]) *
                   cos_tab_[static_cast<std::size_t>((k * j) % (2 * m_))];
        acc += 0.5L * values[static_cast<std::size_t>(m_)] *
               cos_tab_[static_cast<std::size_t>((k * m_) % (2 * m_))];
        long double w = (k == 0 || k == m_) ? 1.0L : 2.0L;  // dual end weights
        coeff[static_cast<std::size_t>(k)] = static_cast<double>(acc * w / m_);
    }
    double amax = 0.0;
    for (double a : coeff) amax = std::max(amax, std::abs(a));
    if (amax > 0.0 && rel_trunc > 0.0)
        for (double& a : coeff)
            if (std::abs(a) < rel_trunc * amax) a = 0.0;
    return coeff;
}

CosineGrid::Fields CosineGrid::synthesize(std::span<const double> coeff) const {
    if (static_cast<int>(coeff.size()) != m_ + 1)
        throw std::invalid_argument("coefficient list has wrong length");
    Fields f;
    f.value.resize(static_cast<std::size_t>(m_) + 1);
    f.d1.resize(static_cast<std::size_t>(m_) + 1);
    f.d2.resize(static_cast<std::size_t>(m_) + 1);
    f.d1_cot.resize(static_cast<std::size_t>(m_) + 1);
    for (int j = 0; j <= m_; ++j) {
        long double v = coeff[0];  // k = 0 contributes to the value only
        long double d1 = 0.0L, d2 = 0.0L, dc = 0.0L;
        long double x = cos_tab_[static_cast<std::size_t>(j % (2 * m_))];  // cos(theta_j)
        // Chebyshev second-kind recurrence: sin(k theta) = sin(theta) U_{k-1}(cos theta);
        // u_curr holds U_{k-1}(x) when term k is accumulated
        long double u_prev = 0.0L;  // U_{-1}
        long double u_curr = 1.0L;  // U_0
        for (int k = 1; k <= m_; ++k) {
            long double a = coeff[static_cast<std::size_t>(k)];
            if (a != 0.0L) {
                int t = (k * j) % (2 * m_);
                long double ck = cos_tab_[static_cast<std::size_t>(t)];
                long double sk = sin_tab_[static_cast<std::size_t>(t)];
                v += a * ck;
                d1 -= a * k * sk;
                d2 -= a * k * k * ck;
                dc -= a * k * x * u_curr;
            }
            long double u_next = 2.0L * x * u_curr - u_prev;
            u_prev = u_curr;
            u_curr = u_next;
        }
        f.value[static_cast<std::size_t>(j)] = static_cast<double>(v);
        f.d1[static_cast<std::size_t>(j)] = static_cast<double>(d1);
        f.d2[static_cast<std::size_t>(j)] = static_cast<double>(d2);
        f.d1_cot[static_cast<std::size_t>(j)] = static_cast<double>(dc);
    }
    return f;
}

const CosineGrid::Ops& CosineGrid::ops() const {
    const Ops* have = ops_.load(std::memory_order_acquire);
    if (have) return *have;

    int nn = m_ + 1;
    // analysis matrix (no truncation): coeff_k = sum_j C(k,j) value_j
    Eigen::MatrixXd C(nn, nn);
    for (int k = 0; k < nn; ++k)
        for (int j = 0; j < nn; ++j) {
            long double w = ((k == 0 || k == m_) ? 1.0L : 2.0L) / m_;
            if (j == 0 || j == m_) w *= 0.5L;
            C(k, j) = static_cast<double>(w * cos_tab_[static_cast<std::size_t>((k * j) % (2 * m_))]);
        }
    // synthesis rows for the two derivative combinations
    Eigen::MatrixXd S2(nn, nn), SC(nn, nn);
    for (int j = 0; j < nn; ++j) {
        long double x = cos_tab_[static_cast<std::size_t>(j % (2 * m_))];
        S2(j, 0) = 0.0;
        SC(j, 0) = 0.0;
        long double u_prev = 0.0L, u_curr = 1.0L;  // U_{-1}, U_0
        for (int k = 1; k < nn; ++k) {
            int t = (k * j) % (2 * m_);
            S2(j, k) = static_cast<double>(-static_cast<long double>(k) * k *
                                           cos_tab_[static_cast<std::size_t>(t)]);
            SC(j, k) = static_cast<double>(-static_cast<long double>(k) * x * u_curr);
            long double u_next = 2.0L * x * u_curr - u_prev;
            u_prev = u_curr;
            u_curr = u_next;
        }
    }
    auto built = std::make_unique<Ops>();
    built->d2 = S2 * C;
    built->d1cot = SC * C;

    const Ops* expected = nullptr;
    if (ops_.compare_exchange_strong(expected, built.get(), std::memory_order_acq_rel))
        return *built.release();
    return *expected;  // concurrent builder won the race
}

const Eigen::MatrixXd& CosineGrid::d2_op() const { return ops().d2; }
const Eigen::MatrixXd& CosineGrid::d1cot_op() const { return ops().d1cot; }

} // namespace shrink
