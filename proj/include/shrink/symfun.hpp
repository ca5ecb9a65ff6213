#pragma once

// Symmetric curvature functions f(kappa_1, ..., kappa_n) on the positive cone,
// their first/second derivatives, the dual transform f*(k) = 1/f(1/k), and
// the pointwise inequality margins the rest of the project is built on.
//
// Catalog: roots of elementary symmetric means, their quotients, power means,
// positive linear combinations, weighted geometric means, and duals.  Every
// catalog entry is homogeneous of degree one, positive and strictly monotone
// on the cone; the remaining structural properties (concavity, inverse
// concavity, log-convexity along exponential rays) vary per entry and are
// carried as metadata so checkers know which margin directions to assert.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace shrink::symfun {

namespace detail {
struct FnImpl;
}

// value + gradient + Hessian of f at a cone point
struct DerivBundle {
    int n = 0;
    double value = 0.0;
    std::vector<double> grad;  // size n
    std::vector<double> hess;  // size n*n, row-major, symmetric

    double h(int i, int j) const { return hess[static_cast<std::size_t>(i) * n + j]; }
};

// structural metadata; "established" flags, never inferred at runtime
struct Traits {
    bool concave = false;          // f concave on the positive cone
    bool inverse_concave = false;  // dual transform is concave
    bool log_convex_exp = false;   // x -> log f(e^{x_1},...,e^{x_n}) convex
};

class SpeedFunction {
public:
    // --- catalog constructors -------------------------------------------
    static SpeedFunction elem_mean_root(int n, int k);            // (E_k)^(1/k)
    static SpeedFunction quotient(int n, int k, int l);           // (E_k/E_l)^(1/(k-l))
    static SpeedFunction power_mean(int n, double r);             // (sum kappa_i^r)^(1/r)
    static SpeedFunction convex_combo(std::vector<double> w, std::vector<SpeedFunction> parts);
    static SpeedFunction geo_mean(std::vector<double> w, std::vector<SpeedFunction> parts);
    static SpeedFunction dual_of(SpeedFunction g);

    // parse the CLI spec grammar, e.g. "quotient:2,1", "dual:power_mean:0.5",
    // "combo:0.7*ek_root:2+0.3*power_mean:1"; parentheses group nested parts
    static SpeedFunction parse(const std::string& spec, int n);

    int dim() const;
    double normalization() const;  // f(1,...,1)
    Traits traits() const;
    std::string spec_string() const;  // canonical spec, parse round-trips

    double eval(std::span<const double> kappa) const;
    DerivBundle derivs(std::span<const double> kappa) const;
    SpeedFunction dual() const { return dual_of(*this); }

private:
    explicit SpeedFunction(std::shared_ptr<const detail::FnImpl> impl)
        : impl_(std::move(impl)) {}
    std::shared_ptr<const detail::FnImpl> impl_;
};

// --- sampled admissibility report ---------------------------------------
// positivity, strict monotonicity, degree-one homogeneity and the Euler
// relation sum_i kappa_i df_i = f, over seeded cone samples
struct AdmissibilityReport {
    int samples = 0;
    double min_value = 0.0;            // min f over samples (want > 0)
    double min_grad_entry = 0.0;       // min df_i over samples (want > 0)
    double max_homogeneity_defect = 0.0;  // max |f(ck) - c f(k)| / f(ck)
    double max_euler_defect = 0.0;        // max |sum k_i df_i - f| / f

    bool pass(double tol = 1e-10) const {
        return min_value > 0.0 && min_grad_entry > 0.0 &&
               max_homogeneity_defect <= tol && max_euler_defect <= tol;
    }
};

AdmissibilityReport check_admissible(const SpeedFunction& f, int samples, std::uint64_t seed);

// --- pointwise inequality margins (>= 0 means the inequality holds) ------

// quadratic form of log f composed with exp, tested along direction y:
//   sum_i (df_i / (f kappa_i)) y_i^2 + sum_ij (d2f_ij/f - df_i df_j / f^2) y_i y_j
double log_convexity_margin(const SpeedFunction& f, std::span<const double> kappa,
                            std::span<const double> y);

// inverse-concavity quadratic form along y:
//   sum_ij d2f_ij y_i y_j + 2 sum_i (df_i/kappa_i) y_i^2 - (2/f) (sum_i df_i y_i)^2
double inverse_concavity_margin(const SpeedFunction& f, std::span<const double> kappa,
                                std::span<const double> y);

// pairwise margins over index pairs k != l (minima reported):
//   mixed:    (df_k - df_l)/(kappa_k - kappa_l) + df_k/kappa_l + df_l/kappa_k
//   weighted: (df_k kappa_k^2 - df_l kappa_l^2)(kappa_k - kappa_l)
// the divided difference switches to the symmetrized Hessian limit
//   (d2f_kk + d2f_ll)/2 - d2f_kl  when |kappa_k - kappa_l| is below
//   1e-7 * max|kappa|
struct PairMargins {
    double mixed = 0.0;
    double weighted = 0.0;
};
PairMargins pairwise_margins(const SpeedFunction& f, std::span<const double> kappa);

// sum_i df_i kappa_i^2 - f^2 / f(1,...,1)
double speed_weighted_lower_margin(const SpeedFunction& f, std::span<const double> kappa);

// concavity bounds: { sum_i df_i - f(1,..,1),  (f(1,..,1)/n) sum kappa_i - f }
std::pair<double, double> concave_bounds_margins(const SpeedFunction& f,
                                                 std::span<const double> kappa);

// min over pairs of (df_k kappa_k - df_l kappa_l)(kappa_k - kappa_l)
double weight_monotone_margin(const SpeedFunction& f, std::span<const double> kappa);

} // namespace shrink::symfun
