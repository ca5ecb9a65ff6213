// Tests for the self-similar-solution solver: closed-form round radii,
// residual evaluation on both ambient geometries, the damped Newton solve,
// and the normalized shrinking flow.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "shrink/rng.hpp"
#include "shrink/solver.hpp"

using shrink::Ambient;
using shrink::CosineGrid;
using shrink::Rng;
using shrink::hypersurface::AxiConvexBody;
using shrink::hypersurface::AxiGraphHemisphere;
using shrink::symfun::SpeedFunction;
using namespace shrink::solver;

namespace {

// ============================================================================
// tolerances
// ============================================================================

constexpr double RADIUS_TOL = 1e-12;     // bisection of the scalar radius equations
constexpr double SCALING_TOL = 1e-10;    // covariance under rescaled speeds
constexpr double RESIDUAL_TOL = 1e-12;   // residual of exact round solutions
constexpr double NEWTON_DEV_TOL = 1e-8;  // sup deviation of a converged solve
constexpr double GRID_INDEP_TOL = 1e-9;  // radius agreement across grid sizes
constexpr double JACOBIAN_FD_TOL = 1e-6; // Newton matrix vs central differences
constexpr double HOMOTHETIC_TOL = 1e-6;  // flow scale vs the closed shrinking law

const double PI = std::acos(-1.0);

double sup_abs(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

ShrinkerProblem euclid_problem(SpeedFunction f, double alpha, double C = 0.0) {
    return ShrinkerProblem{std::move(f), alpha, Ambient::euclid(), C, 1e-11, 50};
}

ShrinkerProblem hemisphere_problem(SpeedFunction f, double alpha) {
    return ShrinkerProblem{std::move(f), alpha, Ambient::hemisphere(), 0.0, 1e-11, 50};
}

}  // namespace

// ============================================================================
// closed-form radii
// ============================================================================

TEST_CASE("round shrinker radius solves its defining equation") {
    auto f = SpeedFunction::parse("ek_root:2", 3);
    CHECK(round_shrinker_radius(f, 2.0) == doctest::Approx(1.0).epsilon(RADIUS_TOL));

    // with zero offset the root is explicit: f(1,..,1)^(alpha/(alpha+1))
    for (const char* spec : {"quotient:2,1", "power_mean:-1", "ek_root:3"}) {
        auto g = SpeedFunction::parse(spec, 3);
        for (double alpha : {1.0, 1.5, 3.0}) {
            double expect = std::pow(g.normalization(), alpha / (alpha + 1.0));
            double got = round_shrinker_radius(g, alpha);
            CHECK(std::abs(got - expect) <= RADIUS_TOL * expect);
        }
    }

    // nonzero offset: verify the root against the equation itself
    double r = round_shrinker_radius(f, 2.0, -0.5);
    CHECK(std::abs(std::pow(1.0 / r, 2.0) - r - 0.5) <= 1e-13);
    CHECK(r < 1.0);  // a negative offset shrinks the root

    CHECK_THROWS_AS(round_shrinker_radius(f, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(round_shrinker_radius(f, 2.0, 0.1), std::invalid_argument);
}

TEST_CASE("round radius is covariant under rescaling the speed") {
    // replacing f by c*f multiplies the zero-offset radius by c^(alpha/(alpha+1))
    auto f = SpeedFunction::parse("quotient:2,1", 3);
    for (double alpha : {1.5, 2.0, 3.0}) {
        double base = round_shrinker_radius(f, alpha);
        for (double c : {0.5, 2.0, 5.0}) {
            auto cf = SpeedFunction::convex_combo({c}, {f});
            double got = round_shrinker_radius(cf, alpha);
            double expect = std::pow(c, alpha / (alpha + 1.0)) * base;
            CHECK(std::abs(got - expect) <= SCALING_TOL * expect);
        }
    }
}

TEST_CASE("slice radius fixtures and monotone limit") {
    auto f = SpeedFunction::parse("ek_root:1", 3);

    // alpha = 1, f(1,1,1) = 1: cot r = sin r, so cos r is the golden ratio root
    double r1 = slice_radius(f, 1.0);
    CHECK(std::abs(r1 - std::acos((std::sqrt(5.0) - 1.0) / 2.0)) <= 1e-10);
    CHECK(r1 == doctest::Approx(0.904556894302).epsilon(1e-10));

    // increasing alpha pulls the root monotonically toward pi/4
    double prev = r1;
    for (double alpha : {2.0, 4.0, 8.0, 32.0, 128.0}) {
        double r = slice_radius(f, alpha);
        CHECK(r < prev);
        CHECK(r > PI / 4.0);
        prev = r;
    }
    CHECK(std::abs(slice_radius(f, 128.0) - PI / 4.0) < 2e-3);

    // normalization 2 (sum of two curvatures): check the defining equation
    auto g = SpeedFunction::parse("power_mean:1", 2);
    REQUIRE(g.normalization() == doctest::Approx(2.0));
    for (double alpha : {1.0, 2.0, 4.0, 8.0}) {
        double r = slice_radius(g, alpha);
        double eq = std::pow(2.0 / std::tan(r), alpha) - std::sin(r);
        CHECK(std::abs(eq) <= 1e-12);
    }

    CHECK_THROWS_AS(slice_radius(f, 0.25), std::invalid_argument);
}

// ============================================================================
// residual evaluation
// ============================================================================

TEST_CASE("round spheres make the euclidean residual vanish") {
    auto f = SpeedFunction::parse("quotient:2,1", 3);
    auto p = euclid_problem(f, 2.0);
    double rstar = round_shrinker_radius(f, 2.0);

    auto body = AxiConvexBody::sphere(3, 256, rstar);
    CHECK(sup_abs(residual(body, p)) <= RESIDUAL_TOL);

    // off the solution the residual has a definite sign on a round sphere
    auto big = AxiConvexBody::sphere(3, 64, 2.0 * rstar);
    for (double x : residual(big, p)) CHECK(x < 0.0);
    auto small = AxiConvexBody::sphere(3, 64, 0.5 * rstar);
    for (double x : residual(small, p)) CHECK(x > 0.0);

    // negative offset shifts which sphere solves the equation
    auto pc = euclid_problem(f, 2.0, -0.5);
    auto bodyc = AxiConvexBody::sphere(3, 128, round_shrinker_radius(f, 2.0, -0.5));
    CHECK(sup_abs(residual(bodyc, pc)) <= RESIDUAL_TOL);
}

TEST_CASE("slices make the hemisphere residual vanish") {
    for (const char* spec : {"ek_root:1", "ek_root:2"}) {
        auto f = SpeedFunction::parse(spec, 3);
        for (double alpha : {1.0, 2.0}) {
            auto p = hemisphere_problem(f, alpha);
            auto slice = AxiGraphHemisphere::slice(3, 64, slice_radius(f, alpha));
            CHECK(sup_abs(residual(slice, p)) <= RESIDUAL_TOL);
        }
    }

    // a perturbed slice is not a solution
    auto f = SpeedFunction::parse("ek_root:1", 3);
    auto p = hemisphere_problem(f, 1.0);
    auto bent = AxiGraphHemisphere::perturbed_slice(3, 64, slice_radius(f, 1.0), 2, 0.05);
    CHECK(sup_abs(residual(bent, p)) > 1e-3);
}

TEST_CASE("residual rejects mismatched problems") {
    auto f = SpeedFunction::parse("ek_root:2", 3);
    auto body = AxiConvexBody::sphere(3, 32, 1.0);
    auto slice = AxiGraphHemisphere::slice(3, 32, 0.9);

    CHECK_THROWS_AS(residual(body, hemisphere_problem(f, 2.0)), std::invalid_argument);
    CHECK_THROWS_AS(residual(slice, euclid_problem(f, 2.0)), std::invalid_argument);
    CHECK_THROWS_AS(residual(body, euclid_problem(f, 0.5)), std::invalid_argument);
    CHECK_THROWS_AS(residual(body, euclid_problem(f, 2.0, 0.25)), std::invalid_argument);
    auto f2 = SpeedFunction::parse("ek_root:2", 4);
    CHECK_THROWS_AS(residual(body, euclid_problem(f2, 2.0)), std::invalid_argument);
    // the hemisphere equation carries no offset term
    auto ph = hemisphere_problem(f, 2.0);
    ph.C = -0.5;
    CHECK_THROWS_AS(residual(slice, ph), std::invalid_argument);
}

// ============================================================================
// Newton solve
// ============================================================================

TEST_CASE("newton linearization matches central differences") {
    // assemble the residual derivative from the public pieces and compare
    // against finite differences of the residual itself
    auto f = SpeedFunction::parse("quotient:2,1", 3);
    auto p = euclid_problem(f, 2.0);
    auto body = AxiConvexBody::perturbed_sphere(3, 32, 1.0, 3, 0.05);
    auto grid = body.grid_ptr();
    const int m = body.m();
    const int n = body.n();

    Eigen::MatrixXd J(m + 1, m + 1);
    for (int j = 0; j <= m; ++j) {
        auto kap = body.curvatures(j);
        auto d = f.derivs(kap);
        double coef = p.alpha * std::pow(d.value, p.alpha - 1.0);
        double gsum = 0.0;
        for (int i = 1; i < n; ++i) gsum += d.grad[static_cast<std::size_t>(i)];
        double a1 = coef * d.grad[0] * kap[0] * kap[0];
        double a2 = coef * gsum * kap[1] * kap[1];
        J.row(j) = -a1 * grid->d2_op().row(j) - a2 * grid->d1cot_op().row(j);
        J(j, j) += -a1 - a2 - 1.0;
    }

    Rng rng(404);
    const double h = 1e-6;
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd v(m + 1);
        for (int j = 0; j <= m; ++j) v(j) = rng.normal();
        v /= v.norm();

        std::vector<double> plus = body.support(), minus = body.support();
        for (int j = 0; j <= m; ++j) {
            plus[static_cast<std::size_t>(j)] += h * v(j);
            minus[static_cast<std::size_t>(j)] -= h * v(j);
        }
        auto rp = residual(AxiConvexBody(n, grid, plus), p);
        auto rm = residual(AxiConvexBody(n, grid, minus), p);

        Eigen::VectorXd jv = J * v;
        double err = 0.0;
        for (int j = 0; j <= m; ++j)
            err = std::max(err, std::abs((rp[static_cast<std::size_t>(j)] -
                                          rm[static_cast<std::size_t>(j)]) /
                                             (2.0 * h) -
                                         jv(j)));
        CHECK(err <= JACOBIAN_FD_TOL * std::max(1.0, jv.lpNorm<Eigen::Infinity>()));
    }
}

TEST_CASE("newton recovers the round shrinker from a perturbed start") {
    auto f = SpeedFunction::parse("quotient:2,1", 3);
    auto p = euclid_problem(f, 2.0);
    double rstar = round_shrinker_radius(f, 2.0);

    auto start = AxiConvexBody::perturbed_sphere(3, 64, rstar, 2, 0.2);
    NewtonReport rep;
    auto sol = solve_shrinker(p, start, &rep);

    CHECK(rep.converged);
    CHECK(rep.iterations >= 1);
    CHECK(rep.iterations <= 12);
    CHECK(rep.residual_sup <= p.tol);
    double dev = 0.0;
    for (double s : sol.support()) dev = std::max(dev, std::abs(s - rstar));
    CHECK(dev <= NEWTON_DEV_TOL);
    CHECK(sol.anisotropy() <= NEWTON_DEV_TOL);

    // the trace starts at the initial residual and decreases strictly
    REQUIRE(rep.trace.size() == static_cast<std::size_t>(rep.iterations) + 1);
    CHECK(rep.trace.front().iter == 0);
    for (std::size_t i = 1; i < rep.trace.size(); ++i)
        CHECK(rep.trace[i].residual_sup < rep.trace[i - 1].residual_sup);
}

TEST_CASE("a round solution converges in zero iterations") {
    auto f = SpeedFunction::parse("ek_root:2", 3);
    auto p = euclid_problem(f, 2.0);
    NewtonReport rep;
    auto sol = solve_shrinker(p, AxiConvexBody::sphere(3, 64, 1.0), &rep);
    CHECK(rep.converged);
    CHECK(rep.iterations == 0);
    CHECK(rep.residual_sup <= p.tol);
    CHECK(sup_abs(residual(sol, p)) <= p.tol);
}

TEST_CASE("newton handles alpha one and an inverse-concave mean") {
    auto f = SpeedFunction::parse("power_mean:-1", 3);
    auto p = euclid_problem(f, 1.0);
    double rstar = round_shrinker_radius(f, 1.0);

    auto start = AxiConvexBody::perturbed_sphere(3, 64, rstar, 3, 0.05 * rstar);
    auto sol = solve_shrinker(p, start);
    double dev = 0.0;
    for (double s : sol.support()) dev = std::max(dev, std::abs(s - rstar));
    CHECK(dev <= NEWTON_DEV_TOL);
}

TEST_CASE("converged radius is independent of the grid size") {
    auto f = SpeedFunction::parse("ek_root:2", 3);
    auto p = euclid_problem(f, 1.5);
    double rstar = round_shrinker_radius(f, 1.5);

    std::vector<double> radii;
    for (int m : {128, 512}) {
        auto sol = solve_shrinker(p, AxiConvexBody::perturbed_sphere(3, m, rstar, 2, 0.15));
        radii.push_back(mean_of(sol.support()));
    }
    CHECK(std::abs(radii[0] - radii[1]) <= GRID_INDEP_TOL);
}

TEST_CASE("newton is deterministic") {
    auto f = SpeedFunction::parse("quotient:2,1", 3);
    auto p = euclid_problem(f, 3.0);
    auto start = AxiConvexBody::perturbed_sphere(3, 64, 1.0, 4, 0.05);

    NewtonReport r1, r2;
    auto a = solve_shrinker(p, start, &r1);
    auto b = solve_shrinker(p, start, &r2);
    REQUIRE(a.support().size() == b.support().size());
    for (std::size_t j = 0; j < a.support().size(); ++j)
        CHECK(a.support()[j] == b.support()[j]);  // bit-exact reruns
    REQUIRE(r1.trace.size() == r2.trace.size());
    for (std::size_t i = 0; i < r1.trace.size(); ++i)
        CHECK(r1.trace[i].residual_sup == r2.trace[i].residual_sup);
}

TEST_CASE("newton reports failure instead of looping") {
    auto f = SpeedFunction::parse("quotient:2,1", 3);
    auto p = euclid_problem(f, 2.0);
    p.max_iters = 2;  // the perturbed start needs ~6 iterations
    auto start = AxiConvexBody::perturbed_sphere(3, 64, 1.0, 2, 0.2);
    CHECK_THROWS_AS(solve_shrinker(p, start), std::runtime_error);
}

// ============================================================================
// normalized flow
// ============================================================================

TEST_CASE("flow on a round sphere follows the closed shrinking law") {
    // physical radius R(t) = (1 - 3 t)^(1/3) for alpha = 2, unit speed at 1
    auto f = SpeedFunction::parse("ek_root:2", 3);
    auto p = euclid_problem(f, 2.0);

    FlowParams fp;
    fp.cfl = 0.5;
    fp.max_steps = 100000;
    fp.roundness_tol = -1.0;  // disabled: a sphere is round from the start
    fp.min_scale = 0.7;
    auto out = run_flow(p, AxiConvexBody::sphere(3, 32, 1.0), fp);

    CHECK(out.stop_reason == "min_scale");
    CHECK(out.scale <= 0.7);
    CHECK(out.scale > 0.69);

    double worst = 0.0;
    for (const auto& rec : out.trace) {
        double law = std::pow(1.0 - 3.0 * rec.time, 1.0 / 3.0);
        worst = std::max(worst, std::abs(rec.scale - law) / law);
        CHECK(rec.roundness == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(worst <= HOMOTHETIC_TOL);

    // time advances strictly and stays below the extinction time 1/3
    for (std::size_t i = 1; i < out.trace.size(); ++i)
        CHECK(out.trace[i].time > out.trace[i - 1].time);
    CHECK(out.physical_time < 1.0 / 3.0);
}

TEST_CASE("flow rounds out a perturbed sphere") {
    auto f = SpeedFunction::parse("quotient:2,1", 3);
    auto p = euclid_problem(f, 2.0);

    FlowParams fp;
    fp.cfl = 0.8;
    fp.max_steps = 100000;
    fp.roundness_tol = 1e-3;
    fp.min_scale = 1e-4;
    auto out = run_flow(p, AxiConvexBody::perturbed_sphere(3, 32, 1.0, 2, 0.3), fp);

    CHECK(out.stop_reason == "roundness");
    CHECK(out.trace.front().roundness > 1.5);
    CHECK(out.trace.back().roundness <= 1.0 + 1e-3);

    // the normalization keeps the minimum support pinned while scale decays
    double smin = *std::min_element(out.body.support().begin(), out.body.support().end());
    CHECK(smin == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& rec : out.trace) {
        CHECK(rec.r_min > 0.0);
        CHECK(rec.r_max >= rec.r_min);
        CHECK(rec.f_min > 0.0);
        CHECK(rec.f_max >= rec.f_min);
    }
    CHECK(out.trace.back().scale < out.trace.front().scale);
}

TEST_CASE("flow stop reasons are ordered and reported") {
    auto f = SpeedFunction::parse("ek_root:2", 3);
    auto p = euclid_problem(f, 2.0);
    auto sphere = AxiConvexBody::sphere(3, 32, 1.0);

    FlowParams fp;
    fp.roundness_tol = -1.0;
    fp.max_steps = 5;
    auto capped = run_flow(p, sphere, fp);
    CHECK(capped.stop_reason == "max_steps");
    CHECK(capped.trace.size() == 6);  // initial record plus five steps

    FlowParams fg;
    fg.roundness_tol = -1.0;
    fg.blowup_guard = 0.9;  // unit sphere moves at speed 1 >= the guard
    auto blown = run_flow(p, sphere, fg);
    CHECK(blown.stop_reason == "blowup");

    FlowParams fr;  // defaults: a round profile stops immediately on roundness
    auto round = run_flow(p, sphere, fr);
    CHECK(round.stop_reason == "roundness");
    CHECK(round.trace.size() == 2);
}

TEST_CASE("flow validates its parameters") {
    auto f = SpeedFunction::parse("ek_root:2", 3);
    auto p = euclid_problem(f, 2.0);
    auto sphere = AxiConvexBody::sphere(3, 32, 1.0);

    FlowParams bad;
    bad.cfl = 0.0;
    CHECK_THROWS_AS(run_flow(p, sphere, bad), std::invalid_argument);
    bad.cfl = 2.5;
    CHECK_THROWS_AS(run_flow(p, sphere, bad), std::invalid_argument);
    FlowParams bad2;
    bad2.target_min_support = 0.0;
    CHECK_THROWS_AS(run_flow(p, sphere, bad2), std::invalid_argument);
}
