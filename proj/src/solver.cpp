#include "shrink/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shrink::solver {

namespace {

constexpr int MAX_HALVINGS = 20;

void validate_problem(const ShrinkerProblem& p, int body_n, AmbientKind expected) {
    if (!(p.alpha >= 1.0)) throw std::invalid_argument("alpha must be >= 1");
    if (!(p.C <= 0.0)) throw std::invalid_argument("offset C must be <= 0");
    if (p.f.dim() != body_n)
        throw std::invalid_argument("speed function dimension does not match the body");
    if (p.ambient.kind != expected)
        throw std::invalid_argument(std::string("problem ambient is '") + p.ambient.name() +
                                    "' but the body lives in '" +
                                    Ambient{expected}.name() + "'");
}

double sup_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

std::vector<double> speed_field(const hypersurface::AxiConvexBody& body,
                                const symfun::SpeedFunction& f, double alpha) {
    std::vector<double> out(static_cast<std::size_t>(body.m()) + 1);
    for (int j = 0; j <= body.m(); ++j)
        out[static_cast<std::size_t>(j)] = std::pow(f.eval(body.curvatures(j)), alpha);
    return out;
}

// Largest node-wise coefficient of the linearized speed operator; the
// explicit step bound divides the spectral operator norm out of it.
double stiffness(const hypersurface::AxiConvexBody& body,
                 const symfun::SpeedFunction& f, double alpha) {
    double worst = 0.0;
    int n = body.n();
    for (int j = 0; j <= body.m(); ++j) {
        auto kap = body.curvatures(j);
        auto d = f.derivs(kap);
        double coef = alpha * std::pow(d.value, alpha - 1.0);
        double gsum = 0.0;
        for (int i = 1; i < n; ++i) gsum += d.grad[static_cast<std::size_t>(i)];
        double a1 = coef * d.grad[0] * kap[0] * kap[0];
        double a2 = coef * gsum * kap[1] * kap[1];
        worst = std::max(worst, a1 + a2);
    }
    return worst;
}

}  // namespace

std::vector<double> residual(const hypersurface::AxiConvexBody& body,
                             const ShrinkerProblem& problem) {
    validate_problem(problem, body.n(), AmbientKind::euclid);
    std::vector<double> out(static_cast<std::size_t>(body.m()) + 1);
    for (int j = 0; j <= body.m(); ++j) {
        double F = problem.f.eval(body.curvatures(j));
        out[static_cast<std::size_t>(j)] =
            std::pow(F, problem.alpha) + problem.C - body.position_pairing(j);
    }
    return out;
}

std::vector<double> residual(const hypersurface::AxiGraphHemisphere& graph,
                             const ShrinkerProblem& problem) {
    validate_problem(problem, graph.n(), AmbientKind::hemisphere);
    if (problem.C != 0.0)
        throw std::invalid_argument("hemisphere problems carry no offset term");
    std::vector<double> out(static_cast<std::size_t>(graph.m()) + 1);
    for (int j = 0; j <= graph.m(); ++j) {
        double F = problem.f.eval(graph.curvatures(j));
        out[static_cast<std::size_t>(j)] =
            std::pow(F, problem.alpha) - graph.position_pairing(j);
    }
    return out;
}

double round_shrinker_radius(const symfun::SpeedFunction& f, double alpha, double C) {
    if (!(alpha >= 1.0)) throw std::invalid_argument("alpha must be >= 1");
    if (!(C <= 0.0)) throw std::invalid_argument("offset C must be <= 0");
    double f1 = f.normalization();
    auto g = [&](double r) { return std::pow(f1 / r, alpha) - r + C; };
    double lo = 1e-8;
    double hi = std::max(1.0, f1);
    while (g(hi) > 0.0) hi *= 2.0;
    for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double slice_radius(const symfun::SpeedFunction& f, double alpha) {
    if (!(alpha >= 1.0)) throw std::invalid_argument("alpha must be >= 1");
    double f1 = f.normalization();
    auto g = [&](double r) { return std::pow(f1 / std::tan(r), alpha) - std::sin(r); };
    double lo = 1e-9, hi = 1.5707963267948966 - 1e-12;
    for (int it = 0; it < 200 && (hi - lo) > 1e-15; ++it) {
        double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

hypersurface::AxiConvexBody solve_shrinker(const ShrinkerProblem& problem,
                                           const hypersurface::AxiConvexBody& initial,
                                           NewtonReport* report) {
    validate_problem(problem, initial.n(), AmbientKind::euclid);
    auto grid = initial.grid_ptr();
    const int m = initial.m();
    const int n = initial.n();
    const Eigen::MatrixXd& D2 = grid->d2_op();
    const Eigen::MatrixXd& DC = grid->d1cot_op();

    hypersurface::AxiConvexBody body = initial;
    std::vector<double> s = initial.support();
    std::vector<double> res = residual(body, problem);
    double sup = sup_norm(res);

    NewtonReport rep;
    rep.trace.push_back({0, sup, body.anisotropy(), mean(s)});

    int iters = 0;
    while (sup > problem.tol) {
        if (iters >= problem.max_iters)
            throw std::runtime_error("no convergence after " +
                                     std::to_string(problem.max_iters) +
                                     " Newton iterations (residual " +
                                     std::to_string(sup) + ")");

        // J = d(residual)/d(support): the speed differentiated through both
        // principal radii, minus the identity from the pairing term
        Eigen::MatrixXd J(m + 1, m + 1);
        for (int j = 0; j <= m; ++j) {
            auto kap = body.curvatures(j);
            auto d = problem.f.derivs(kap);
            double coef = problem.alpha * std::pow(d.value, problem.alpha - 1.0);
            double gsum = 0.0;
            for (int i = 1; i < n; ++i) gsum += d.grad[static_cast<std::size_t>(i)];
            double a1 = coef * d.grad[0] * kap[0] * kap[0];
            double a2 = coef * gsum * kap[1] * kap[1];
            J.row(j) = -a1 * D2.row(j) - a2 * DC.row(j);
            J(j, j) += -a1 - a2 - 1.0;
        }
        Eigen::Map<const Eigen::VectorXd> rvec(res.data(), m + 1);
        Eigen::VectorXd delta = J.partialPivLu().solve(-rvec);

        double t = 1.0;
        bool accepted = false;
        for (int halv = 0; halv <= MAX_HALVINGS && !accepted; ++halv, t *= 0.5) {
            std::vector<double> trial(s);
            for (int j = 0; j <= m; ++j) trial[static_cast<std::size_t>(j)] += t * delta(j);
            try {
                hypersurface::AxiConvexBody candidate(n, grid, trial);
                std::vector<double> trial_res = residual(candidate, problem);
                double trial_sup = sup_norm(trial_res);
                if (trial_sup < sup) {
                    body = std::move(candidate);
                    s = std::move(trial);
                    res = std::move(trial_res);
                    sup = trial_sup;
                    accepted = true;
                }
            } catch (const hypersurface::ConvexityError&) {
                // trial left the convex cone; damp further
            } catch (const std::domain_error&) {
                // support turned nonpositive; damp further
            }
        }
        if (!accepted)
            throw std::runtime_error(
                "Newton line search failed: no acceptable step after 20 halvings "
                "(residual " + std::to_string(sup) + ")");
        ++iters;
        rep.trace.push_back({iters, sup, body.anisotropy(), mean(s)});
    }

    rep.converged = true;
    rep.iterations = iters;
    rep.residual_sup = sup;
    rep.anisotropy = body.anisotropy();
    if (report) *report = std::move(rep);
    return body;
}

FlowResult run_flow(const ShrinkerProblem& problem,
                    const hypersurface::AxiConvexBody& initial,
                    const FlowParams& params) {
    validate_problem(problem, initial.n(), AmbientKind::euclid);
    if (!(params.cfl > 0.0 && params.cfl < 2.0))
        throw std::invalid_argument("cfl must lie in (0, 2)");
    if (!(params.target_min_support > 0.0))
        throw std::invalid_argument("normalization target must be positive");

    auto grid = initial.grid_ptr();
    const int m = initial.m();
    const int n = initial.n();
    const double opnorm = static_cast<double>(m) * m + 2.0 * m;

    // normalize the initial profile, folding its size into the scale
    std::vector<double> s = initial.support();
    double mu0 = *std::min_element(s.begin(), s.end());
    double scale = mu0 / params.target_min_support;
    for (double& x : s) x *= params.target_min_support / mu0;
    hypersurface::AxiConvexBody body(n, grid, s);
    s = body.support();

    FlowResult result{body, {}, "max_steps", 0.0, scale};

    auto record = [&](int step) {
        FlowRecord r;
        r.step = step;
        r.time = result.physical_time;
        r.r_min = body.radius_meridian()[0];
        r.r_max = r.r_min;
        for (int j = 0; j <= m; ++j) {
            for (double v : {body.radius_meridian()[static_cast<std::size_t>(j)],
                             body.radius_rotational()[static_cast<std::size_t>(j)]}) {
                r.r_min = std::min(r.r_min, v);
                r.r_max = std::max(r.r_max, v);
            }
        }
        r.roundness = r.r_max / r.r_min;
        auto Fa = speed_field(body, problem.f, problem.alpha);
        double lo = Fa[0], hi = Fa[0];
        for (double v : Fa) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        double phys = std::pow(result.scale, -problem.alpha);
        r.f_min = lo * phys;
        r.f_max = hi * phys;
        r.scale = result.scale;
        result.trace.push_back(r);
        return r;
    };
    FlowRecord last = record(0);

    for (int step = 1; step <= params.max_steps; ++step) {
        double dtau = params.cfl / (stiffness(body, problem.f, problem.alpha) * opnorm);
        std::vector<double> k1 = speed_field(body, problem.f, problem.alpha);

        double used_dtau = 0.0;
        bool accepted = false;
        for (int halv = 0; halv <= MAX_HALVINGS && !accepted; ++halv, dtau *= 0.5) {
            try {
                std::vector<double> s1(s);
                for (int j = 0; j <= m; ++j)
                    s1[static_cast<std::size_t>(j)] -= dtau * k1[static_cast<std::size_t>(j)];
                hypersurface::AxiConvexBody mid(n, grid, s1);
                std::vector<double> k2 = speed_field(mid, problem.f, problem.alpha);
                std::vector<double> s2(s);
                for (int j = 0; j <= m; ++j)
                    s2[static_cast<std::size_t>(j)] -=
                        0.5 * dtau *
                        (k1[static_cast<std::size_t>(j)] + k2[static_cast<std::size_t>(j)]);
                hypersurface::AxiConvexBody next(n, grid, s2);
                body = std::move(next);
                s = std::move(s2);
                used_dtau = dtau;
                accepted = true;
            } catch (const hypersurface::ConvexityError&) {
            } catch (const std::domain_error&) {
            }
        }
        if (!accepted)
            throw std::runtime_error("flow step rejected after 20 halvings at step " +
                                     std::to_string(step));

        // advance physical time with the scale held during the step, then
        // rescale the minimum support back onto the target
        result.physical_time += std::pow(result.scale, problem.alpha + 1.0) * used_dtau;
        double mu = *std::min_element(s.begin(), s.end());
        result.scale *= mu / params.target_min_support;
        double ratio = params.target_min_support / mu;
        for (double& x : s) x *= ratio;
        body = hypersurface::AxiConvexBody(n, grid, s);
        s = body.support();

        last = record(step);
        if (last.roundness - 1.0 <= params.roundness_tol) {
            result.stop_reason = "roundness";
            break;
        }
        if (result.scale <= params.min_scale) {
            result.stop_reason = "min_scale";
            break;
        }
        if (last.f_max >= params.blowup_guard) {
            result.stop_reason = "blowup";
            break;
        }
    }

    result.body = body;
    return result;
}

}  // namespace shrink::solver
