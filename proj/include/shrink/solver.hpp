#pragma once
// ====================================================================
// Self-similar-profile solver and normalized contracting flow.
//
// Flat ambient: damped Newton on the support profile for
//     f(kappa)^alpha + C = <X, nu>      (C <= 0),
// plus an explicit (Heun) integrator for the normalized flow
//     ds/dtau = -f(kappa)^alpha
// with fixed-minimum-support rescaling after every step.
//
// Hemisphere: the self-similar solutions are the equidistant slices, so
// only the 1-D slice equation (f(1,..,1) cot r)^alpha = sin r is solved;
// the full residual is exposed for evaluation.
// ====================================================================

#include <string>
#include <vector>

#include "shrink/ambient.hpp"
#include "shrink/hypersurface.hpp"
#include "shrink/symfun.hpp"

namespace shrink::solver {

struct ShrinkerProblem {
    symfun::SpeedFunction f;
    double alpha = 1.0;
    Ambient ambient = Ambient::euclid();
    double C = 0.0;          // offset of the flat-space equation, <= 0
    double tol = 1e-11;      // residual sup-norm target for Newton
    int max_iters = 50;
};

// Pointwise defect of the self-similar equation, one entry per node.
// Flat: f(kappa)^alpha + C - <X, nu>.  Hemisphere: f(kappa)^alpha minus
// the position pairing (C is not part of the hemisphere equation).
std::vector<double> residual(const hypersurface::AxiConvexBody& body,
                             const ShrinkerProblem& problem);
std::vector<double> residual(const hypersurface::AxiGraphHemisphere& graph,
                             const ShrinkerProblem& problem);

// Radius of the round solution in flat space: the unique positive root
// of (f(1,..,1)/r)^alpha = r - C, found by bisection to ~1e-13.
// With C = 0 this is f(1,..,1)^(alpha/(alpha+1)) in closed form.
double round_shrinker_radius(const symfun::SpeedFunction& f, double alpha,
                             double C = 0.0);

// Latitude of the self-similar slice: the unique root of
// (f(1,..,1) cot r)^alpha = sin r in (0, pi/2), by bisection.
double slice_radius(const symfun::SpeedFunction& f, double alpha);

struct IterRecord {
    int iter = 0;
    double residual_sup = 0.0;
    double anisotropy = 0.0;  // kappa_max/kappa_min - 1 over the body
    double scale = 0.0;       // mean support, for context in traces
};

struct NewtonReport {
    bool converged = false;
    int iterations = 0;        // accepted Newton steps
    double residual_sup = 0.0;
    double anisotropy = 0.0;
    std::vector<IterRecord> trace;  // entry 0 is the initial state
};

// Damped Newton with backtracking on the residual sup-norm (factor 1/2,
// accept on strict decrease, at most 20 halvings per step; a trial step
// that destroys convexity counts as a failed trial).  The Jacobian is
// the exact linearization of f(kappa(s))^alpha through the two principal
// radii and the dense spectral derivative operators.  Throws
// std::runtime_error on non-convergence within max_iters or when a step
// cannot be damped into acceptance.
hypersurface::AxiConvexBody solve_shrinker(const ShrinkerProblem& problem,
                                           const hypersurface::AxiConvexBody& initial,
                                           NewtonReport* report = nullptr);

struct FlowParams {
    double cfl = 0.2;                // fraction of the explicit stability limit
    int max_steps = 20000;
    double roundness_tol = 1e-3;     // stop once r_max/r_min - 1 <= tol
    double target_min_support = 1.0; // normalization: min support after rescale
    double min_scale = 1e-3;         // stop once the physical scale drops below
    double blowup_guard = 1e6;       // stop if the physical speed exceeds this
};

struct FlowRecord {
    int step = 0;
    double time = 0.0;    // accumulated physical (unnormalized) time
    double r_min = 0.0;   // principal curvature radii of the normalized body
    double r_max = 0.0;
    double roundness = 1.0;  // r_max / r_min
    double f_min = 0.0;   // physical speed range f(kappa_phys)^alpha
    double f_max = 0.0;
    double scale = 1.0;   // physical scale Lambda (body_phys = Lambda * body)
};

struct FlowResult {
    hypersurface::AxiConvexBody body;    // final normalized body
    std::vector<FlowRecord> trace;       // entry per accepted step (plus initial)
    std::string stop_reason;             // "roundness", "max_steps", "min_scale", "blowup"
    double physical_time = 0.0;
    double scale = 1.0;
};

// Normalized contracting flow.  Each step: Heun update of the support
// profile with step size cfl / (curvature-weighted stiffness estimate),
// halved on convexity loss (at most 20 times, then std::runtime_error);
// then rescale so the minimum support equals the target, folding the
// factor into the physical scale and advancing physical time by
// scale^(alpha+1) * dtau.  Round profiles are exact fixed points of the
// normalized map.
FlowResult run_flow(const ShrinkerProblem& problem,
                    const hypersurface::AxiConvexBody& initial,
                    const FlowParams& params);

}  // namespace shrink::solver
