#pragma once
// ====================================================================
// Pointwise diagnostic quantities on discrete convex hypersurfaces:
// the inverse-curvature mean G, the gap fields Z and W, the tensor
// normalization beta*, and the scalar margin L1 whose sign certifies
// the maximum-principle step for inverse-concave speeds.
// ====================================================================

#include <span>
#include <string>
#include <vector>

#include "shrink/ambient.hpp"
#include "shrink/hypersurface.hpp"
#include "shrink/symfun.hpp"

namespace shrink::quantities {

// G(kappa) = (sum kappa_i^-2) / (sum kappa_i^-1): the squared-norm over
// trace ratio of the inverse curvature diagonal.  Convex in the inverse
// curvatures; equals 1 at isotropic points.
double G_value(std::span<const double> kappa);

// Per-node scalar field together with the context it was computed in.
struct QuantityField {
    std::string name;      // "Z", "W", ...
    std::string fn_spec;   // speed function used
    double alpha = 1.0;
    std::string ambient;   // "euclid" or "hemisphere"
    std::vector<double> values;  // one entry per grid node, all finite
};

// Z = F^alpha * G - ((alpha-1)/alpha) * Phi, with Phi the ambient
// potential evaluated at the node (|X|^2/2 in flat space, 1 - cos r on
// the hemisphere).  Constant on round spheres and slices.
QuantityField Z_field(const hypersurface::AxiConvexBody& body,
                      const symfun::SpeedFunction& f, double alpha);
QuantityField Z_field(const hypersurface::AxiGraphHemisphere& graph,
                      const symfun::SpeedFunction& f, double alpha);

// W = F^alpha / kappa_min - ((alpha-1)/alpha) * Phi.  Dominates Z
// pointwise because G never exceeds the largest inverse curvature.
QuantityField W_field(const hypersurface::AxiConvexBody& body,
                      const symfun::SpeedFunction& f, double alpha);
QuantityField W_field(const hypersurface::AxiGraphHemisphere& graph,
                      const symfun::SpeedFunction& f, double alpha);

// The scalar whose nonnegativity drives the pinching argument:
//   L1 = lambda'(r) (alpha-1) F^(alpha-1) (F G - sum_i df_i)
//      + (alpha-1) F^(2 alpha) (1 - sum_i dG_i)
//      + eps alpha F^(2 alpha - 1) (F sum_j dG_j mu_j^2 - G sum_i df_i)
// where mu = 1/kappa, dG_i is the derivative of G in the i-th inverse
// curvature, and eps/lambda' come from the ambient (0/1 flat, +1/cos r
// hemisphere).  Requires alpha >= 1; the negatively curved ambient is
// rejected because the sign argument needs eps >= 0.
double L1_margin(std::span<const double> kappa, const symfun::SpeedFunction& f,
                 double alpha, const Ambient& ambient, double r);

// The algebraic heart of L1's first bracket, exposed both ways so the
// rearrangement can be checked: directly as F*G - sum_i df_i, and as
// the manifestly sign-definite pairwise sum
//   (1/tr b) sum_{i>j} kappa_i^-2 kappa_j^-2
//            (df_i kappa_i^2 - df_j kappa_j^2)(kappa_i - kappa_j).
double fg_minus_sumf(std::span<const double> kappa, const symfun::SpeedFunction& f);
double fg_minus_sumf_pairwise(std::span<const double> kappa,
                              const symfun::SpeedFunction& f);

// Largest value of F^alpha / kappa_(direction) - ((alpha-1)/alpha) Phi
// over all nodes and principal directions: the constant beta* that
// pins the comparison tensor at zero from above.  Ties resolve to the
// lowest node index, then the lowest direction index.
struct TNormalization {
    double beta_star = 0.0;
    int node = 0;
    int direction = 0;  // 0 = meridian, 1..n-1 = rotational copies
};
TNormalization T_normalization(const hypersurface::AxiConvexBody& body,
                               const symfun::SpeedFunction& f, double alpha);
TNormalization T_normalization(const hypersurface::AxiGraphHemisphere& graph,
                               const symfun::SpeedFunction& f, double alpha);

// Margin of the scale-free inequality (f(kappa)/f(1,...,1)) * G(kappa) >= 1
// satisfied by inverse-concave speeds; zero exactly at isotropic points.
double normalized_Z_inequality(std::span<const double> kappa,
                               const symfun::SpeedFunction& f);

// CSV dump: one row per node with columns
//   theta, kappa_1..kappa_n, F, Z, W, Tmax
// where Tmax = W - beta* (largest tensor eigenvalue, <= 0 by
// construction, = 0 at the attaining node).  The header records the
// speed function, alpha, ambient, and grid size; extra comment lines
// (e.g. the resolved run configuration) are emitted verbatim after it.
// The footer restates beta* against the W maximum.
void write_quantities_csv(const std::string& path,
                          const hypersurface::AxiConvexBody& body,
                          const symfun::SpeedFunction& f, double alpha,
                          const std::vector<std::string>& extra_comments = {});
void write_quantities_csv(const std::string& path,
                          const hypersurface::AxiGraphHemisphere& graph,
                          const symfun::SpeedFunction& f, double alpha,
                          const std::vector<std::string>& extra_comments = {});

}  // namespace shrink::quantities
