#pragma once

// Axisymmetric convex hypersurfaces in two representations:
//
//  * AxiConvexBody      - flat ambient, support function s(theta) on the
//                         meridian angle; principal radii are s'' + s (once)
//                         and s' cot(theta) + s (n-1 times)
//  * AxiGraphHemisphere - round hemisphere ambient, radial graph r(theta)
//                         over the equatorial sphere, confined to the open
//                         upper half
//
// Both immutably derive their curvature data at construction through the
// cosine-series engine, and both refuse to exist when convexity fails,
// naming the first offending node.

#include <array>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "shrink/ambient.hpp"
#include "shrink/cosine_series.hpp"

namespace shrink::hypersurface {

// thrown when a profile's principal curvatures leave the convex cone
class ConvexityError : public std::runtime_error {
public:
    ConvexityError(int node, double theta, double value, const char* what_field);
    int node() const { return node_; }
    double theta() const { return theta_; }

private:
    int node_;
    double theta_;
};

// Legendre polynomial P_l (used for seeded perturbation modes)
double legendre_p(int l, double x);

// --------------------------------------------------------------------
// flat ambient, support representation
// --------------------------------------------------------------------
class AxiConvexBody {
public:
    // support values at the grid nodes; throws ConvexityError if a principal
    // radius is nonpositive, std::domain_error if the support itself is
    AxiConvexBody(int n, std::shared_ptr<const CosineGrid> grid, std::vector<double> support);

    static AxiConvexBody sphere(int n, int m, double radius);
    // radius * (1 + amplitude * P_mode(cos theta))
    static AxiConvexBody perturbed_sphere(int n, int m, double radius, int mode,
                                          double amplitude);

    int n() const { return n_; }
    int m() const { return grid_->m(); }
    const CosineGrid& grid() const { return *grid_; }
    std::shared_ptr<const CosineGrid> grid_ptr() const { return grid_; }

    const std::vector<double>& support() const { return s_; }
    const std::vector<double>& support_d1() const { return s1_; }
    const std::vector<double>& radius_meridian() const { return r1_; }    // s'' + s
    const std::vector<double>& radius_rotational() const { return r2_; }  // s' cot + s

    // principal curvatures at node j: (1/r1, then n-1 copies of 1/r2)
    std::vector<double> curvatures(int j) const;

    double position_pairing(int j) const { return s_[static_cast<std::size_t>(j)]; }
    double position_norm2(int j) const;                // |X|^2 = s^2 + s'^2
    std::array<double, 2> meridian_point(int j) const;  // (distance to axis, height)

    // largest principal radius over smallest, minus one; zero for a sphere
    double anisotropy() const;

private:
    int n_;
    std::shared_ptr<const CosineGrid> grid_;
    std::vector<double> s_, s1_, r1_, r2_;
};

// --------------------------------------------------------------------
// hemisphere ambient, radial graph representation
// --------------------------------------------------------------------
class AxiGraphHemisphere {
public:
    // radial values in the open interval (0, pi/2); throws std::domain_error
    // when the graph leaves the hemisphere, ConvexityError when convexity fails
    AxiGraphHemisphere(int n, std::shared_ptr<const CosineGrid> grid, std::vector<double> radial);

    static AxiGraphHemisphere slice(int n, int m, double r0);
    static AxiGraphHemisphere perturbed_slice(int n, int m, double r0, int mode,
                                              double amplitude);

    int n() const { return n_; }
    int m() const { return grid_->m(); }
    const CosineGrid& grid() const { return *grid_; }

    const std::vector<double>& radial() const { return r_; }
    const std::vector<double>& kappa_meridian() const { return k1_; }
    const std::vector<double>& kappa_rotational() const { return k2_; }

    std::vector<double> curvatures(int j) const;
    // inner product of the ambient radial field with the outward normal
    double position_pairing(int j) const { return pairing_[static_cast<std::size_t>(j)]; }

    double anisotropy() const;

private:
    int n_;
    std::shared_ptr<const CosineGrid> grid_;
    std::vector<double> r_, k1_, k2_, pairing_;
};

// --------------------------------------------------------------------
// profile files: "# <kind> n=<n>" header then "theta value" rows
// --------------------------------------------------------------------
struct LoadedProfile {
    std::string kind;  // "support-euclid" or "radial-hemisphere"
    int n = 0;
    int m = 0;
    std::vector<double> values;
};

void write_profile(const std::string& path, const AxiConvexBody& body,
                   const std::vector<std::string>& comments = {});
void write_profile(const std::string& path, const AxiGraphHemisphere& body,
                   const std::vector<std::string>& comments = {});
LoadedProfile read_profile(const std::string& path);

AxiConvexBody body_from_profile(const LoadedProfile& p);
AxiGraphHemisphere graph_from_profile(const LoadedProfile& p);

} // namespace shrink::hypersurface
