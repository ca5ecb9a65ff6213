#pragma once

// Rotationally symmetric ambient spaces written as warped products over a
// radial coordinate: flat space, the round upper hemisphere, and hyperbolic
// space.  Each carries its warping factor lambda and the radial potential
// whose derivative is lambda.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace shrink {

enum class AmbientKind { euclid, hemisphere, hyperbolic };

struct Ambient {
    AmbientKind kind = AmbientKind::euclid;

    static Ambient euclid() { return {AmbientKind::euclid}; }
    static Ambient hemisphere() { return {AmbientKind::hemisphere}; }
    static Ambient hyperbolic() { return {AmbientKind::hyperbolic}; }

    static Ambient from_name(const std::string& name) {
        if (name == "euclid") return euclid();
        if (name == "hemisphere") return hemisphere();
        if (name == "hyperbolic") return hyperbolic();
        throw std::invalid_argument("unknown ambient '" + name +
                                    "' (expected euclid, hemisphere or hyperbolic)");
    }

    const char* name() const {
        switch (kind) {
            case AmbientKind::euclid: return "euclid";
            case AmbientKind::hemisphere: return "hemisphere";
            default: return "hyperbolic";
        }
    }

    double lambda(double r) const {
        switch (kind) {
            case AmbientKind::euclid: return r;
            case AmbientKind::hemisphere: return std::sin(r);
            default: return std::sinh(r);
        }
    }

    double dlambda(double r) const {
        switch (kind) {
            case AmbientKind::euclid: return 1.0;
            case AmbientKind::hemisphere: return std::cos(r);
            default: return std::cosh(r);
        }
    }

    // potential with d(potential)/dr = lambda and potential(0) = 0
    double potential(double r) const {
        switch (kind) {
            case AmbientKind::euclid: return 0.5 * r * r;
            case AmbientKind::hemisphere: return 1.0 - std::cos(r);
            default: return std::cosh(r) - 1.0;
        }
    }

    // sectional curvature sign: lambda'' = -eps * lambda
    double eps() const {
        switch (kind) {
            case AmbientKind::euclid: return 0.0;
            case AmbientKind::hemisphere: return 1.0;
            default: return -1.0;
        }
    }

    // largest admissible radial coordinate
    double r_max() const {
        return kind == AmbientKind::hemisphere ? 1.5707963267948966
                                               : std::numeric_limits<double>::infinity();
    }
};

} // namespace shrink
