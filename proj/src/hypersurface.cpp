#include "shrink/hypersurface.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "shrink/textio.hpp"

namespace shrink::hypersurface {

ConvexityError::ConvexityError(int node, double theta, double value, const char* what_field)
    : std::runtime_error("convexity violated at node " + std::to_string(node) + " (theta=" +
                         fmt_double(theta) + "): " + what_field + " = " + fmt_double(value)),
      node_(node),
      theta_(theta) {}

double legendre_p(int l, double x) {
    if (l == 0) return 1.0;
    double pk = x, pkm = 1.0;  // P_1, P_0
    for (int k = 1; k < l; ++k) {
        double pkp = ((2.0 * k + 1.0) * x * pk - k * pkm) / (k + 1.0);
        pkm = pk;
        pk = pkp;
    }
    return pk;
}

namespace {

void require_n(int n) {
    if (n < 2 || n > 64)
        throw std::invalid_argument("hypersurface dimension must be in [2, 64], got " +
                                    std::to_string(n));
}

std::vector<double> perturbed_profile(const CosineGrid& grid, double base, int mode,
                                      double amplitude) {
    if (mode < 1)
        throw std::invalid_argument("perturbation mode must be a positive integer");
    std::vector<double> vals(static_cast<std::size_t>(grid.nodes()));
    for (int j = 0; j < grid.nodes(); ++j)
        vals[static_cast<std::size_t>(j)] =
            base * (1.0 + amplitude * legendre_p(mode, std::cos(grid.theta()[static_cast<std::size_t>(j)])));
    return vals;
}

} // namespace

// ====================================================================
// AxiConvexBody
// ====================================================================

AxiConvexBody::AxiConvexBody(int n, std::shared_ptr<const CosineGrid> grid,
                             std::vector<double> support)
    : n_(n), grid_(std::move(grid)) {
    require_n(n);
    auto coeff = grid_->analyze(support);
    CosineGrid::Fields f = grid_->synthesize(coeff);
    s_ = std::move(f.value);
    s1_ = std::move(f.d1);
    int nn = grid_->nodes();
    r1_.resize(static_cast<std::size_t>(nn));
    r2_.resize(static_cast<std::size_t>(nn));
    for (int j = 0; j < nn; ++j) {
        std::size_t js = static_cast<std::size_t>(j);
        if (!(s_[js] > 0.0))
            throw std::domain_error("support must stay positive (origin inside); node " +
                                    std::to_string(j) + " has s = " + fmt_double(s_[js]));
        r1_[js] = f.d2[js] + s_[js];
        r2_[js] = f.d1_cot[js] + s_[js];
    }
    for (int j = 0; j < nn; ++j) {
        std::size_t js = static_cast<std::size_t>(j);
        if (!(r1_[js] > 0.0))
            throw ConvexityError(j, grid_->theta()[js], r1_[js], "meridian radius");
        if (!(r2_[js] > 0.0))
            throw ConvexityError(j, grid_->theta()[js], r2_[js], "rotational radius");
    }
}

AxiConvexBody AxiConvexBody::sphere(int n, int m, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("sphere radius must be positive");
    auto grid = std::make_shared<CosineGrid>(m);
    std::vector<double> vals(static_cast<std::size_t>(grid->nodes()), radius);
    return AxiConvexBody(n, std::move(grid), std::move(vals));
}

AxiConvexBody AxiConvexBody::perturbed_sphere(int n, int m, double radius, int mode,
                                              double amplitude) {
    if (!(radius > 0.0)) throw std::invalid_argument("sphere radius must be positive");
    auto grid = std::make_shared<CosineGrid>(m);
    auto vals = perturbed_profile(*grid, radius, mode, amplitude);
    return AxiConvexBody(n, std::move(grid), std::move(vals));
}

std::vector<double> AxiConvexBody::curvatures(int j) const {
    std::size_t js = static_cast<std::size_t>(j);
    std::vector<double> k(static_cast<std::size_t>(n_), 1.0 / r2_[js]);
    k[0] = 1.0 / r1_[js];
    return k;
}

double AxiConvexBody::position_norm2(int j) const {
    std::size_t js = static_cast<std::size_t>(j);
    return s_[js] * s_[js] + s1_[js] * s1_[js];
}

std::array<double, 2> AxiConvexBody::meridian_point(int j) const {
    std::size_t js = static_cast<std::size_t>(j);
    double th = grid_->theta()[js];
    double st = std::sin(th), ct = std::cos(th);
    return {s_[js] * st + s1_[js] * ct, s_[js] * ct - s1_[js] * st};
}

double AxiConvexBody::anisotropy() const {
    double rmin = r1_[0], rmax = r1_[0];
    for (double v : r1_) {
        rmin = std::min(rmin, v);
        rmax = std::max(rmax, v);
    }
    for (double v : r2_) {
        rmin = std::min(rmin, v);
        rmax = std::max(rmax, v);
    }
    return rmax / rmin - 1.0;
}

// ====================================================================
// AxiGraphHemisphere
// ====================================================================

AxiGraphHemisphere::AxiGraphHemisphere(int n, std::shared_ptr<const CosineGrid> grid,
                                       std::vector<double> radial)
    : n_(n), grid_(std::move(grid)) {
    require_n(n);
    const double half_pi = 1.5707963267948966;
    auto coeff = grid_->analyze(radial);
    CosineGrid::Fields f = grid_->synthesize(coeff);
    r_ = std::move(f.value);
    int nn = grid_->nodes();
    k1_.resize(static_cast<std::size_t>(nn));
    k2_.resize(static_cast<std::size_t>(nn));
    pairing_.resize(static_cast<std::size_t>(nn));
    for (int j = 0; j < nn; ++j) {
        std::size_t js = static_cast<std::size_t>(j);
        double u = r_[js];
        if (!(u > 0.0) || !(u < half_pi))
            throw std::domain_error("radial graph leaves the open hemisphere at node " +
                                    std::to_string(j) + ": r = " + fmt_double(u));
        double u1 = f.d1[js];
        double u2 = f.d2[js];
        double u1cot = f.d1_cot[js];  // pole entries already carry the u'' limit
        double lam = std::sin(u), dlam = std::cos(u);
        double g_th = u1 * u1 + lam * lam;  // meridian metric coefficient
        double v = std::sqrt(g_th) / lam;   // graph gradient factor
        k1_[js] = (-u2 + (2.0 * dlam / lam) * u1 * u1 + lam * dlam) / (v * g_th);
        k2_[js] = (lam * dlam - u1cot) / (v * lam * lam);
        pairing_[js] = lam / v;
    }
    for (int j = 0; j < nn; ++j) {
        std::size_t js = static_cast<std::size_t>(j);
        if (!(k1_[js] > 0.0))
            throw ConvexityError(j, grid_->theta()[js], k1_[js], "meridian curvature");
        if (!(k2_[js] > 0.0))
            throw ConvexityError(j, grid_->theta()[js], k2_[js], "rotational curvature");
    }
}

AxiGraphHemisphere AxiGraphHemisphere::slice(int n, int m, double r0) {
    auto grid = std::make_shared<CosineGrid>(m);
    std::vector<double> vals(static_cast<std::size_t>(grid->nodes()), r0);
    return AxiGraphHemisphere(n, std::move(grid), std::move(vals));
}

AxiGraphHemisphere AxiGraphHemisphere::perturbed_slice(int n, int m, double r0, int mode,
                                                       double amplitude) {
    auto grid = std::make_shared<CosineGrid>(m);
    auto vals = perturbed_profile(*grid, r0, mode, amplitude);
    return AxiGraphHemisphere(n, std::move(grid), std::move(vals));
}

std::vector<double> AxiGraphHemisphere::curvatures(int j) const {
    std::size_t js = static_cast<std::size_t>(j);
    std::vector<double> k(static_cast<std::size_t>(n_), k2_[js]);
    k[0] = k1_[js];
    return k;
}

double AxiGraphHemisphere::anisotropy() const {
    double kmin = k1_[0], kmax = k1_[0];
    for (double v : k1_) {
        kmin = std::min(kmin, v);
        kmax = std::max(kmax, v);
    }
    for (double v : k2_) {
        kmin = std::min(kmin, v);
        kmax = std::max(kmax, v);
    }
    return kmax / kmin - 1.0;
}

// ====================================================================
// profile files
// ====================================================================

namespace {

void write_profile_impl(const std::string& path, const char* kind, int n,
                        const CosineGrid& grid, const std::vector<double>& values,
                        const std::vector<std::string>& comments) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "# " << kind << " n=" << n << "\n";
    for (const auto& c : comments) out << "# " << c << "\n";
    out << "theta value\n";
    for (int j = 0; j < grid.nodes(); ++j)
        out << fmt_double(grid.theta()[static_cast<std::size_t>(j)]) << " "
            << fmt_double(values[static_cast<std::size_t>(j)]) << "\n";
    if (!out) throw std::runtime_error("short write to '" + path + "'");
}

} // namespace

void write_profile(const std::string& path, const AxiConvexBody& body,
                   const std::vector<std::string>& comments) {
    write_profile_impl(path, "support-euclid", body.n(), body.grid(), body.support(), comments);
}

void write_profile(const std::string& path, const AxiGraphHemisphere& body,
                   const std::vector<std::string>& comments) {
    write_profile_impl(path, "radial-hemisphere", body.n(), body.grid(), body.radial(), comments);
}

LoadedProfile read_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open profile '" + path + "'");
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("profile '" + path + "' is empty");

    LoadedProfile p;
    {
        std::istringstream hs(line);
        std::string hash, kind, ntok;
        hs >> hash >> kind >> ntok;
        if (hash != "#" || (kind != "support-euclid" && kind != "radial-hemisphere") ||
            ntok.rfind("n=", 0) != 0)
            throw std::runtime_error("profile '" + path +
                                     "' lacks a '# <kind> n=<dim>' header, got: " + line);
        p.kind = kind;
        p.n = std::stoi(ntok.substr(2));
    }

    std::vector<double> theta;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line == "theta value") continue;
        std::istringstream ls(line);
        std::string a, b;
        if (!(ls >> a >> b))
            throw std::runtime_error("malformed profile row: '" + line + "'");
        theta.push_back(parse_double(a));
        p.values.push_back(parse_double(b));
    }
    if (theta.size() < 9) throw std::runtime_error("profile has too few rows");
    p.m = static_cast<int>(theta.size()) - 1;

    // the rows must sit on the uniform nodes theta_j = j*pi/m
    CosineGrid probe(p.m);
    for (int j = 0; j <= p.m; ++j)
        if (std::abs(theta[static_cast<std::size_t>(j)] -
                     probe.theta()[static_cast<std::size_t>(j)]) > 1e-12)
            throw std::runtime_error("profile nodes are not uniform at row " + std::to_string(j));
    return p;
}

AxiConvexBody body_from_profile(const LoadedProfile& p) {
    if (p.kind != "support-euclid")
        throw std::invalid_argument("profile kind '" + p.kind + "' is not support-euclid");
    return AxiConvexBody(p.n, std::make_shared<CosineGrid>(p.m), p.values);
}

AxiGraphHemisphere graph_from_profile(const LoadedProfile& p) {
    if (p.kind != "radial-hemisphere")
        throw std::invalid_argument("profile kind '" + p.kind + "' is not radial-hemisphere");
    return AxiGraphHemisphere(p.n, std::make_shared<CosineGrid>(p.m), p.values);
}

} // namespace shrink::hypersurface
