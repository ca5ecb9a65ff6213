#include "shrink/quantities.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <stdexcept>

#include "shrink/textio.hpp"

namespace shrink::quantities {

namespace {

void require_cone(std::span<const double> kappa) {
    if (kappa.empty()) throw std::invalid_argument("curvature vector is empty");
    for (double k : kappa)
        if (!std::isfinite(k) || k <= 0.0)
            throw std::domain_error("curvature outside the positive cone");
}

// Uniform per-node access over the two hypersurface realizations.
struct NodeView {
    int n = 0;
    int m = 0;
    const std::vector<double>* theta = nullptr;
    std::function<std::vector<double>(int)> kappa;
    std::function<double(int)> phi;  // ambient potential at the node
    std::string ambient;
};

NodeView make_view(const hypersurface::AxiConvexBody& body) {
    NodeView v;
    v.n = body.n();
    v.m = body.m();
    v.theta = &body.grid().theta();
    v.kappa = [&body](int j) { return body.curvatures(j); };
    v.phi = [&body](int j) { return 0.5 * body.position_norm2(j); };
    v.ambient = "euclid";
    return v;
}

NodeView make_view(const hypersurface::AxiGraphHemisphere& graph) {
    NodeView v;
    v.n = graph.n();
    v.m = graph.m();
    v.theta = &graph.grid().theta();
    v.kappa = [&graph](int j) { return graph.curvatures(j); };
    v.phi = [&graph](int j) { return 1.0 - std::cos(graph.radial()[static_cast<std::size_t>(j)]); };
    v.ambient = "hemisphere";
    return v;
}

QuantityField field_impl(const NodeView& v, const symfun::SpeedFunction& f,
                         double alpha, bool use_min_curvature) {
    if (!(alpha >= 1.0))
        throw std::invalid_argument("alpha must be >= 1");
    if (f.dim() != v.n)
        throw std::invalid_argument("speed function dimension does not match the body");
    QuantityField out;
    out.name = use_min_curvature ? "W" : "Z";
    out.fn_spec = f.spec_string();
    out.alpha = alpha;
    out.ambient = v.ambient;
    out.values.resize(static_cast<std::size_t>(v.m) + 1);
    double c = (alpha - 1.0) / alpha;
    for (int j = 0; j <= v.m; ++j) {
        auto kap = v.kappa(j);
        double F = f.eval(kap);
        double inv;
        if (use_min_curvature) {
            double kmin = kap[0];
            for (double k : kap) kmin = std::min(kmin, k);
            inv = 1.0 / kmin;
        } else {
            inv = G_value(kap);
        }
        out.values[static_cast<std::size_t>(j)] = std::pow(F, alpha) * inv - c * v.phi(j);
    }
    return out;
}

TNormalization t_normalization_impl(const NodeView& v, const symfun::SpeedFunction& f,
                                    double alpha) {
    if (!(alpha >= 1.0))
        throw std::invalid_argument("alpha must be >= 1");
    if (f.dim() != v.n)
        throw std::invalid_argument("speed function dimension does not match the body");
    TNormalization best;
    bool first = true;
    double c = (alpha - 1.0) / alpha;
    for (int j = 0; j <= v.m; ++j) {
        auto kap = v.kappa(j);
        double F = f.eval(kap);
        double Fa = std::pow(F, alpha);
        double phi = v.phi(j);
        for (int d = 0; d < v.n; ++d) {
            double val = Fa / kap[static_cast<std::size_t>(d)] - c * phi;
            // strict comparison keeps the lowest node, then lowest direction
            if (first || val > best.beta_star) {
                best.beta_star = val;
                best.node = j;
                best.direction = d;
                first = false;
            }
        }
    }
    return best;
}

void write_csv_impl(const std::string& path, const NodeView& v,
                    const symfun::SpeedFunction& f, double alpha,
                    const std::vector<std::string>& extra_comments) {
    QuantityField Z = field_impl(v, f, alpha, false);
    QuantityField W = field_impl(v, f, alpha, true);
    TNormalization t = t_normalization_impl(v, f, alpha);
    double max_w = W.values[0];
    for (double w : W.values) max_w = std::max(max_w, w);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "# quantities fn=" << f.spec_string() << " n=" << v.n
        << " alpha=" << fmt_double(alpha) << " ambient=" << v.ambient
        << " m=" << v.m << "\n";
    for (const auto& line : extra_comments) out << "# " << line << "\n";
    out << "theta";
    for (int i = 1; i <= v.n; ++i) out << ",kappa_" << i;
    out << ",F,Z,W,Tmax\n";
    for (int j = 0; j <= v.m; ++j) {
        auto kap = v.kappa(j);
        out << fmt_double((*v.theta)[static_cast<std::size_t>(j)]);
        for (double k : kap) out << "," << fmt_double(k);
        out << "," << fmt_double(f.eval(kap));
        out << "," << fmt_double(Z.values[static_cast<std::size_t>(j)]);
        out << "," << fmt_double(W.values[static_cast<std::size_t>(j)]);
        out << "," << fmt_double(W.values[static_cast<std::size_t>(j)] - t.beta_star);
        out << "\n";
    }
    out << "# beta_star=" << fmt_double(t.beta_star) << " node=" << t.node
        << " direction=" << t.direction << " max_W=" << fmt_double(max_w)
        << " agreement=" << fmt_double(std::abs(t.beta_star - max_w)) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

double G_value(std::span<const double> kappa) {
    require_cone(kappa);
    double trb = 0.0, b2 = 0.0;
    for (double k : kappa) {
        double mu = 1.0 / k;
        trb += mu;
        b2 += mu * mu;
    }
    return b2 / trb;
}

QuantityField Z_field(const hypersurface::AxiConvexBody& body,
                      const symfun::SpeedFunction& f, double alpha) {
    return field_impl(make_view(body), f, alpha, false);
}
QuantityField Z_field(const hypersurface::AxiGraphHemisphere& graph,
                      const symfun::SpeedFunction& f, double alpha) {
    return field_impl(make_view(graph), f, alpha, false);
}
QuantityField W_field(const hypersurface::AxiConvexBody& body,
                      const symfun::SpeedFunction& f, double alpha) {
    return field_impl(make_view(body), f, alpha, true);
}
QuantityField W_field(const hypersurface::AxiGraphHemisphere& graph,
                      const symfun::SpeedFunction& f, double alpha) {
    return field_impl(make_view(graph), f, alpha, true);
}

double L1_margin(std::span<const double> kappa, const symfun::SpeedFunction& f,
                 double alpha, const Ambient& ambient, double r) {
    require_cone(kappa);
    if (!(alpha >= 1.0))
        throw std::invalid_argument("alpha must be >= 1");
    if (ambient.eps() < 0)
        throw std::invalid_argument(
            "L1 sign analysis requires a flat or positively curved ambient");
    int n = f.dim();
    if (static_cast<int>(kappa.size()) != n)
        throw std::invalid_argument("curvature dimension does not match the speed function");
    if (ambient.eps() > 0 && !(r > 0.0 && r < ambient.r_max()))
        throw std::domain_error("radial coordinate outside the ambient domain");

    auto d = f.derivs(kappa);
    double F = d.value;
    double sumf = 0.0;
    for (double g : d.grad) sumf += g;

    double trb = 0.0, b2 = 0.0;
    std::vector<double> mu(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        mu[static_cast<std::size_t>(i)] = 1.0 / kappa[static_cast<std::size_t>(i)];
        trb += mu[static_cast<std::size_t>(i)];
        b2 += mu[static_cast<std::size_t>(i)] * mu[static_cast<std::size_t>(i)];
    }
    double G = b2 / trb;
    double sum_dG = 0.0, sum_dG_mu2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double m = mu[static_cast<std::size_t>(i)];
        double dG = (2.0 * m * trb - b2) / (trb * trb);
        sum_dG += dG;
        sum_dG_mu2 += dG * m * m;
    }

    double bracket1 = F * G - sumf;
    double bracket2 = 1.0 - sum_dG;
    double bracket3 = F * sum_dG_mu2 - G * sumf;

    double lambda_p = ambient.dlambda(r);
    double eps = static_cast<double>(ambient.eps());
    return lambda_p * (alpha - 1.0) * std::pow(F, alpha - 1.0) * bracket1 +
           (alpha - 1.0) * std::pow(F, 2.0 * alpha) * bracket2 +
           eps * alpha * std::pow(F, 2.0 * alpha - 1.0) * bracket3;
}

double fg_minus_sumf(std::span<const double> kappa, const symfun::SpeedFunction& f) {
    require_cone(kappa);
    auto d = f.derivs(kappa);
    double sumf = 0.0;
    for (double g : d.grad) sumf += g;
    return d.value * G_value(kappa) - sumf;
}

double fg_minus_sumf_pairwise(std::span<const double> kappa,
                              const symfun::SpeedFunction& f) {
    require_cone(kappa);
    auto d = f.derivs(kappa);
    int n = f.dim();
    double trb = 0.0;
    for (double k : kappa) trb += 1.0 / k;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        double ki = kappa[static_cast<std::size_t>(i)];
        double gi = d.grad[static_cast<std::size_t>(i)];
        for (int j = 0; j < i; ++j) {
            double kj = kappa[static_cast<std::size_t>(j)];
            double gj = d.grad[static_cast<std::size_t>(j)];
            sum += (gi * ki * ki - gj * kj * kj) * (ki - kj) / (ki * ki * kj * kj);
        }
    }
    return sum / trb;
}

TNormalization T_normalization(const hypersurface::AxiConvexBody& body,
                               const symfun::SpeedFunction& f, double alpha) {
    return t_normalization_impl(make_view(body), f, alpha);
}
TNormalization T_normalization(const hypersurface::AxiGraphHemisphere& graph,
                               const symfun::SpeedFunction& f, double alpha) {
    return t_normalization_impl(make_view(graph), f, alpha);
}

double normalized_Z_inequality(std::span<const double> kappa,
                               const symfun::SpeedFunction& f) {
    require_cone(kappa);
    return f.eval(kappa) / f.normalization() * G_value(kappa) - 1.0;
}

void write_quantities_csv(const std::string& path,
                          const hypersurface::AxiConvexBody& body,
                          const symfun::SpeedFunction& f, double alpha,
                          const std::vector<std::string>& extra_comments) {
    write_csv_impl(path, make_view(body), f, alpha, extra_comments);
}
void write_quantities_csv(const std::string& path,
                          const hypersurface::AxiGraphHemisphere& graph,
                          const symfun::SpeedFunction& f, double alpha,
                          const std::vector<std::string>& extra_comments) {
    write_csv_impl(path, make_view(graph), f, alpha, extra_comments);
}

}  // namespace shrink::quantities
