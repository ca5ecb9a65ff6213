#include "shrink/symfun.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shrink/rng.hpp"
#include "shrink/textio.hpp"

namespace shrink::symfun {

// ====================================================================
// elementary symmetric polynomials and their derivatives
// ====================================================================
//
// sigma_q is evaluated with the Vieta product recurrence
//   p_j <- p_j + kappa_i * p_{j-1},
// which only ever adds nonnegative terms on the positive cone, so there is
// no cancellation.  First and second partials are sigma over the reduced
// argument lists,
//   d sigma_q / d kappa_i        = sigma_{q-1}(kappa minus i)
//   d^2 sigma_q / dk_i dk_j      = sigma_{q-2}(kappa minus {i,j}),  i != j
// and the reduced values are recomputed directly instead of deflating the
// full product, again to stay cancellation-free.  n stays single digit in
// practice, so the O(n^3 q) pair loop is irrelevant for cost.

namespace {

void sigma_upto(const double* k, int n, int qmax, double* out) {
    for (int j = 0; j <= qmax; ++j) out[j] = (j == 0) ? 1.0 : 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::min(qmax, i + 1); j >= 1; --j)
            out[j] += k[i] * out[j - 1];
}

double sigma_single(const double* k, int n, int q) {
    if (q < 0) return 0.0;
    std::vector<double> buf(static_cast<std::size_t>(q) + 1);
    sigma_upto(k, n, q, buf.data());
    return buf[static_cast<std::size_t>(q)];
}

struct SigmaDerivs {
    double val = 0.0;
    std::vector<double> grad;  // sigma_{q-1} over reduced lists
    std::vector<double> hess;  // sigma_{q-2} over doubly reduced lists, zero diagonal
};

SigmaDerivs sigma_derivs(const double* k, int n, int q) {
    SigmaDerivs d;
    d.val = sigma_single(k, n, q);
    d.grad.assign(static_cast<std::size_t>(n), 0.0);
    d.hess.assign(static_cast<std::size_t>(n) * n, 0.0);

    std::vector<double> red(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        int m = 0;
        for (int t = 0; t < n; ++t)
            if (t != i) red[static_cast<std::size_t>(m++)] = k[t];
        d.grad[static_cast<std::size_t>(i)] = sigma_single(red.data(), n - 1, q - 1);
        for (int j = i + 1; j < n; ++j) {
            int m2 = 0;
            for (int t = 0; t < n; ++t)
                if (t != i && t != j) red[static_cast<std::size_t>(m2++)] = k[t];
            double v = sigma_single(red.data(), n - 2, q - 2);
            d.hess[static_cast<std::size_t>(i) * n + j] = v;
            d.hess[static_cast<std::size_t>(j) * n + i] = v;
        }
    }
    return d;
}

double binom(int n, int q) {
    double b = 1.0;
    for (int t = 1; t <= q; ++t) b = b * (n - q + t) / t;
    return b;
}

// f = exp(phi): grad_i = f phi_i, hess_ij = f (phi_ij + phi_i phi_j)
DerivBundle from_log_derivs(int n, double logf, const std::vector<double>& lg,
                            const std::vector<double>& lh) {
    DerivBundle b;
    b.n = n;
    b.value = std::exp(logf);
    b.grad.resize(static_cast<std::size_t>(n));
    b.hess.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) b.grad[static_cast<std::size_t>(i)] = b.value * lg[static_cast<std::size_t>(i)];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            b.hess[static_cast<std::size_t>(i) * n + j] =
                b.value * (lh[static_cast<std::size_t>(i) * n + j] +
                           lg[static_cast<std::size_t>(i)] * lg[static_cast<std::size_t>(j)]);
    return b;
}

bool spec_needs_parens(const std::string& s) {
    return s.find('+') != std::string::npos || s.find(',') != std::string::npos;
}

std::string wrap_part(const std::string& s) {
    return spec_needs_parens(s) ? "(" + s + ")" : s;
}

} // namespace

// ====================================================================
// catalog implementations
// ====================================================================

namespace detail {

struct FnImpl {
    int n;
    explicit FnImpl(int n_) : n(n_) {}
    virtual ~FnImpl() = default;
    virtual double eval(const double* k) const = 0;
    virtual DerivBundle derivs(const double* k) const = 0;
    virtual double normalization() const = 0;
    virtual Traits traits() const = 0;
    virtual std::string spec_string() const = 0;
};

namespace {

// (E_k / E_l)^(1/(k-l)) with 0 <= l < k <= n; l = 0 is the plain root
// (E_k)^(1/k).  Both are concave and inverse concave; log-convexity along
// exponential rays holds only for the plain roots (the quotient:2,1 witness
// in the tests pins the failure).
struct SigmaRatio final : FnImpl {
    int k, l;
    bool as_root;  // constructed through elem_mean_root, keeps its spelling

    SigmaRatio(int n_, int k_, int l_, bool as_root_)
        : FnImpl(n_), k(k_), l(l_), as_root(as_root_) {}

    double eval(const double* kap) const override {
        std::vector<double> s(static_cast<std::size_t>(k) + 1);
        sigma_upto(kap, n, k, s.data());
        double ek = s[static_cast<std::size_t>(k)] / binom(n, k);
        double el = s[static_cast<std::size_t>(l)] / binom(n, l);
        return std::pow(ek / el, 1.0 / (k - l));
    }

    DerivBundle derivs(const double* kap) const override {
        SigmaDerivs dk = sigma_derivs(kap, n, k);
        SigmaDerivs dl = sigma_derivs(kap, n, l);
        double p = 1.0 / (k - l);
        double logf = p * (std::log(dk.val / binom(n, k)) - std::log(dl.val / binom(n, l)));
        std::vector<double> lg(static_cast<std::size_t>(n));
        std::vector<double> lh(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            lg[static_cast<std::size_t>(i)] =
                p * (dk.grad[static_cast<std::size_t>(i)] / dk.val -
                     dl.grad[static_cast<std::size_t>(i)] / dl.val);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                std::size_t ij = static_cast<std::size_t>(i) * n + j;
                lh[ij] = p * (dk.hess[ij] / dk.val -
                              dk.grad[static_cast<std::size_t>(i)] * dk.grad[static_cast<std::size_t>(j)] /
                                  (dk.val * dk.val) -
                              dl.hess[ij] / dl.val +
                              dl.grad[static_cast<std::size_t>(i)] * dl.grad[static_cast<std::size_t>(j)] /
                                  (dl.val * dl.val));
            }
        return from_log_derivs(n, logf, lg, lh);
    }

    double normalization() const override { return 1.0; }

    Traits traits() const override { return {true, true, l == 0}; }

    std::string spec_string() const override {
        if (as_root) return "ek_root:" + std::to_string(k);
        return "quotient:" + std::to_string(k) + "," + std::to_string(l);
    }
};

// (sum kappa_i^r)^(1/r), r != 0.  Concave iff r <= 1, inverse concave iff
// r >= -1, log-convex along exponential rays iff r > 0 (for r < 0 the
// quadratic form has a negative direction already at the isotropic point).
struct PowerMean final : FnImpl {
    double r;

    PowerMean(int n_, double r_) : FnImpl(n_), r(r_) {}

    double eval(const double* kap) const override {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += std::pow(kap[i], r);
        return std::pow(s, 1.0 / r);
    }

    DerivBundle derivs(const double* kap) const override {
        double s = 0.0;
        std::vector<double> pr(static_cast<std::size_t>(n));  // kappa_i^(r-1)
        for (int i = 0; i < n; ++i) {
            pr[static_cast<std::size_t>(i)] = std::pow(kap[i], r - 1.0);
            s += pr[static_cast<std::size_t>(i)] * kap[i];
        }
        double logf = std::log(s) / r;
        std::vector<double> lg(static_cast<std::size_t>(n));
        std::vector<double> lh(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < n; ++i) lg[static_cast<std::size_t>(i)] = pr[static_cast<std::size_t>(i)] / s;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double v = -r * pr[static_cast<std::size_t>(i)] * pr[static_cast<std::size_t>(j)] / (s * s);
                if (i == j) v += (r - 1.0) * std::pow(kap[i], r - 2.0) / s;
                lh[static_cast<std::size_t>(i) * n + j] = v;
            }
        return from_log_derivs(n, logf, lg, lh);
    }

    double normalization() const override { return std::pow(static_cast<double>(n), 1.0 / r); }

    Traits traits() const override { return {r <= 1.0, r >= -1.0, r > 0.0}; }

    std::string spec_string() const override { return "power_mean:" + fmt_double(r); }
};

// positive linear combination; every asserted structural property is closed
// under positive sums, so traits are the AND over the parts
struct Combo final : FnImpl {
    std::vector<double> w;
    std::vector<SpeedFunction> parts;

    Combo(int n_, std::vector<double> w_, std::vector<SpeedFunction> parts_)
        : FnImpl(n_), w(std::move(w_)), parts(std::move(parts_)) {}

    double eval(const double* kap) const override {
        std::span<const double> view(kap, static_cast<std::size_t>(n));
        double s = 0.0;
        for (std::size_t p = 0; p < parts.size(); ++p) s += w[p] * parts[p].eval(view);
        return s;
    }

    DerivBundle derivs(const double* kap) const override {
        std::span<const double> view(kap, static_cast<std::size_t>(n));
        DerivBundle out;
        out.n = n;
        out.grad.assign(static_cast<std::size_t>(n), 0.0);
        out.hess.assign(static_cast<std::size_t>(n) * n, 0.0);
        for (std::size_t p = 0; p < parts.size(); ++p) {
            DerivBundle b = parts[p].derivs(view);
            out.value += w[p] * b.value;
            for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += w[p] * b.grad[i];
            for (std::size_t i = 0; i < out.hess.size(); ++i) out.hess[i] += w[p] * b.hess[i];
        }
        return out;
    }

    double normalization() const override {
        double s = 0.0;
        for (std::size_t p = 0; p < parts.size(); ++p) s += w[p] * parts[p].normalization();
        return s;
    }

    Traits traits() const override {
        Traits t{true, true, true};
        for (const auto& part : parts) {
            Traits pt = part.traits();
            t.concave &= pt.concave;
            t.inverse_concave &= pt.inverse_concave;
            t.log_convex_exp &= pt.log_convex_exp;
        }
        return t;
    }

    std::string spec_string() const override {
        std::string s = "combo:";
        for (std::size_t p = 0; p < parts.size(); ++p) {
            if (p) s += "+";
            s += fmt_double(w[p]) + "*" + wrap_part(parts[p].spec_string());
        }
        return s;
    }
};

// weighted geometric mean, weights sum to one (degree-one homogeneity)
struct GeoMean final : FnImpl {
    std::vector<double> w;
    std::vector<SpeedFunction> parts;

    GeoMean(int n_, std::vector<double> w_, std::vector<SpeedFunction> parts_)
        : FnImpl(n_), w(std::move(w_)), parts(std::move(parts_)) {}

    double eval(const double* kap) const override {
        std::span<const double> view(kap, static_cast<std::size_t>(n));
        double lf = 0.0;
        for (std::size_t p = 0; p < parts.size(); ++p) lf += w[p] * std::log(parts[p].eval(view));
        return std::exp(lf);
    }

    DerivBundle derivs(const double* kap) const override {
        std::span<const double> view(kap, static_cast<std::size_t>(n));
        double logf = 0.0;
        std::vector<double> lg(static_cast<std::size_t>(n), 0.0);
        std::vector<double> lh(static_cast<std::size_t>(n) * n, 0.0);
        for (std::size_t p = 0; p < parts.size(); ++p) {
            DerivBundle b = parts[p].derivs(view);
            logf += w[p] * std::log(b.value);
            for (int i = 0; i < n; ++i) {
                double gi = b.grad[static_cast<std::size_t>(i)] / b.value;
                lg[static_cast<std::size_t>(i)] += w[p] * gi;
                for (int j = 0; j < n; ++j) {
                    double gj = b.grad[static_cast<std::size_t>(j)] / b.value;
                    lh[static_cast<std::size_t>(i) * n + j] +=
                        w[p] * (b.hess[static_cast<std::size_t>(i) * n + j] / b.value - gi * gj);
                }
            }
        }
        return from_log_derivs(n, logf, lg, lh);
    }

    double normalization() const override {
        double lf = 0.0;
        for (std::size_t p = 0; p < parts.size(); ++p) lf += w[p] * std::log(parts[p].normalization());
        return std::exp(lf);
    }

    Traits traits() const override {
        Traits t{true, true, true};
        for (const auto& part : parts) {
            Traits pt = part.traits();
            t.concave &= pt.concave;
            t.inverse_concave &= pt.inverse_concave;
            t.log_convex_exp &= pt.log_convex_exp;
        }
        return t;
    }

    std::string spec_string() const override {
        std::string s = "geomean:";
        for (std::size_t p = 0; p < parts.size(); ++p) {
            if (p) s += ",";
            s += fmt_double(w[p]) + "*" + wrap_part(parts[p].spec_string());
        }
        return s;
    }
};

// f(k) = 1 / g(1/k).  Concavity and inverse concavity swap under the
// transform; log-convexity is not preserved in general so the flag is
// dropped (conservative: checkers simply do not assert it here).
struct DualOf final : FnImpl {
    SpeedFunction g;

    DualOf(int n_, SpeedFunction g_) : FnImpl(n_), g(std::move(g_)) {}

    double eval(const double* kap) const override {
        std::vector<double> u(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = 1.0 / kap[i];
        return 1.0 / g.eval(u);
    }

    DerivBundle derivs(const double* kap) const override {
        std::vector<double> u(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = 1.0 / kap[i];
        DerivBundle gb = g.derivs(u);
        double G = gb.value;
        DerivBundle out;
        out.n = n;
        out.value = 1.0 / G;
        out.grad.resize(static_cast<std::size_t>(n));
        out.hess.resize(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < n; ++i) {
            double ki2 = kap[i] * kap[i];
            out.grad[static_cast<std::size_t>(i)] = gb.grad[static_cast<std::size_t>(i)] / (G * G * ki2);
        }
        for (int i = 0; i < n; ++i) {
            double ki2 = kap[i] * kap[i];
            for (int j = 0; j < n; ++j) {
                double kj2 = kap[j] * kap[j];
                double v = -gb.hess[static_cast<std::size_t>(i) * n + j] / (G * G * ki2 * kj2) +
                           2.0 * gb.grad[static_cast<std::size_t>(i)] * gb.grad[static_cast<std::size_t>(j)] /
                               (G * G * G * ki2 * kj2);
                if (i == j)
                    v -= 2.0 * gb.grad[static_cast<std::size_t>(i)] / (G * G * ki2 * kap[i]);
                out.hess[static_cast<std::size_t>(i) * n + j] = v;
            }
        }
        return out;
    }

    double normalization() const override { return 1.0 / g.normalization(); }

    Traits traits() const override {
        Traits gt = g.traits();
        return {gt.inverse_concave, gt.concave, false};
    }

    std::string spec_string() const override { return "dual:" + g.spec_string(); }
};

} // namespace
} // namespace detail

// ====================================================================
// SpeedFunction facade: validation + dispatch
// ====================================================================

namespace {

void require_dim(int n) {
    if (n < 2 || n > 64)
        throw std::invalid_argument("speed function dimension must be in [2, 64], got " +
                                    std::to_string(n));
}

void require_cone(std::span<const double> kappa, int n) {
    if (static_cast<int>(kappa.size()) != n)
        throw std::invalid_argument("curvature vector has size " + std::to_string(kappa.size()) +
                                    ", expected " + std::to_string(n));
    for (double v : kappa)
        if (!std::isfinite(v) || v <= 0.0)
            throw std::domain_error("curvature vector leaves the positive cone (entry " +
                                    fmt_double(v) + ")");
}

void require_parts(const std::vector<double>& w, const std::vector<SpeedFunction>& parts) {
    if (parts.empty() || w.size() != parts.size())
        throw std::invalid_argument("combination needs matching nonempty weight/part lists");
    for (double x : w)
        if (!std::isfinite(x) || x <= 0.0)
            throw std::invalid_argument("combination weights must be positive");
    for (const auto& p : parts)
        if (p.dim() != parts.front().dim())
            throw std::invalid_argument("combination parts disagree on dimension");
}

} // namespace

SpeedFunction SpeedFunction::elem_mean_root(int n, int k) {
    require_dim(n);
    if (k < 1 || k > n)
        throw std::invalid_argument("elem_mean_root needs 1 <= k <= n, got k=" + std::to_string(k));
    return SpeedFunction(std::make_shared<detail::SigmaRatio>(n, k, 0, true));
}

SpeedFunction SpeedFunction::quotient(int n, int k, int l) {
    require_dim(n);
    if (k < 1 || k > n || l < 0 || l >= k)
        throw std::invalid_argument("quotient needs 0 <= l < k <= n, got k=" + std::to_string(k) +
                                    " l=" + std::to_string(l));
    return SpeedFunction(std::make_shared<detail::SigmaRatio>(n, k, l, false));
}

SpeedFunction SpeedFunction::power_mean(int n, double r) {
    require_dim(n);
    if (!std::isfinite(r) || std::abs(r) < 1e-6)
        throw std::invalid_argument("power_mean exponent must be nonzero (|r| >= 1e-6)");
    return SpeedFunction(std::make_shared<detail::PowerMean>(n, r));
}

SpeedFunction SpeedFunction::convex_combo(std::vector<double> w, std::vector<SpeedFunction> parts) {
    require_parts(w, parts);
    int n = parts.front().dim();
    return SpeedFunction(std::make_shared<detail::Combo>(n, std::move(w), std::move(parts)));
}

SpeedFunction SpeedFunction::geo_mean(std::vector<double> w, std::vector<SpeedFunction> parts) {
    require_parts(w, parts);
    double ws = 0.0;
    for (double x : w) ws += x;
    if (std::abs(ws - 1.0) > 1e-12)
        throw std::invalid_argument("geo_mean weights must sum to one (degree-one homogeneity)");
    int n = parts.front().dim();
    return SpeedFunction(std::make_shared<detail::GeoMean>(n, std::move(w), std::move(parts)));
}

SpeedFunction SpeedFunction::dual_of(SpeedFunction g) {
    int n = g.dim();
    return SpeedFunction(std::make_shared<detail::DualOf>(n, std::move(g)));
}

int SpeedFunction::dim() const { return impl_->n; }
double SpeedFunction::normalization() const { return impl_->normalization(); }
Traits SpeedFunction::traits() const { return impl_->traits(); }
std::string SpeedFunction::spec_string() const { return impl_->spec_string(); }

double SpeedFunction::eval(std::span<const double> kappa) const {
    require_cone(kappa, impl_->n);
    return impl_->eval(kappa.data());
}

DerivBundle SpeedFunction::derivs(std::span<const double> kappa) const {
    require_cone(kappa, impl_->n);
    return impl_->derivs(kappa.data());
}

// ====================================================================
// spec-string parser
// ====================================================================

namespace {

std::string trim(std::string_view s) {
    std::size_t a = s.find_first_not_of(" \t");
    std::size_t b = s.find_last_not_of(" \t");
    if (a == std::string_view::npos) return "";
    return std::string(s.substr(a, b - a + 1));
}

// strip one level of matching outer parentheses, repeatedly
std::string strip_outer_parens(std::string s) {
    for (;;) {
        s = trim(s);
        if (s.size() < 2 || s.front() != '(' || s.back() != ')') return s;
        int depth = 0;
        bool wraps = true;
        for (std::size_t i = 0; i + 1 < s.size(); ++i) {
            if (s[i] == '(') ++depth;
            if (s[i] == ')') --depth;
            if (depth == 0) { wraps = false; break; }
        }
        if (!wraps) return s;
        s = s.substr(1, s.size() - 2);
    }
}

// does s starting at pos begin with a float immediately followed by '*'?
bool weight_star_ahead(const std::string& s, std::size_t pos) {
    double dummy;
    auto res = std::from_chars(s.data() + pos, s.data() + s.size(), dummy);
    return res.ec == std::errc{} && res.ptr != s.data() + pos &&
           res.ptr != s.data() + s.size() && *res.ptr == '*';
}

// split on `sep` at paren depth zero, but only where the next token is a
// weight ("0.3*..."), so commas inside e.g. "quotient:2,1" stay put
std::vector<std::string> split_weighted_parts(const std::string& s, char sep) {
    std::vector<std::string> parts;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '(') ++depth;
        else if (s[i] == ')') --depth;
        else if (s[i] == sep && depth == 0 && weight_star_ahead(s, i + 1)) {
            parts.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    parts.push_back(s.substr(start));
    return parts;
}

// "w*SPEC" -> (w, SPEC)
std::pair<double, std::string> split_weight(const std::string& part) {
    int depth = 0;
    for (std::size_t i = 0; i < part.size(); ++i) {
        if (part[i] == '(') ++depth;
        else if (part[i] == ')') --depth;
        else if (part[i] == '*' && depth == 0)
            return {parse_double(trim(part.substr(0, i))), part.substr(i + 1)};
    }
    throw std::invalid_argument("combination part '" + part + "' lacks a 'weight*' prefix");
}

int parse_int(const std::string& s) {
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("bad integer: '" + s + "'");
    return v;
}

} // namespace

SpeedFunction SpeedFunction::parse(const std::string& spec, int n) {
    std::string s = strip_outer_parens(trim(spec));
    std::size_t pos = s.find(':');
    if (pos == std::string::npos)
        throw std::invalid_argument("speed function spec '" + s + "' has no ':' separator");
    std::string head = s.substr(0, pos);
    std::string rest = s.substr(pos + 1);

    if (head == "ek_root") return elem_mean_root(n, parse_int(trim(rest)));
    if (head == "quotient") {
        std::size_t c = rest.find(',');
        if (c == std::string::npos)
            throw std::invalid_argument("quotient spec needs 'k,l', got '" + rest + "'");
        return quotient(n, parse_int(trim(rest.substr(0, c))), parse_int(trim(rest.substr(c + 1))));
    }
    if (head == "power_mean") return power_mean(n, parse_double(trim(rest)));
    if (head == "dual") return dual_of(parse(rest, n));
    if (head == "combo" || head == "geomean") {
        std::vector<double> w;
        std::vector<SpeedFunction> parts;
        for (const auto& piece : split_weighted_parts(rest, head == "combo" ? '+' : ',')) {
            auto [weight, sub] = split_weight(trim(piece));
            w.push_back(weight);
            parts.push_back(parse(sub, n));
        }
        return head == "combo" ? convex_combo(std::move(w), std::move(parts))
                               : geo_mean(std::move(w), std::move(parts));
    }
    throw std::invalid_argument("unknown speed function kind '" + head + "'");
}

// ====================================================================
// checkers
// ====================================================================

AdmissibilityReport check_admissible(const SpeedFunction& f, int samples, std::uint64_t seed) {
    Rng rng(seed);
    int n = f.dim();
    AdmissibilityReport rep;
    rep.samples = samples;
    rep.min_value = std::numeric_limits<double>::infinity();
    rep.min_grad_entry = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        std::vector<double> kappa = rng.positive_cone_point(n);
        double c = rng.log_uniform(0.25, 4.0);
        DerivBundle b = f.derivs(kappa);
        rep.min_value = std::min(rep.min_value, b.value);
        for (double g : b.grad) rep.min_grad_entry = std::min(rep.min_grad_entry, g);

        std::vector<double> scaled(kappa);
        for (double& v : scaled) v *= c;
        double fc = f.eval(scaled);
        rep.max_homogeneity_defect =
            std::max(rep.max_homogeneity_defect, std::abs(fc - c * b.value) / fc);

        double euler = 0.0;
        for (int i = 0; i < n; ++i) euler += kappa[static_cast<std::size_t>(i)] * b.grad[static_cast<std::size_t>(i)];
        rep.max_euler_defect = std::max(rep.max_euler_defect, std::abs(euler - b.value) / b.value);
    }
    return rep;
}

double log_convexity_margin(const SpeedFunction& f, std::span<const double> kappa,
                            std::span<const double> y) {
    DerivBundle b = f.derivs(kappa);
    int n = b.n;
    if (static_cast<int>(y.size()) != n)
        throw std::invalid_argument("direction vector has wrong size");
    double m = 0.0;
    for (int i = 0; i < n; ++i)
        m += b.grad[static_cast<std::size_t>(i)] / (b.value * kappa[static_cast<std::size_t>(i)]) * y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m += (b.h(i, j) / b.value -
                  b.grad[static_cast<std::size_t>(i)] * b.grad[static_cast<std::size_t>(j)] / (b.value * b.value)) *
                 y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)];
    return m;
}

double inverse_concavity_margin(const SpeedFunction& f, std::span<const double> kappa,
                                std::span<const double> y) {
    DerivBundle b = f.derivs(kappa);
    int n = b.n;
    if (static_cast<int>(y.size()) != n)
        throw std::invalid_argument("direction vector has wrong size");
    double quad = 0.0, diag = 0.0, lin = 0.0;
    for (int i = 0; i < n; ++i) {
        diag += b.grad[static_cast<std::size_t>(i)] / kappa[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
        lin += b.grad[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) quad += b.h(i, j) * y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)];
    }
    return quad + 2.0 * diag - 2.0 * lin * lin / b.value;
}

PairMargins pairwise_margins(const SpeedFunction& f, std::span<const double> kappa) {
    DerivBundle b = f.derivs(kappa);
    int n = b.n;
    double kmax = 0.0;
    for (double v : kappa) kmax = std::max(kmax, std::abs(v));
    PairMargins out{std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity()};
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            if (k == l) continue;
            double dk = kappa[static_cast<std::size_t>(k)], dl = kappa[static_cast<std::size_t>(l)];
            double gk = b.grad[static_cast<std::size_t>(k)], gl = b.grad[static_cast<std::size_t>(l)];
            double dd;
            if (std::abs(dk - dl) <= 1e-7 * kmax)
                dd = 0.5 * (b.h(k, k) + b.h(l, l)) - b.h(k, l);
            else
                dd = (gk - gl) / (dk - dl);
            out.mixed = std::min(out.mixed, dd + gk / dl + gl / dk);
            out.weighted = std::min(out.weighted, (gk * dk * dk - gl * dl * dl) * (dk - dl));
        }
    return out;
}

double speed_weighted_lower_margin(const SpeedFunction& f, std::span<const double> kappa) {
    DerivBundle b = f.derivs(kappa);
    double s = 0.0;
    for (int i = 0; i < b.n; ++i)
        s += b.grad[static_cast<std::size_t>(i)] * kappa[static_cast<std::size_t>(i)] * kappa[static_cast<std::size_t>(i)];
    return s - b.value * b.value / f.normalization();
}

std::pair<double, double> concave_bounds_margins(const SpeedFunction& f,
                                                 std::span<const double> kappa) {
    DerivBundle b = f.derivs(kappa);
    double gsum = 0.0, ksum = 0.0;
    for (int i = 0; i < b.n; ++i) {
        gsum += b.grad[static_cast<std::size_t>(i)];
        ksum += kappa[static_cast<std::size_t>(i)];
    }
    double c = f.normalization();
    return {gsum - c, c / b.n * ksum - b.value};
}

double weight_monotone_margin(const SpeedFunction& f, std::span<const double> kappa) {
    DerivBundle b = f.derivs(kappa);
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < b.n; ++k)
        for (int l = k + 1; l < b.n; ++l) {
            double m = (b.grad[static_cast<std::size_t>(k)] * kappa[static_cast<std::size_t>(k)] -
                        b.grad[static_cast<std::size_t>(l)] * kappa[static_cast<std::size_t>(l)]) *
                       (kappa[static_cast<std::size_t>(k)] - kappa[static_cast<std::size_t>(l)]);
            worst = std::min(worst, m);
        }
    return worst;
}

} // namespace shrink::symfun
