#include "eqcont/polysys.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "eqcont/errors.hpp"

namespace eqcont {

Rational rational_approx(double gamma, double eps, long long max_den)
{
    if (!(gamma >= 0) || !std::isfinite(gamma)) throw DomainError("rational_approx needs a finite gamma >= 0");
    if (!(eps > 0) || max_den < 1) throw DomainError("rational_approx needs eps > 0 and max_den >= 1");

    // Convergents h_k / k_k of the continued fraction of gamma.
    long long h_prev = 1, h = static_cast<long long>(std::floor(gamma));
    long long k_prev = 0, k = 1;
    double frac = gamma - std::floor(gamma);
    for (int iter = 0; iter < 64; ++iter) {
        if (std::abs(gamma - static_cast<double>(h) / static_cast<double>(k)) < eps) {
            long long g = std::gcd(h, k);
            return {h / g, k / g};
        }
        if (frac < 1e-15) break;
        double inv = 1.0 / frac;
        long long a = static_cast<long long>(std::floor(inv));
        frac = inv - static_cast<double>(a);
        long long h_next = a * h + h_prev;
        long long k_next = a * k + k_prev;
        if (k_next > max_den) break;
        h_prev = h;
        k_prev = k;
        h = h_next;
        k = k_next;
    }
    std::ostringstream msg;
    msg << "no convergent of " << gamma << " with denominator <= " << max_den << " within " << eps;
    throw ApproximationInfeasible(msg.str());
}

void PolySystem::add_term(int eq, cplx coeff, std::vector<int> exps)
{
    if (eq < 0 || eq >= neqs()) throw DomainError("equation index out of range");
    if (static_cast<int>(exps.size()) != nvars_) throw DomainError("exponent vector length must equal nvars");
    if (std::any_of(exps.begin(), exps.end(), [](int e) { return e < 0; }))
        throw DomainError("exponents must be nonnegative");
    if (compiled_.start.empty()) compiled_.start.push_back(0);

    auto& terms = equations_[eq];
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (terms[i].exps == exps) {
            terms[i].coeff += coeff;
            compiled_.coeff[slot_[eq][i]] += coeff;
            return;
        }
    }
    for (int v = 0; v < nvars_; ++v) {
        if (exps[v] == 0) continue;
        compiled_.factors.push_back({v, exps[v]});
        compiled_.maxdeg = std::max(compiled_.maxdeg, exps[v]);
    }
    compiled_.eq.push_back(eq);
    compiled_.coeff.push_back(coeff);
    compiled_.start.push_back(static_cast<int>(compiled_.factors.size()));
    slot_[eq].push_back(static_cast<int>(compiled_.coeff.size()) - 1);
    terms.push_back({coeff, std::move(exps)});
}

std::vector<int> PolySystem::degrees() const
{
    std::vector<int> d(equations_.size(), 0);
    for (std::size_t j = 0; j < equations_.size(); ++j)
        for (const auto& t : equations_[j])
            d[j] = std::max(d[j], std::accumulate(t.exps.begin(), t.exps.end(), 0));
    return d;
}

int PolySystem::max_degree() const
{
    auto d = degrees();
    return d.empty() ? 0 : *std::max_element(d.begin(), d.end());
}

namespace {

// pw[v * stride + k] = z_v^k
void power_table(const CVec& z, int maxdeg, std::vector<cplx>& pw)
{
    const int n = static_cast<int>(z.size());
    const int stride = maxdeg + 1;
    pw.resize(static_cast<std::size_t>(n) * stride);
    for (int v = 0; v < n; ++v) {
        cplx* row = pw.data() + static_cast<std::size_t>(v) * stride;
        row[0] = 1.0;
        for (int k = 1; k <= maxdeg; ++k) row[k] = row[k - 1] * z[v];
    }
}

}  // namespace

CVec PolySystem::eval(const CVec& z) const
{
    CVec f = CVec::Zero(neqs());
    std::vector<cplx> pw;
    power_table(z, compiled_.maxdeg, pw);
    const int stride = compiled_.maxdeg + 1;
    const std::size_t nterms = compiled_.coeff.size();
    for (std::size_t t = 0; t < nterms; ++t) {
        cplx v = compiled_.coeff[t];
        for (int i = compiled_.start[t]; i < compiled_.start[t + 1]; ++i) {
            const Factor& fa = compiled_.factors[i];
            v *= pw[static_cast<std::size_t>(fa.var) * stride + fa.exp];
        }
        f[compiled_.eq[t]] += v;
    }
    return f;
}

void PolySystem::eval_jac(const CVec& z, CVec& f, CMat& jac) const
{
    f = CVec::Zero(neqs());
    jac = CMat::Zero(neqs(), nvars_);
    std::vector<cplx> pw;
    power_table(z, compiled_.maxdeg, pw);
    const int stride = compiled_.maxdeg + 1;
    const std::size_t nterms = compiled_.coeff.size();
    cplx vals[16];
    for (std::size_t t = 0; t < nterms; ++t) {
        const int b = compiled_.start[t];
        const int m = compiled_.start[t + 1] - b;
        const cplx c = compiled_.coeff[t];
        const int eq = compiled_.eq[t];
        if (m > 16) {
            // Dense fallback for terms touching many variables.
            cplx v = c;
            for (int i = 0; i < m; ++i) {
                const Factor& fa = compiled_.factors[b + i];
                v *= pw[static_cast<std::size_t>(fa.var) * stride + fa.exp];
            }
            f[eq] += v;
            for (int i = 0; i < m; ++i) {
                const Factor& fi = compiled_.factors[b + i];
                cplx d = c * double(fi.exp) * pw[static_cast<std::size_t>(fi.var) * stride + fi.exp - 1];
                for (int l = 0; l < m; ++l) {
                    if (l == i) continue;
                    const Factor& fl = compiled_.factors[b + l];
                    d *= pw[static_cast<std::size_t>(fl.var) * stride + fl.exp];
                }
                jac(eq, fi.var) += d;
            }
            continue;
        }
        cplx v = c;
        for (int i = 0; i < m; ++i) {
            const Factor& fa = compiled_.factors[b + i];
            vals[i] = pw[static_cast<std::size_t>(fa.var) * stride + fa.exp];
            v *= vals[i];
        }
        f[eq] += v;
        for (int i = 0; i < m; ++i) {
            const Factor& fi = compiled_.factors[b + i];
            cplx d = c * double(fi.exp) * pw[static_cast<std::size_t>(fi.var) * stride + fi.exp - 1];
            for (int l = 0; l < m; ++l)
                if (l != i) d *= vals[l];
            jac(eq, fi.var) += d;
        }
    }
}

namespace {

std::string hexfloat(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, std::abs(v), std::chars_format::hex);
    std::string body(buf, res.ptr);
    return (std::signbit(v) ? "-0x" : "0x") + body;
}

double parse_double(const std::string& tok)
{
    const char* s = tok.c_str();
    char* end = nullptr;
    double v = std::strtod(s, &end);
    if (end == s || *end != '\0') throw SchemaError("bad number in polynomial file: " + tok);
    return v;
}

}  // namespace

void write_polysystem(std::ostream& os, const PolySystem& sys)
{
    os << "# nvars " << sys.nvars() << "\n";
    os << "# neqs " << sys.neqs() << "\n";
    os << "# rational " << sys.meta.p << " " << sys.meta.q << "\n";
    if (!sys.meta.source.empty()) os << "# source " << sys.meta.source << "\n";
    for (const auto& [k, v] : sys.meta.bindings) os << "# bind " << k << " " << v << "\n";
    for (int j = 0; j < sys.neqs(); ++j) {
        for (const auto& t : sys.equation(j)) {
            os << j << " " << hexfloat(t.coeff.real()) << " " << hexfloat(t.coeff.imag());
            for (int e : t.exps) os << " " << e;
            os << "\n";
        }
    }
}

PolySystem read_polysystem(std::istream& is)
{
    int nvars = -1, neqs = -1;
    PolyMeta meta;
    std::vector<std::pair<int, Term>> terms;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        if (line[0] == '#') {
            std::string hash, key;
            ls >> hash >> key;
            if (key == "nvars") ls >> nvars;
            else if (key == "neqs") ls >> neqs;
            else if (key == "rational") ls >> meta.p >> meta.q;
            else if (key == "source") { std::getline(ls >> std::ws, meta.source); }
            else if (key == "bind") {
                std::string k, v;
                ls >> k;
                std::getline(ls >> std::ws, v);
                meta.bindings[k] = v;
            }
            continue;
        }
        if (nvars < 0) throw SchemaError("polynomial file: missing '# nvars' header before line " + std::to_string(lineno));
        std::string tok_eq, tok_re, tok_im;
        ls >> tok_eq >> tok_re >> tok_im;
        Term t;
        t.coeff = {parse_double(tok_re), parse_double(tok_im)};
        t.exps.resize(nvars);
        for (int v = 0; v < nvars; ++v) {
            if (!(ls >> t.exps[v])) throw SchemaError("polynomial file: short exponent list at line " + std::to_string(lineno));
        }
        terms.emplace_back(std::stoi(tok_eq), std::move(t));
    }
    if (nvars < 0) throw SchemaError("polynomial file: missing '# nvars' header");
    if (neqs < 0) {
        neqs = 0;
        for (const auto& [eq, t] : terms) neqs = std::max(neqs, eq + 1);
    }
    PolySystem sys(nvars, neqs);
    sys.meta = meta;
    for (auto& [eq, t] : terms) sys.add_term(eq, t.coeff, std::move(t.exps));
    return sys;
}

PolySystem build_static_system(const City& city, const Rational& rat)
{
    const int n = city.J();
    const int p = static_cast<int>(rat.p);
    const int q = static_cast<int>(rat.q);
    Mat delta = weights(city);
    Vec a(n);
    for (int k = 0; k < n; ++k) a[k] = city.A[k] * std::pow(city.mc[k], -city.alpha);

    PolySystem sys(n, n);
    for (int j = 0; j < n; ++j) {
        for (int l = 0; l < n; ++l) {
            std::vector<int> e(n, 0);
            e[l] += p;
            e[j] += q;
            sys.add_term(j, a[l], std::move(e));
        }
        for (int k = 0; k < n; ++k) {
            std::vector<int> e(n, 0);
            e[k] = p;
            sys.add_term(j, -delta(j, k) * a[k], std::move(e));
        }
    }
    sys.meta.p = rat.p;
    sys.meta.q = rat.q;
    sys.meta.source = "static";
    return sys;
}

double bezout_count(const std::vector<int>& degrees)
{
    double n = 1.0;
    for (int d : degrees) n *= d;
    return n;
}

std::pair<PolySystem, StartSet> start_total_degree(const std::vector<int>& degrees, double cap)
{
    if (std::any_of(degrees.begin(), degrees.end(), [](int d) { return d < 1; }))
        throw DomainError("start degrees must be positive");
    double total = bezout_count(degrees);
    if (total > cap) {
        std::ostringstream msg;
        msg << "total-degree start needs " << total << " paths, cap is " << cap;
        throw PathBudgetExceeded(msg.str());
    }
    const int n = static_cast<int>(degrees.size());
    PolySystem g(n, n);
    for (int j = 0; j < n; ++j) {
        std::vector<int> e(n, 0);
        e[j] = degrees[j];
        g.add_term(j, 1.0, std::move(e));
        g.add_term(j, -1.0, std::vector<int>(n, 0));
    }
    g.meta.source = "total-degree-start";

    StartSet s;
    s.kind = StartSet::Kind::unit_circle;
    std::vector<std::vector<cplx>> roots(n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < degrees[j]; ++k) {
            // Extended-precision angle so each component is rounded once.
            const long double a = 2.0L * std::numbers::pi_v<long double> * k / degrees[j];
            roots[j].emplace_back(static_cast<double>(std::cos(a)), static_cast<double>(std::sin(a)));
        }
    std::vector<int> idx(n, 0);
    const auto count = static_cast<std::size_t>(total);
    s.points.reserve(count);
    for (std::size_t c = 0; c < count; ++c) {
        CVec z(n);
        for (int j = 0; j < n; ++j) z[j] = roots[j][idx[j]];
        s.points.push_back(std::move(z));
        for (int j = n - 1; j >= 0; --j) {
            if (++idx[j] < degrees[j]) break;
            idx[j] = 0;
        }
    }
    return {std::move(g), std::move(s)};
}

std::pair<PolySystem, StartSet> start_homogeneous(const City& city, const Rational& rat, double level)
{
    const int n = city.J();
    PolySystem sys(n, n);
    {
        // Δ = level * ones, written directly since no distance matrix yields it.
        const int p = static_cast<int>(rat.p);
        const int q = static_cast<int>(rat.q);
        for (int j = 0; j < n; ++j) {
            for (int l = 0; l < n; ++l) {
                std::vector<int> e(n, 0);
                e[l] += p;
                e[j] += q;
                sys.add_term(j, 1.0, std::move(e));
            }
            for (int k = 0; k < n; ++k) {
                std::vector<int> e(n, 0);
                e[k] = p;
                sys.add_term(j, -level, std::move(e));
            }
        }
        sys.meta.p = rat.p;
        sys.meta.q = rat.q;
        sys.meta.source = "homogeneous";
        std::ostringstream lv;
        lv.precision(17);
        lv << level;
        sys.meta.bindings["level"] = lv.str();
    }

    const double root = std::pow(level, 1.0 / static_cast<double>(rat.q));
    StartSet s;
    s.kind = StartSet::Kind::homogeneous_city;
    if (n > 30) throw PathBudgetExceeded("sign-pattern start set too large");
    const std::uint64_t patterns = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
        CVec z(n);
        for (int j = 0; j < n; ++j) z[j] = (mask >> j) & 1u ? -root : root;
        CVec f = sys.eval(z);
        double scale = 0.0;
        for (int j = 0; j < n; ++j) scale += std::pow(std::abs(z[j]), static_cast<double>(rat.p));
        cplx ssum = 0.0;
        for (int j = 0; j < n; ++j) ssum += std::pow(z[j], static_cast<int>(rat.p));
        // Residual check, then drop roots on the S = 0 component.
        if (f.cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, scale * std::max(1.0, level))) continue;
        if (std::abs(ssum) <= 1e-8 * std::max(1.0, scale)) continue;
        s.points.push_back(std::move(z));
    }
    return {std::move(sys), std::move(s)};
}

namespace {

double binom(int n, int k)
{
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

double factorial(int n)
{
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

// Coefficients c_m of Σ_{k≤n} (a + gΨ)^k / k! as a polynomial in Ψ.
std::vector<double> truncated_exp_coeffs(double a, double g, int n)
{
    std::vector<double> c(n + 1, 0.0);
    for (int k = 0; k <= n; ++k) {
        double fk = factorial(k);
        for (int m = 0; m <= k; ++m) c[m] += binom(k, m) * std::pow(a, k - m) * std::pow(g, m) / fk;
    }
    return c;
}

double truncated_exp(double y, int n)
{
    double s = 0.0, term = 1.0;
    for (int k = 0; k <= n; ++k) {
        if (k > 0) term *= y / k;
        s += term;
    }
    return s;
}

void maclaurin_setup(const City& city, const MaclaurinOptions& opt, Vec& s, double& pop)
{
    s = opt.surface.size() ? opt.surface : Vec::Ones(city.J());
    if (s.size() != city.J() || (s.array() <= 0).any()) throw DomainError("surface must be positive with length J");
    pop = opt.population < 0 ? city.L1 : opt.population;
}

}  // namespace

PolySystem build_maclaurin_system(const City& city, int n, const MaclaurinOptions& opt)
{
    if (n < 1) throw DomainError("expansion order must be >= 1");
    if (n > 20) throw OverflowRisk("expansion order above 20 makes factorial coefficients ill-conditioned");
    const int J = city.J();
    Vec s;
    double pop = 0;
    maclaurin_setup(city, opt, s, pop);
    Mat delta = weights(city);

    std::vector<std::vector<double>> coef(J);
    for (int l = 0; l < J; ++l) coef[l] = truncated_exp_coeffs(city.A[l], city.gamma1, n);

    PolySystem sys(J, J);
    for (int j = 0; j < J; ++j) {
        for (int l = 0; l < J; ++l) {
            for (int m = 0; m <= n; ++m) {
                std::vector<int> e(J, 0);
                e[l] += m;
                e[j] += 1;
                sys.add_term(j, coef[l][m], std::move(e));
            }
        }
        for (int k = 0; k < J; ++k) {
            double w = pop * delta(j, k) / s[k];
            for (int m = 0; m <= n; ++m) {
                std::vector<int> e(J, 0);
                e[k] = m;
                sys.add_term(j, -w * coef[k][m], std::move(e));
            }
        }
    }
    sys.meta.source = "maclaurin";
    sys.meta.bindings["order"] = std::to_string(n);
    return sys;
}

Vec maclaurin_residual(const City& city, int n, const Vec& psi, const MaclaurinOptions& opt)
{
    Vec s;
    double pop = 0;
    maclaurin_setup(city, opt, s, pop);
    const int J = city.J();
    Vec e(J);
    for (int l = 0; l < J; ++l) e[l] = truncated_exp(city.A[l] + city.gamma1 * psi[l], n);
    double total = e.sum();
    return psi - pop * weights(city) * (e.array() / s.array()).matrix() / total;
}

Vec logit_residual(const City& city, const Vec& psi, const MaclaurinOptions& opt)
{
    Vec s;
    double pop = 0;
    maclaurin_setup(city, opt, s, pop);
    Vec u = city.A + city.gamma1 * psi;
    double umax = u.maxCoeff();
    Vec e = (u.array() - umax).exp().matrix();
    double total = e.sum();
    return psi - pop * weights(city) * (e.array() / s.array()).matrix() / total;
}

}  // namespace eqcont
