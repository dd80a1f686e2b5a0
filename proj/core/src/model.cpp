#include "eqcont/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "eqcont/dual.hpp"
#include "eqcont/errors.hpp"

namespace eqcont {

void City::validate() const
{
    const int n = J();
    if (n < 1) throw DomainError("city needs at least one location");
    if (dist.rows() != n || dist.cols() != n) throw DomainError("dist must be J x J");
    if (c.size() != n || mc.size() != n) throw DomainError("c and mc must have length J");
    if ((A.array() <= 0).any()) throw DomainError("amenities must be strictly positive");
    if ((c.array() <= 0).any()) throw DomainError("supply constants must be strictly positive");
    if ((mc.array() <= 0).any()) throw DomainError("marginal costs must be strictly positive");
    if (!(alpha > 0)) throw DomainError("alpha must be positive");
    if (!(eta > 0)) throw DomainError("eta must be in (0, inf]");
    if (eta_local.size()) {
        if (eta_local.size() != n) throw DomainError("eta_local must have length J");
        if (!((eta_local.array() > 0).all() && eta_local.allFinite()))
            throw DomainError("per-location eta must be positive and finite");
    }
    if (!(xi >= 0)) throw DomainError("xi must be nonnegative");
    if (!(theta > 0)) throw DomainError("theta must be positive");
    if (L1 < 0 || L2 < 0 || L1 + L2 <= 0) throw DomainError("populations must be nonnegative with positive total");
    for (int j = 0; j < n; ++j) {
        if (dist(j, j) != 0.0) throw DomainError("dist must have a zero diagonal");
        for (int k = 0; k < n; ++k) {
            if (dist(j, k) < 0) throw DomainError("distances must be nonnegative");
            if (std::abs(dist(j, k) - dist(k, j)) > 1e-12 * (1 + std::abs(dist(j, k))))
                throw DomainError("dist must be symmetric");
        }
    }
}

std::vector<std::string> City::warnings() const
{
    std::vector<std::string> out;
    if (!diagonally_dominant(weights(*this)))
        out.emplace_back("interaction weights are not strictly diagonally dominant");
    return out;
}

City City::line(int J, double gamma1, double xi)
{
    City city;
    city.A = Vec::Ones(J);
    city.c = Vec::Ones(J);
    city.mc = Vec::Ones(J);
    city.dist.resize(J, J);
    for (int j = 0; j < J; ++j)
        for (int k = 0; k < J; ++k) city.dist(j, k) = std::abs(j - k);
    city.gamma1 = gamma1;
    city.xi = xi;
    city.L1 = 0.2 * J;
    city.L2 = 0.8 * J;
    return city;
}

City City::random_line(int J, double gamma1, double gamma2, double xi, double sigma, std::uint64_t seed)
{
    City city = line(J, gamma1, xi);
    city.gamma2 = gamma2;
    if (sigma > 0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> n01(0.0, 1.0);
        for (int j = 0; j < J; ++j) city.A[j] = std::exp(sigma * n01(rng));
    }
    return city;
}

Mat weights(const City& city)
{
    // Scalar exp: Eigen's packet exp can differ from its tail by an ulp,
    // which breaks exact symmetry of the weights.
    return (-city.xi * city.dist).unaryExpr([](double v) { return std::exp(v); });
}

bool diagonally_dominant(const Mat& delta)
{
    for (Eigen::Index j = 0; j < delta.rows(); ++j) {
        double off = delta.row(j).cwiseAbs().sum() - std::abs(delta(j, j));
        if (!(std::abs(delta(j, j)) > off)) return false;
    }
    return true;
}

Vec psi_from_x(const City& city, const Vec& x)
{
    return weights(city) * x;
}

Vec solve_weights(const Mat& delta, const Vec& rhs)
{
    Eigen::PartialPivLU<Mat> lu(delta);
    // rcond() is an estimate of 1/cond in the 1-norm.
    double rc = lu.rcond();
    if (!(rc > 1e-14)) {
        std::ostringstream msg;
        msg << "interaction weights are numerically singular (rcond " << rc << ")";
        throw SingularWeights(msg.str());
    }
    return lu.solve(rhs);
}

Vec x_from_psi(const City& city, const Vec& psi)
{
    return solve_weights(weights(city), psi);
}

namespace {

void require_positive(const Vec& v, const char* what)
{
    if ((v.array() <= 0).any() || !v.allFinite())
        throw DomainError(std::string(what) + " must be strictly positive and finite");
}

// Group-g choice weights A_k q_k^{-α} Ψ_k^γ, extended by the signed power.
Vec choice_weights(const City& city, const Vec& psi, const Vec& q, double gamma)
{
    Vec w(city.J());
    for (int k = 0; k < city.J(); ++k)
        w[k] = city.A[k] * std::pow(q[k], -city.alpha) * spow(psi[k], gamma);
    return w;
}

Vec social_residual_ext(const City& city, const Vec& psi, const Vec& q)
{
    Vec w = choice_weights(city, psi, q, city.gamma1);
    return psi - weights(city) * (w / w.sum());
}

Vec market_residual_ext(const City& city, const Vec& psi, const Vec& q)
{
    Vec w1 = choice_weights(city, psi, q, city.gamma1);
    Vec w2 = choice_weights(city, psi, q, city.gamma2);
    double s1 = w1.sum();
    double s2 = w2.sum();
    Vec r(city.J());
    for (int j = 0; j < city.J(); ++j) {
        double qa = std::pow(q[j], city.alpha);
        // L_g A_j Ψ_j^γ / S_g, with A_j Ψ_j^γ = w_j q_j^α.
        double demand = city.L1 * w1[j] * qa / s1 + city.L2 * w2[j] * qa / s2;
        double eta = city.eta_at(j);
        r[j] = city.c[j] / std::pow(city.mc[j], eta) * std::pow(q[j], city.alpha + eta) - demand;
    }
    return r;
}

}  // namespace

Vec social_residual(const City& city, const Vec& psi, const Vec& qprice)
{
    require_positive(psi, "psi");
    require_positive(qprice, "q");
    return social_residual_ext(city, psi, qprice);
}

Vec market_residual(const City& city, const Vec& psi, const Vec& qprice)
{
    if (!city.elastic()) throw EtaInfinite("market residual undefined for eta = inf; prices equal mc");
    require_positive(psi, "psi");
    require_positive(qprice, "q");
    return market_residual_ext(city, psi, qprice);
}

double ResidualReport::max_norm() const
{
    double m = social.size() ? social.cwiseAbs().maxCoeff() : 0.0;
    if (market.size()) m = std::max(m, market.cwiseAbs().maxCoeff());
    return m;
}

ResidualReport residual_report(const City& city, const Vec& psi, const Vec& qprice)
{
    ResidualReport r;
    r.social = social_residual(city, psi, qprice);
    if (city.elastic()) r.market = market_residual(city, psi, qprice);
    return r;
}

std::string_view to_string(EqStatus s)
{
    switch (s) {
    case EqStatus::proper: return "proper";
    case EqStatus::improper: return "improper";
    case EqStatus::complex: return "complex";
    case EqStatus::divergent: return "divergent";
    case EqStatus::singular_endpoint: return "singular-endpoint";
    }
    return "unknown";
}

bool in_box(const Vec& x, double tol_box)
{
    return (x.array() >= -tol_box).all() && (x.array() <= 1.0 + tol_box).all();
}

namespace {

EqStatus box_status(const Vec& x, double tol_box)
{
    bool sums = std::abs(x.sum() - 1.0) <= x.size() * tol_box;
    return in_box(x, tol_box) && sums ? EqStatus::proper : EqStatus::improper;
}

}  // namespace

Equilibrium classify(const City& city, const Vec& psi, const Vec& qprice, const ClassifyTol& tol)
{
    Equilibrium e;
    e.psi = psi;
    e.qprice = qprice;
    e.x = Vec::Constant(psi.size(), std::nan(""));
    if (!psi.allFinite() || !qprice.allFinite() || psi.cwiseAbs().maxCoeff() > tol.diverge_cap ||
        qprice.cwiseAbs().maxCoeff() > tol.diverge_cap) {
        e.status = EqStatus::divergent;
        return e;
    }
    try {
        e.x = x_from_psi(city, psi);
    } catch (const SingularWeights&) {
        e.status = EqStatus::singular_endpoint;
        return e;
    }
    if ((qprice.array() <= 0).any()) {
        e.status = EqStatus::singular_endpoint;
        return e;
    }
    double r = social_residual_ext(city, psi, qprice).cwiseAbs().maxCoeff();
    if (city.elastic()) r = std::max(r, market_residual_ext(city, psi, qprice).cwiseAbs().maxCoeff());
    e.residual = std::isfinite(r) ? r : kInf;
    e.status = e.residual <= tol.tol_resid ? box_status(e.x, tol.tol_box) : EqStatus::singular_endpoint;
    return e;
}

Equilibrium classify(const City& city, const CVec& psi, const Vec& qprice, const ClassifyTol& tol)
{
    if (psi.imag().size() && psi.imag().cwiseAbs().maxCoeff() > tol.tol_box) {
        Equilibrium e;
        e.psi = psi.real();
        e.x = Vec::Constant(psi.size(), std::nan(""));
        e.qprice = qprice;
        e.status = EqStatus::complex;
        return e;
    }
    return classify(city, Vec(psi.real()), qprice, tol);
}

Equilibrium classify_root(const City& city, int p, int q, const CVec& z, const ClassifyTol& tol)
{
    const int n = city.J();
    Equilibrium e;
    e.qprice = city.mc;
    e.psi = Vec::Constant(n, std::nan(""));
    e.x = Vec::Constant(n, std::nan(""));
    if (!z.allFinite() || z.cwiseAbs().maxCoeff() > tol.diverge_cap) {
        e.status = EqStatus::divergent;
        return e;
    }
    Vec zr = z.real();
    for (int j = 0; j < n; ++j) e.psi[j] = std::pow(zr[j], q);
    if (z.imag().cwiseAbs().maxCoeff() > tol.tol_box) {
        e.status = EqStatus::complex;
        return e;
    }
    Vec w(n);
    for (int k = 0; k < n; ++k) w[k] = city.A[k] * std::pow(city.mc[k], -city.alpha) * std::pow(zr[k], p);
    double s = w.sum();
    if (!(std::abs(s) > 1e-300)) {
        e.status = EqStatus::singular_endpoint;
        return e;
    }
    Vec r = e.psi - weights(city) * (w / s);
    e.residual = r.cwiseAbs().maxCoeff();
    try {
        e.x = x_from_psi(city, e.psi);
    } catch (const SingularWeights&) {
        e.status = EqStatus::singular_endpoint;
        return e;
    }
    e.status = e.residual <= tol.tol_resid ? box_status(e.x, tol.tol_box) : EqStatus::singular_endpoint;
    return e;
}

void sort_by_x(std::vector<Equilibrium>& eqs)
{
    std::stable_sort(eqs.begin(), eqs.end(), [](const Equilibrium& a, const Equilibrium& b) {
        return std::lexicographical_compare(a.x.data(), a.x.data() + a.x.size(), b.x.data(),
                                            b.x.data() + b.x.size());
    });
}

std::vector<Equilibrium> unique_by_x(std::vector<Equilibrium> eqs, double tol)
{
    std::vector<Equilibrium> out;
    for (auto& e : eqs) {
        bool dup = std::any_of(out.begin(), out.end(), [&](const Equilibrium& o) {
            return o.x.size() == e.x.size() && (o.x - e.x).cwiseAbs().maxCoeff() <= tol;
        });
        if (!dup) out.push_back(std::move(e));
    }
    return out;
}

}  // namespace eqcont
