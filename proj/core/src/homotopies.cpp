#include "eqcont/homotopies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "eqcont/bifurcation.hpp"
#include "eqcont/errors.hpp"

namespace eqcont {

// ---- TotalDegreeH ----

TotalDegreeH::TotalDegreeH(PolySystem target, PolySystem start, cplx gamma)
    : target_(std::move(target)), start_(std::move(start)), gamma_(gamma)
{
    if (target_.nvars() != start_.nvars() || target_.neqs() != start_.neqs())
        throw DomainError("target and start systems differ in shape");
}

CVec TotalDegreeH::eval(const CVec& z, double t) const
{
    return gamma_ * t * start_.eval(z) + (1.0 - t) * target_.eval(z);
}

CMat TotalDegreeH::jac_x(const CVec& z, double t) const
{
    CMat jx;
    eval_all(z, t, nullptr, &jx, nullptr);
    return jx;
}

CVec TotalDegreeH::jac_t(const CVec& z, double t) const
{
    CVec jt;
    eval_all(z, t, nullptr, nullptr, &jt);
    return jt;
}

void TotalDegreeH::eval_all(const CVec& z, double t, CVec* f, CMat* jx, CVec* jt) const
{
    CVec fp, fg;
    CMat jp, jg;
    target_.eval_jac(z, fp, jp);
    start_.eval_jac(z, fg, jg);
    if (f) *f = gamma_ * t * fg + (1.0 - t) * fp;
    if (jx) *jx = gamma_ * t * jg + (1.0 - t) * jp;
    if (jt) *jt = gamma_ * fg - fp;
}

cplx gamma_trick(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    return std::polar(1.0, u(rng));
}

// ---- parameter paths ----

StaticParams StaticParams::of(const City& city)
{
    return {city.A, city.mc, weights(city), city.alpha};
}

StaticParams StaticParams::isolated(int J, double alpha)
{
    return {Vec::Ones(J), Vec::Ones(J), Mat::Identity(J, J), alpha};
}

StaticParams StaticParams::homogeneous(int J, double alpha, double level)
{
    return {Vec::Ones(J), Vec::Ones(J), Mat::Constant(J, J, level), alpha};
}

StaticPathZH::StaticPathZH(StaticParams from, StaticParams to, int p, int q)
    : from_(std::move(from)), to_(std::move(to)), p_(p), q_(q)
{
}

StaticPathXH::StaticPathXH(StaticParams from, StaticParams to, double gamma)
    : from_(std::move(from)), to_(std::move(to)), gamma_(gamma)
{
}

std::vector<Vec> isolated_starts(int J, double gamma)
{
    std::vector<Vec> out;
    if (!(gamma > 1.0)) {
        out.push_back(Vec::Constant(J, 1.0 / J));
        return out;
    }
    if (J > 24) throw PathBudgetExceeded("isolated-locations start set exceeds 2^24 points");
    const unsigned long long total = 1ULL << J;
    for (unsigned long long mask = 1; mask < total; ++mask) {
        Vec x = Vec::Zero(J);
        int k = 0;
        for (int j = 0; j < J; ++j)
            if (mask >> j & 1ULL) ++k;
        for (int j = 0; j < J; ++j)
            if (mask >> j & 1ULL) x[j] = 1.0 / k;
        out.push_back(std::move(x));
    }
    return out;
}

// ---- reports ----

std::size_t SolveReport::count(EqStatus s) const
{
    return static_cast<std::size_t>(
        std::count_if(equilibria.begin(), equilibria.end(), [s](const Equilibrium& e) { return e.status == s; }));
}

std::vector<Equilibrium> SolveReport::proper() const
{
    std::vector<Equilibrium> out;
    for (const auto& e : equilibria)
        if (e.status == EqStatus::proper) out.push_back(e);
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class S>
void count_status(SolveStats& st, const PathResult<S>& r)
{
    ++st.paths;
    if (r.bad_start) ++st.bad_start;
    switch (r.status) {
    case PathStatus::converged: ++st.converged; break;
    case PathStatus::diverged: ++st.diverged; break;
    case PathStatus::singular: ++st.singular; break;
    case PathStatus::step_failure: ++st.step_failure; break;
    }
}

// Newton on the composition-space fixed point at the exact γ.
Equilibrium polish_static(const City& city, const Vec& x0, const ClassifyTol& tol)
{
    StaticParams par = StaticParams::of(city);
    StaticPathXH h(par, par, city.gamma1);
    Vec x = x0;
    newton_correct<double>(h, x, 1.0, 1e-14, 30);
    if (!x.allFinite() || (x - x0).cwiseAbs().maxCoeff() > 1e-6) x = x0;
    return classify(city, Vec(weights(city) * x), city.mc, tol);
}

// Keeps proper and improper equilibria, proper first, deduplicated and sorted.
std::vector<Equilibrium> finish_equilibria(std::vector<Equilibrium> eqs, double dedup_tol)
{
    std::vector<Equilibrium> real;
    for (auto& e : eqs)
        if (e.status == EqStatus::proper || e.status == EqStatus::improper) real.push_back(std::move(e));
    std::stable_sort(real.begin(), real.end(), [](const Equilibrium& a, const Equilibrium& b) {
        return (a.status == EqStatus::proper) > (b.status == EqStatus::proper);
    });
    real = unique_by_x(std::move(real), dedup_tol);
    sort_by_x(real);
    return real;
}

Equilibrium classify_static_root(const City& city, const Rational& rat, const CVec& z, const ClassifyTol& tol,
                                 SolveStats& st)
{
    Equilibrium e = classify_root(city, static_cast<int>(rat.p), static_cast<int>(rat.q), z, tol);
    if (e.status == EqStatus::complex) {
        ++st.complex_endpoints;
        return e;
    }
    if (e.status == EqStatus::divergent) return e;
    ++st.real_endpoints;
    // Principal branch: polish at the exact γ in composition space.
    if ((z.real().array() > 0).all() && e.x.allFinite()) {
        Equilibrium p = polish_static(city, e.x, tol);
        if (p.status == EqStatus::proper || p.status == EqStatus::improper) return p;
    }
    return e;
}

}  // namespace

SolveReport solve_total_degree(const City& city, const Rational& rat, const TrackerConfig& cfg,
                               const SolveOptions& opt, std::vector<PathResult<cplx>>* paths)
{
    city.validate();
    cfg.validate();
    auto t0 = Clock::now();
    SolveReport rep;
    rep.method = "total-degree";
    rep.seed = opt.seed;
    rep.rat = rat;
    rep.complete = true;
    rep.gamma = gamma_trick(opt.seed);

    PolySystem target = build_static_system(city, rat);
    auto [start, starts] = start_total_degree(target.degrees(), opt.path_cap);
    TotalDegreeH h(target, start, rep.gamma);
    auto results = track_all<cplx>(h, starts.points, 1.0, 0.0, cfg);

    std::vector<Equilibrium> eqs;
    for (const auto& r : results) {
        count_status(rep.stats, r);
        if (r.status != PathStatus::converged) continue;
        eqs.push_back(classify_static_root(city, rat, r.endpoint, opt.classify, rep.stats));
    }
    rep.equilibria = finish_equilibria(std::move(eqs), opt.dedup_tol);
    if (paths) *paths = std::move(results);
    rep.stats.seconds = seconds_since(t0);
    return rep;
}

namespace {

struct BranchFollower {
    const SecondOrderHomotopy& h;
    const TrackerConfig& cfg;
    SolveStats& st;
    std::vector<Vec> endpoints;

    void follow(const PathResult<double>& r, int depth)
    {
        if (r.status == PathStatus::converged) {
            endpoints.push_back(r.endpoint);
            return;
        }
        if (r.status != PathStatus::singular || depth <= 0 || r.t_final >= 1.0) return;
        SingularPoint sp;
        try {
            sp = locate_singular(h, r.endpoint, r.t_final);
        } catch (const Error&) {
            return;
        }
        if (!(sp.t_star < 1.0)) return;
        ++st.branch_points;
        double dt = default_branch_dt(sp.t_star, 1.0);
        if (!fold_may_branch(h, sp, dt)) return;
        BranchSet bs;
        try {
            bs = enumerate_branches(h, sp, dt, cfg);
        } catch (const Error&) {
            return;
        }
        for (const auto& b : bs.validated()) {
            ++st.branches_followed;
            PathResult<double> next;
            try {
                next = track<double>(h, b.landing, sp.t_star + dt, 1.0, cfg);
            } catch (const Error&) {
                continue;
            }
            follow(next, depth - 1);
        }
    }
};

}  // namespace

SolveReport solve_amenity_homotopy(const City& city, const Rational& rat, const TrackerConfig& cfg,
                                   const AmenityOptions& opt)
{
    city.validate();
    cfg.validate();
    auto t0 = Clock::now();
    SolveReport rep;
    rep.method = "amenity";
    rep.seed = opt.seed;
    rep.rat = rat;
    rep.complete = false;
    const int J = city.J();
    const StaticParams target = StaticParams::of(city);

    bool isolated = opt.start == AmenityOptions::Start::isolated && city.gamma1 != 1.0;
    std::vector<Equilibrium> eqs;
    if (isolated) {
        rep.method += "/isolated";
        StaticPathXH h(StaticParams::isolated(J, city.alpha), target, city.gamma1);
        auto starts = isolated_starts(J, city.gamma1);
        if (static_cast<double>(starts.size()) > opt.path_cap)
            throw PathBudgetExceeded("start set larger than the path budget");
        auto results = track_all<double>(h, starts, 0.0, 1.0, cfg);
        BranchFollower bf{h, cfg, rep.stats, {}};
        for (const auto& r : results) {
            count_status(rep.stats, r);
            bf.follow(r, opt.branch_on_singular ? opt.max_branch_depth : 0);
        }
        for (const auto& x : bf.endpoints) {
            ++rep.stats.real_endpoints;
            eqs.push_back(polish_static(city, x, opt.classify));
        }
    } else {
        rep.method += "/homogeneous";
        auto [sys, ss] = start_homogeneous(city, rat, opt.level);
        (void)sys;
        StaticPathZH h(StaticParams::homogeneous(J, city.alpha, opt.level), target, static_cast<int>(rat.p),
                       static_cast<int>(rat.q));
        std::vector<Vec> starts;
        for (const auto& z : ss.points) starts.push_back(z.real());
        auto results = track_all<double>(h, starts, 0.0, 1.0, cfg);
        BranchFollower bf{h, cfg, rep.stats, {}};
        for (const auto& r : results) {
            count_status(rep.stats, r);
            bf.follow(r, opt.branch_on_singular ? opt.max_branch_depth : 0);
        }
        for (const auto& z : bf.endpoints)
            eqs.push_back(classify_static_root(city, rat, CVec(z.cast<cplx>()), opt.classify, rep.stats));
    }
    rep.equilibria = finish_equilibria(std::move(eqs), opt.dedup_tol);
    rep.stats.seconds = seconds_since(t0);
    return rep;
}

// ---- H_η ----

ElasticityH::ElasticityH(const City& city, int q, Vec zeta_to)
    : city_(city), delta_(weights(city)), J_(city.J()), q_(q), zeta_to_(std::move(zeta_to))
{
    if (q_ < 1) throw DomainError("q must be >= 1");
    if (zeta_to_.size() != J_ || (zeta_to_.array() < 0).any()) throw DomainError("zeta must be nonnegative, length J");
}

void ElasticityH::blocks(const Vec& y, double t, Mat& a11, Mat& a12, Mat& a21, Mat& a22, Vec& b1, Vec& b2) const
{
    Mat jx;
    Vec jt;
    eval_all(y, t, nullptr, &jx, &jt);
    const int n = J_;
    a11 = jx.topLeftCorner(n, n);
    a12 = jx.topRightCorner(n, n);
    a21 = jx.bottomLeftCorner(n, n);
    a22 = jx.bottomRightCorner(n, n);
    b1 = jt.head(n);
    b2 = jt.tail(n);
}

bool ElasticityH::tangent(const Vec& y, double t, Vec& dy) const
{
    Mat a11, a12, a21, a22;
    Vec b1, b2;
    blocks(y, t, a11, a12, a21, a22, b1, b2);
    // a22 = ∂Q/∂log q − I
    Eigen::PartialPivLU<Mat> lp(a22);
    if (!(lp.rcond() > 1e-15)) return false;
    Mat schur = a11 - a12 * lp.solve(a21);
    Vec rhs = -b1 + a12 * lp.solve(b2);
    Eigen::PartialPivLU<Mat> ls(schur);
    if (!(ls.rcond() > 1e-15)) return false;
    Vec dz = ls.solve(rhs);
    Vec dq = lp.solve(Vec(-b2 - a21 * dz));
    dy.resize(2 * J_);
    dy << dz, dq;
    return dy.allFinite();
}

ElasticityH::Certificates ElasticityH::certificates(const Vec& y, double t) const
{
    Mat a11, a12, a21, a22;
    Vec b1, b2;
    blocks(y, t, a11, a12, a21, a22, b1, b2);
    Certificates c;
    c.min_sv_price_block = jacobian_diagnostics<double>(a22).min_sv;
    Eigen::PartialPivLU<Mat> lp(a22);
    c.min_sv_schur = lp.rcond() > 1e-15 ? jacobian_diagnostics<double>(Mat(a11 - a12 * lp.solve(a21))).min_sv : 0.0;
    return c;
}

Vec ElasticityH::state_from(const Vec& psi, const Vec& qprice) const
{
    Vec y(2 * J_);
    y.head(J_) = psi.array().log().matrix() / static_cast<double>(q_);
    y.tail(J_) = qprice.array().log().matrix();
    return y;
}

void ElasticityH::unpack(const Vec& y, Vec& psi, Vec& qprice) const
{
    psi = (static_cast<double>(q_) * y.head(J_)).array().exp().matrix();
    qprice = y.tail(J_).array().exp().matrix();
}

ElasticityResult solve_elasticity_homotopy(const City& city, const Equilibrium& eq0, const TrackerConfig& cfg,
                                           const ClassifyTol& tol)
{
    city.validate();
    cfg.validate();
    const int J = city.J();
    if (eq0.psi.size() != J || !eq0.psi.allFinite() || (eq0.psi.array() <= 0).any())
        throw DomainError("elasticity homotopy needs a start with Ψ > 0");
    Vec zeta(J);
    for (int j = 0; j < J; ++j) zeta[j] = std::isfinite(city.eta_at(j)) ? 1.0 / city.eta_at(j) : 0.0;
    int q = 1;
    try {
        q = static_cast<int>(rational_approx(city.gamma1).q);
    } catch (const Error&) {
        q = 1;
    }
    ElasticityH h(city, q, zeta);
    Vec y0 = h.state_from(eq0.psi, city.mc);

    TrackerConfig c = cfg;
    c.trace = true;
    ElasticityResult out;
    out.zeta_to = zeta.maxCoeff();
    out.path = track<double>(h, y0, 0.0, 1.0, c);
    out.min_sv_price_block = kInf;
    out.min_sv_schur = kInf;
    for (const auto& pt : out.path.trace) {
        auto cert = h.certificates(pt.x, pt.t);
        out.min_sv_price_block = std::min(out.min_sv_price_block, cert.min_sv_price_block);
        out.min_sv_schur = std::min(out.min_sv_schur, cert.min_sv_schur);
    }
    if (!cfg.trace) out.path.trace.clear();

    Vec psi, qprice;
    h.unpack(out.path.endpoint, psi, qprice);
    if (out.path.status == PathStatus::converged) {
        out.equilibrium = classify(city, psi, qprice, tol);
    } else {
        out.equilibrium.psi = psi;
        out.equilibrium.qprice = qprice;
        out.equilibrium.x = Vec::Constant(J, std::nan(""));
        out.equilibrium.status = out.path.status == PathStatus::diverged ? EqStatus::divergent
                                                                         : EqStatus::singular_endpoint;
    }
    return out;
}

// ---- MacLaurin ----

SolveReport solve_maclaurin(const City& city, int n, const TrackerConfig& cfg, const MaclaurinSolveOptions& opt,
                            std::vector<PathResult<cplx>>* paths)
{
    city.validate();
    cfg.validate();
    auto t0 = Clock::now();
    SolveReport rep;
    rep.method = "maclaurin";
    rep.seed = opt.seed;
    rep.complete = true;
    rep.gamma = gamma_trick(opt.seed);

    const int J = city.J();
    PolySystem target = build_maclaurin_system(city, n, opt.model);
    auto [start, starts] = start_total_degree(target.degrees(), opt.path_cap);
    TotalDegreeH h(target, start, rep.gamma);
    auto results = track_all<cplx>(h, starts.points, 1.0, 0.0, cfg);

    Vec s = opt.model.surface.size() ? opt.model.surface : Vec::Ones(J);
    double pop = opt.model.population < 0 ? city.L1 : opt.model.population;
    const ClassifyTol& tol = opt.classify;

    std::vector<Equilibrium> eqs;
    for (const auto& r : results) {
        count_status(rep.stats, r);
        if (r.status != PathStatus::converged) continue;
        Equilibrium e;
        e.qprice = city.mc;
        e.psi = r.endpoint.real();
        e.x = Vec::Constant(J, std::nan(""));
        if (!r.endpoint.allFinite() || r.endpoint.cwiseAbs().maxCoeff() > tol.diverge_cap) {
            e.status = EqStatus::divergent;
            continue;
        }
        if (r.endpoint.imag().cwiseAbs().maxCoeff() > tol.tol_box) {
            ++rep.stats.complex_endpoints;
            continue;
        }
        ++rep.stats.real_endpoints;
        // Real Newton polish on the polynomial itself.
        Vec psi = e.psi;
        for (int it = 0; it < 8; ++it) {
            CVec f;
            CMat jac;
            target.eval_jac(psi.cast<cplx>(), f, jac);
            Eigen::PartialPivLU<Mat> lu(jac.real());
            if (!(lu.rcond() > 1e-15)) break;
            Vec d = lu.solve(Vec(-f.real()));
            if (!d.allFinite()) break;
            psi += d;
            if (d.cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + psi.cwiseAbs().maxCoeff())) break;
        }
        if (!psi.allFinite() || (psi - e.psi).cwiseAbs().maxCoeff() > 1e-6) psi = e.psi;
        e.psi = psi;
        e.residual = maclaurin_residual(city, n, psi, opt.model).cwiseAbs().maxCoeff();
        try {
            e.x = (x_from_psi(city, psi).array() * s.array() / pop).matrix();
        } catch (const SingularWeights&) {
            e.status = EqStatus::singular_endpoint;
            continue;
        }
        if (!(e.residual <= tol.tol_resid)) {
            e.status = EqStatus::singular_endpoint;
        } else {
            e.status = in_box(e.x, tol.tol_box) ? EqStatus::proper : EqStatus::improper;
        }
        eqs.push_back(std::move(e));
    }
    rep.equilibria = finish_equilibria(std::move(eqs), opt.dedup_tol);
    if (paths) *paths = std::move(results);
    rep.stats.seconds = seconds_since(t0);
    return rep;
}

}  // namespace eqcont
