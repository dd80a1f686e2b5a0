#include "eqcont/bifurcation.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "eqcont/errors.hpp"
#include "eqcont/homotopies.hpp"

namespace eqcont {

namespace {

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

struct ScaledDet {
    double value = 0;     // sign(det)·σ_min
    Mat adj;              // adj(J) / Π_{i<n-1} σ_i
    double log_abs = 0;
    Eigen::JacobiSVD<Mat> svd;
};

// det J / Π(all but the smallest singular value) and the matching scaled
// adjugate, both finite at a rank-one drop.
ScaledDet scaled_det(const Mat& jx)
{
    ScaledDet d;
    d.svd.compute(jx, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec& sv = d.svd.singularValues();
    const int n = static_cast<int>(sv.size());
    double sgn = d.svd.matrixU().determinant() * d.svd.matrixV().determinant() < 0 ? -1.0 : 1.0;
    double smin = sv[n - 1];
    d.value = sgn * smin;
    d.log_abs = 0;
    for (int i = 0; i < n; ++i) d.log_abs += std::log(sv[i]);
    Vec c(n);
    for (int i = 0; i < n - 1; ++i) c[i] = sv[i] > 0 ? smin / sv[i] : 0.0;
    c[n - 1] = 1.0;
    d.adj = sgn * d.svd.matrixV() * c.asDiagonal() * d.svd.matrixU().transpose();
    return d;
}

}  // namespace

SingularPoint locate_singular(const SecondOrderHomotopy& h, const Vec& x_near, double t_near,
                              const BifurcationConfig& cfg)
{
    const int n = h.dimension();
    Vec x = x_near;
    double t = t_near;
    {
        auto d0 = jacobian_diagnostics<double>(h.jac_x(x, t));
        if (!(d0.min_sv <= cfg.alarm_tol * std::max(1.0, d0.max_sv)))
            throw NotSingular("Jacobian is well conditioned at the given point");
    }
    std::vector<Mat> hxx;
    Mat hxt;
    Vec htt;
    for (int it = 0; it <= cfg.max_iters; ++it) {
        Vec f, jt;
        Mat jx;
        h.eval_all(x, t, &f, &jx, &jt);
        ScaledDet sd = scaled_det(jx);
        const Vec& sv = sd.svd.singularValues();
        double scale = std::max(1.0, sv[0]);
        if (inf_norm(f) <= cfg.newton_tol * scale && std::abs(sd.value) <= cfg.det_tol * scale) {
            SingularPoint sp;
            sp.x = x;
            sp.t_star = t;
            sp.det_value = sd.value;
            sp.log_abs_det = sd.log_abs;
            sp.min_sv = sv[n - 1];
            sp.iterations = it;
            const Mat& V = sd.svd.matrixV();
            for (int i = 0; i < n; ++i)
                if (sv[i] <= cfg.kernel_sv_tol * scale || i == n - 1) sp.kernel.push_back(V.col(i));
            return sp;
        }
        if (it == cfg.max_iters) break;
        h.second_partials(x, t, hxx, hxt, htt);
        // Jacobi: ∂det = tr(adj(J) ∂J), with ∂J/∂x_k (j, l) = ∂²H_j/∂x_l∂x_k.
        Vec gx(n);
        for (int k = 0; k < n; ++k) {
            Mat dj(n, n);
            for (int j = 0; j < n; ++j) dj.row(j) = hxx[j].col(k).transpose();
            gx[k] = (sd.adj.cwiseProduct(dj.transpose())).sum();
        }
        double gt = (sd.adj.cwiseProduct(hxt.transpose())).sum();
        Mat M(n + 1, n + 1);
        M.topLeftCorner(n, n) = jx;
        M.topRightCorner(n, 1) = jt;
        M.bottomLeftCorner(1, n) = gx.transpose();
        M(n, n) = gt;
        Vec rhs(n + 1);
        rhs << -f, -sd.value;
        Vec step = M.completeOrthogonalDecomposition().solve(rhs);
        if (!step.allFinite()) break;
        x += step.head(n);
        t += step[n];
    }
    throw NoConvergence("singular point iteration did not converge");
}

PolySystem second_order_system(const SecondOrderHomotopy& h, const SingularPoint& s, double dt)
{
    const int n = h.dimension();
    Vec f, jt;
    Mat jx;
    h.eval_all(s.x, s.t_star, &f, &jx, &jt);
    std::vector<Mat> hxx;
    Mat hxt;
    Vec htt;
    h.second_partials(s.x, s.t_star, hxx, hxt, htt);

    PolySystem sys(n, n);
    for (int j = 0; j < n; ++j) {
        double c0 = f[j] + jt[j] * dt + 0.5 * htt[j] * dt * dt;
        if (c0 != 0.0) sys.add_term(j, c0, std::vector<int>(n, 0));
        for (int k = 0; k < n; ++k) {
            double c1 = jx(j, k) + hxt(j, k) * dt;
            if (c1 == 0.0) continue;
            std::vector<int> e(n, 0);
            e[k] = 1;
            sys.add_term(j, c1, std::move(e));
        }
        for (int k = 0; k < n; ++k) {
            for (int l = k; l < n; ++l) {
                double c2 = k == l ? 0.5 * hxx[j](k, k) : hxx[j](k, l);
                if (c2 == 0.0) continue;
                std::vector<int> e(n, 0);
                e[k] += 1;
                e[l] += 1;
                sys.add_term(j, c2, std::move(e));
            }
        }
    }
    sys.meta.source = "second-order";
    return sys;
}

bool fold_may_branch(const SecondOrderHomotopy& h, const SingularPoint& s, double dt)
{
    if (s.kernel.size() != 1) return true;
    const int n = h.dimension();
    Vec f, jt;
    Mat jx;
    h.eval_all(s.x, s.t_star, &f, &jx, &jt);
    Eigen::JacobiSVD<Mat> svd(jx, Eigen::ComputeFullU);
    Vec u = svd.matrixU().col(n - 1);
    double ut = u.dot(jt);
    if (!(std::abs(ut) > 1e-6 * std::max(1.0, jt.norm()))) return true;
    std::vector<Mat> hxx;
    Mat hxt;
    Vec htt;
    h.second_partials(s.x, s.t_star, hxx, hxt, htt);
    const Vec& v = s.kernel[0];
    double a = 0;
    for (int j = 0; j < n; ++j) a += 0.5 * u[j] * v.dot(hxx[j] * v);
    double b = u.dot(hxt * v) * dt;
    double c = ut * dt + 0.5 * u.dot(htt) * dt * dt;
    if (a == 0.0) return b != 0.0;
    return b * b - 4.0 * a * c >= 0.0;
}

std::size_t BranchSet::admitted() const
{
    return static_cast<std::size_t>(
        std::count_if(branches.begin(), branches.end(), [](const Branch& b) { return b.admitted; }));
}

std::vector<Branch> BranchSet::validated() const
{
    std::vector<Branch> out;
    for (const auto& b : branches)
        if (b.validated) out.push_back(b);
    return out;
}

BranchSet enumerate_branches(const SecondOrderHomotopy& h, const SingularPoint& s, double dt,
                             const TrackerConfig& cfg, const BifurcationConfig& bc)
{
    const int n = h.dimension();
    if (s.kernel.empty()) throw NotSingular("singular point has an empty kernel");
    BranchSet out;
    out.dt = dt;

    PolySystem quad = second_order_system(h, s, dt);
    std::vector<int> deg = quad.degrees();
    for (int& d : deg) d = std::max(d, 1);
    auto [start, starts] = start_total_degree(deg);
    TotalDegreeH H(quad, start, gamma_trick(bc.seed));
    TrackerConfig c = cfg;
    c.trace = false;
    c.detect_det_sign = false;
    auto results = track_all<cplx>(H, starts.points, 1.0, 0.0, c);

    std::vector<Vec> roots;
    for (const auto& r : results) {
        if (r.status != PathStatus::converged) continue;
        const CVec& z = r.endpoint;
        if (z.imag().cwiseAbs().maxCoeff() > bc.imag_tol * (1.0 + z.cwiseAbs().maxCoeff())) continue;
        roots.push_back(z.real());
    }
    roots = dedup(roots, 1e-10 * (1.0 + std::abs(dt)));

    Mat K(n, static_cast<int>(s.kernel.size()));
    for (std::size_t i = 0; i < s.kernel.size(); ++i) K.col(static_cast<int>(i)) = s.kernel[i];

    std::vector<Vec> landings;
    for (const Vec& dz : roots) {
        Branch b;
        b.dz = dz;
        double nz = dz.norm();
        Vec perp = dz - K * (K.transpose() * dz);
        b.kernel_residual = nz > 0 ? perp.norm() / nz : kInf;
        b.admitted = nz > 0 && b.kernel_residual <= bc.kernel_tol;
        if (b.admitted) {
            Vec land = s.x + dz;
            bool ok = newton_correct<double>(h, land, s.t_star + dt, cfg.newton_tol, 3 * cfg.newton_max_iters);
            bool distinct = std::none_of(landings.begin(), landings.end(), [&](const Vec& o) {
                return (o - land).cwiseAbs().maxCoeff() <= 1e-3 * nz;
            });
            if (ok && distinct) {
                b.validated = true;
                b.landing = land;
                landings.push_back(land);
            }
        }
        out.branches.push_back(std::move(b));
    }
    return out;
}

std::string branch_report_json(const SingularPoint& s, const BranchSet& b)
{
    using nlohmann::json;
    json j;
    j["t_star"] = s.t_star;
    j["det"] = s.det_value;
    j["log_abs_det"] = s.log_abs_det;
    j["kernel_dim"] = s.kernel.size();
    j["x"] = std::vector<double>(s.x.data(), s.x.data() + s.x.size());
    j["dt"] = b.dt;
    j["branches"] = json::array();
    for (const auto& br : b.branches) {
        json e;
        e["dz"] = std::vector<double>(br.dz.data(), br.dz.data() + br.dz.size());
        e["admitted"] = br.admitted;
        e["validated"] = br.validated;
        e["kernel_residual"] = br.kernel_residual;
        j["branches"].push_back(std::move(e));
    }
    return j.dump(2);
}

City tangency_city(const TangencyStudy& st, double a2)
{
    City c = City::line(2, st.gamma, st.xi);
    c.A[1] = a2;
    return c;
}

TangencyReport tangency_family(const TangencyStudy& st, const TrackerConfig& cfg, const BifurcationConfig& bc)
{
    TangencyReport rep;
    const Rational rat = rational_approx(st.gamma);
    auto count = [&](double a2) { return solve_total_degree(tangency_city(st, a2), rat, cfg).proper().size(); };
    const std::size_t n_lo = count(st.a2_lo);
    const std::size_t n_hi = count(st.a2_hi);
    if (n_lo <= n_hi) throw DomainError("tangency family needs more equilibria at a2_lo than at a2_hi");
    double lo = st.a2_lo, hi = st.a2_hi;
    for (int it = 0; it < st.bisect_iters; ++it) {
        double mid = 0.5 * (lo + hi);
        (count(mid) == n_lo ? lo : hi) = mid;
    }
    rep.a2_bisect = 0.5 * (lo + hi);

    City c_lo = tangency_city(st, st.a2_lo);
    City c_hi = tangency_city(st, st.a2_hi);
    rep.lo_set = solve_total_degree(c_lo, rat, cfg).proper();
    StaticPathXH h(StaticParams::of(c_lo), StaticParams::of(c_hi), st.gamma);
    TrackerConfig tc = cfg;
    tc.trace = true;
    bool found = false;
    for (const auto& e : rep.lo_set) {
        auto path = track<double>(h, e.x, 0.0, 1.0, tc);
        if (path.status == PathStatus::converged || path.trace.empty()) continue;
        const auto& last = path.trace.back();
        try {
            rep.singular = locate_singular(h, last.x, last.t, bc);
            found = true;
            break;
        } catch (const Error&) {
        }
    }
    if (!found) throw NoConvergence("no singular point found along the family");
    const double t_star = rep.singular.t_star;
    rep.a2_star = st.a2_lo + t_star * (st.a2_hi - st.a2_lo);
    const double eps = 1e-4 * (st.a2_hi - st.a2_lo);
    rep.count_below = count(rep.a2_star - eps);
    rep.count_above = count(rep.a2_star + eps);

    rep.branches = enumerate_branches(h, rep.singular, default_branch_dt(t_star, 0.0), cfg, bc);
    for (const auto& b : rep.branches.validated()) {
        auto path = track<double>(h, b.landing, t_star + rep.branches.dt, 0.0, cfg);
        if (path.status == PathStatus::converged) rep.continued.push_back(path.endpoint);
    }
    return rep;
}

}  // namespace eqcont
