#include "eqcont/tracker.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <ostream>
#include <thread>

#include "eqcont/errors.hpp"

namespace eqcont {

namespace {

using cplx = std::complex<double>;

template <class V>
double norm_inf(const V& v)
{
    return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

template <class S>
S unit_phase(S v)
{
    if constexpr (std::is_same_v<S, double>) {
        return v < 0 ? -1.0 : 1.0;
    } else {
        double a = std::abs(v);
        return a > 0 ? v / a : S(1.0);
    }
}

}  // namespace

void TrackerConfig::validate() const
{
    if (!(step_min > 0 && step_min <= step_init && step_init <= step_max))
        throw ConfigError("tracker steps must satisfy 0 < step_min <= step_init <= step_max");
    if (!(newton_tol > 0)) throw ConfigError("newton_tol must be positive");
    if (newton_max_iters < 1) throw ConfigError("newton_max_iters must be >= 1");
    if (!(endgame_ratio > 0 && endgame_ratio < 1)) throw ConfigError("endgame_ratio must be in (0,1)");
    if (threads < 1) throw ConfigError("threads must be >= 1");
}

std::string_view to_string(PathStatus s)
{
    switch (s) {
    case PathStatus::converged: return "converged";
    case PathStatus::diverged: return "diverged";
    case PathStatus::singular: return "singular";
    case PathStatus::step_failure: return "step-failure";
    }
    return "unknown";
}

template <class S>
bool Homotopy<S>::tangent(const VecS& x, double t, VecS& dx) const
{
    MatS jx;
    VecS jt;
    eval_all(x, t, nullptr, &jx, &jt);
    Eigen::PartialPivLU<MatS> lu(jx);
    if (!(lu.rcond() > 1e-15)) return false;
    dx = lu.solve(-jt);
    return dx.allFinite();
}

template <class S>
JacobianDiagnostics<S> jacobian_diagnostics(const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& jac)
{
    using MatS = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
    JacobianDiagnostics<S> d;
    if (jac.size() == 0) {
        d.min_sv = d.max_sv = d.condition = 1.0;
        d.det_phase = S(1.0);
        return d;
    }
    Eigen::JacobiSVD<MatS> svd(jac);
    const auto& sv = svd.singularValues();
    d.max_sv = sv[0];
    d.min_sv = sv[sv.size() - 1];
    d.condition = d.min_sv > 0 ? d.max_sv / d.min_sv : std::numeric_limits<double>::infinity();

    Eigen::PartialPivLU<MatS> lu(jac);
    const MatS& m = lu.matrixLU();
    S phase = S(lu.permutationP().determinant());
    double logabs = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        S u = m(i, i);
        double a = std::abs(u);
        if (a == 0.0) {
            d.det_phase = S(0.0);
            d.log_abs_det = -std::numeric_limits<double>::infinity();
            return d;
        }
        phase *= unit_phase(u);
        logabs += std::log(a);
    }
    d.det_phase = phase;
    d.log_abs_det = logabs;
    return d;
}

template <class S>
JacobianDiagnostics<S> jacobian_diagnostics(const Homotopy<S>& h, const Eigen::Matrix<S, Eigen::Dynamic, 1>& x,
                                            double t)
{
    return jacobian_diagnostics<S>(h.jac_x(x, t));
}

template <class S>
bool newton_correct(const Homotopy<S>& h, Eigen::Matrix<S, Eigen::Dynamic, 1>& x, double t, double tol,
                    int max_iters)
{
    using VecS = Eigen::Matrix<S, Eigen::Dynamic, 1>;
    using MatS = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
    VecS f;
    MatS jx;
    h.eval_all(x, t, &f, &jx, nullptr);
    double r = norm_inf(f);
    for (int it = 0; it < max_iters && !(r <= tol); ++it) {
        if (!f.allFinite()) return false;
        VecS dx = jx.partialPivLu().solve(-f);
        if (!dx.allFinite()) return false;
        // Damped update: halve until the residual does not grow.
        double lambda = 1.0;
        VecS xn = x + dx;
        double rn = norm_inf(h.eval(xn, t));
        for (int k = 0; k < 6 && !(rn <= r); ++k) {
            lambda *= 0.5;
            xn = x + lambda * dx;
            rn = norm_inf(h.eval(xn, t));
        }
        if (!std::isfinite(rn)) return false;
        x = xn;
        h.eval_all(x, t, &f, &jx, nullptr);
        r = norm_inf(f);
        if (lambda * norm_inf(dx) <= 1e-16 * (1.0 + norm_inf(x))) break;
    }
    return r <= tol;
}

namespace {

// Newton corrector used inside the tracking loop, with contraction and
// trust checks that reject steps which may have jumped paths.
template <class S>
bool corrector(const Homotopy<S>& h, Eigen::Matrix<S, Eigen::Dynamic, 1>& x, double t, const TrackerConfig& cfg)
{
    using VecS = Eigen::Matrix<S, Eigen::Dynamic, 1>;
    using MatS = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
    VecS f;
    MatS jx;
    double prev = std::numeric_limits<double>::infinity();
    const double x0n = norm_inf(x);
    for (int it = 0; it < cfg.newton_max_iters; ++it) {
        h.eval_all(x, t, &f, &jx, nullptr);
        if (!f.allFinite() || !jx.allFinite()) return false;
        double scale = 1.0 + norm_inf(x);
        if (norm_inf(f) <= 1e-3 * cfg.newton_tol) return true;
        VecS dx = jx.partialPivLu().solve(-f);
        if (!dx.allFinite()) return false;
        double nd = norm_inf(dx);
        if (it == 0 && nd > cfg.corrector_trust * (1.0 + x0n)) return false;
        if (it > 0 && nd > 0.5 * prev && nd > 1e3 * cfg.corrector_tol * scale) return false;
        x += dx;
        if (nd <= cfg.corrector_tol * scale) return true;
        prev = nd;
    }
    return false;
}

template <class S>
double det_sign(const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& jx)
{
    if constexpr (std::is_same_v<S, double>) {
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(jx);
        double s = lu.permutationP().determinant();
        const auto& m = lu.matrixLU();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            if (m(i, i) == 0.0) return 0.0;
            if (m(i, i) < 0) s = -s;
        }
        return s;
    } else {
        return 0.0;
    }
}

}  // namespace

template <class S>
PathResult<S> track(const Homotopy<S>& h, const Eigen::Matrix<S, Eigen::Dynamic, 1>& x0, double t_from,
                    double t_to, const TrackerConfig& cfg)
{
    using VecS = Eigen::Matrix<S, Eigen::Dynamic, 1>;
    using MatS = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

    if (x0.size() != h.dimension()) throw BadStart("start vector has the wrong dimension");
    double r0 = norm_inf(h.eval(x0, t_from));
    if (!(r0 <= cfg.start_tol)) throw BadStart("start point residual " + std::to_string(r0) + " exceeds tolerance");

    PathResult<S> res;
    res.min_abs_eig_seen = std::numeric_limits<double>::infinity();
    const double dir = t_to >= t_from ? 1.0 : -1.0;
    VecS x = x0;
    double t = t_from;
    double step = cfg.step_init;
    int streak = 0;
    double prev_sign = 0.0;
    const bool real_path = std::is_same_v<S, double>;

    auto monitor = [&](const VecS& xv, double tv, double& min_sv) -> bool {
        MatS jx = h.jac_x(xv, tv);
        min_sv = std::numeric_limits<double>::quiet_NaN();
        if (cfg.monitor_singular) {
            auto d = jacobian_diagnostics<S>(jx);
            min_sv = d.min_sv;
            res.min_abs_eig_seen = std::min(res.min_abs_eig_seen, d.min_sv);
            if (d.min_sv < cfg.singular_eig_tol * std::max(1.0, d.max_sv)) return true;
        }
        if (real_path && cfg.detect_det_sign) {
            double s = det_sign<S>(jx);
            if (s == 0.0) return true;
            if (prev_sign != 0.0 && s != prev_sign) return true;
            prev_sign = s;
        }
        return false;
    };

    auto record = [&](double tv, double st, const VecS& xv, double sv) {
        if (cfg.trace) res.trace.push_back({tv, st, xv, sv});
    };

    double sv0 = 0;
    if (monitor(x, t, sv0)) {
        res.endpoint = x;
        res.t_final = t;
        res.status = PathStatus::singular;
        res.residual = r0;
        record(t, 0.0, x, sv0);
        return res;
    }
    record(t, 0.0, x, sv0);

    const double total = std::abs(t_to - t_from);
    while (res.steps_taken < cfg.max_steps) {
        double remaining = std::abs(t_to - t);
        if (remaining <= cfg.endgame_floor * std::max(1.0, total)) break;
        bool endgame = remaining < cfg.endgame_radius * (1.0 + 1e-9);
        double hstep = endgame ? std::min(step, remaining * (1.0 - cfg.endgame_ratio)) : std::min(step, remaining);
        if (!endgame && remaining - hstep < cfg.endgame_radius && remaining > cfg.endgame_radius)
            hstep = remaining - cfg.endgame_radius;
        if (hstep <= 0) break;

        // RK4 predictor on the Davidenko ODE.
        bool ok = true;
        VecS k1, k2, k3, k4;
        const double dh = dir * hstep;
        ok = h.tangent(x, t, k1);
        if (ok) ok = h.tangent(VecS(x + 0.5 * dh * k1), t + 0.5 * dh, k2);
        if (ok) ok = h.tangent(VecS(x + 0.5 * dh * k2), t + 0.5 * dh, k3);
        if (ok) ok = h.tangent(VecS(x + dh * k3), t + dh, k4);
        VecS xn;
        double tn = (std::abs(t_to - (t + dh)) <= 1e-15 * std::max(1.0, total)) ? t_to : t + dh;
        if (ok) {
            xn = x + (dh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            ok = xn.allFinite() && corrector(h, xn, tn, cfg);
        }
        if (ok) {
            x = xn;
            t = tn;
            ++res.steps_taken;
            if (norm_inf(x) > cfg.diverge_cap) {
                res.endpoint = x;
                res.t_final = t;
                res.status = PathStatus::diverged;
                res.residual = norm_inf(h.eval(x, t));
                return res;
            }
            double sv = 0;
            bool singular = monitor(x, t, sv);
            record(t, hstep, x, sv);
            if (singular) {
                res.endpoint = x;
                res.t_final = t;
                res.status = PathStatus::singular;
                res.residual = norm_inf(h.eval(x, t));
                return res;
            }
            if (!endgame && ++streak >= 3) {
                step = std::min(step * 1.5, cfg.step_max);
                streak = 0;
            }
        } else {
            streak = 0;
            if (endgame) {
                step = std::min(step, hstep) * 0.5;
            } else {
                step *= 0.5;
            }
            if (step < cfg.step_min) {
                res.endpoint = x;
                res.t_final = t;
                double cap = std::sqrt(cfg.diverge_cap);
                if (norm_inf(x) > cap) {
                    res.status = PathStatus::diverged;
                } else {
                    auto d = jacobian_diagnostics<S>(h.jac_x(x, t));
                    res.min_abs_eig_seen = std::min(res.min_abs_eig_seen, d.min_sv);
                    res.status = d.min_sv < std::sqrt(cfg.singular_eig_tol) * std::max(1.0, d.max_sv)
                                     ? PathStatus::singular
                                     : PathStatus::step_failure;
                }
                res.residual = norm_inf(h.eval(x, t));
                return res;
            }
        }
    }

    if (res.steps_taken >= cfg.max_steps && std::abs(t_to - t) > cfg.endgame_floor * std::max(1.0, total)) {
        // Step budget exhausted short of the target.
        res.endpoint = x;
        res.t_final = t;
        res.status = PathStatus::step_failure;
        res.residual = norm_inf(h.eval(x, t));
        return res;
    }

    // Final Newton at the exact target parameter.
    VecS xf = x;
    bool conv = newton_correct(h, xf, t_to, cfg.newton_tol, 3 * cfg.newton_max_iters);
    res.t_final = t_to;
    if (conv && xf.allFinite()) {
        res.endpoint = xf;
        res.residual = norm_inf(h.eval(xf, t_to));
        res.status = PathStatus::converged;
        double sv = 0;
        if (cfg.monitor_singular) {
            auto d = jacobian_diagnostics<S>(h.jac_x(xf, t_to));
            sv = d.min_sv;
            res.min_abs_eig_seen = std::min(res.min_abs_eig_seen, sv);
        }
        record(t_to, std::abs(t_to - t), xf, sv);
        return res;
    }
    res.endpoint = x;
    res.residual = norm_inf(h.eval(x, t_to));
    if (norm_inf(x) > std::sqrt(cfg.diverge_cap)) {
        res.status = PathStatus::diverged;
    } else {
        auto d = jacobian_diagnostics<S>(h.jac_x(x, t));
        res.min_abs_eig_seen = std::min(res.min_abs_eig_seen, d.min_sv);
        res.status = d.min_sv < std::sqrt(cfg.singular_eig_tol) * std::max(1.0, d.max_sv) ? PathStatus::singular
                                                                                          : PathStatus::step_failure;
    }
    return res;
}

template <class S>
std::vector<PathResult<S>> track_all(const Homotopy<S>& h,
                                     const std::vector<Eigen::Matrix<S, Eigen::Dynamic, 1>>& starts,
                                     double t_from, double t_to, const TrackerConfig& cfg)
{
    std::vector<PathResult<S>> out(starts.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= starts.size()) return;
            try {
                out[i] = track(h, starts[i], t_from, t_to, cfg);
            } catch (const BadStart&) {
                out[i].endpoint = starts[i];
                out[i].t_final = t_from;
                out[i].status = PathStatus::step_failure;
                out[i].bad_start = true;
            } catch (const std::exception&) {
                out[i].endpoint = starts[i];
                out[i].t_final = t_from;
                out[i].status = PathStatus::step_failure;
            }
        }
    };
    int nthreads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(starts.size())));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
    }
    return out;
}

namespace {

template <class V>
bool lex_less(const V& a, const V& b)
{
    for (Eigen::Index i = 0; i < std::min(a.size(), b.size()); ++i) {
        if constexpr (std::is_same_v<typename V::Scalar, double>) {
            if (a[i] != b[i]) return a[i] < b[i];
        } else {
            if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
            if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
        }
    }
    return a.size() < b.size();
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <class V>
std::vector<V> dedup_impl(const std::vector<V>& pts, double tol)
{
    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool placed = false;
        for (auto& c : clusters) {
            const V& seed = pts[c.front()];
            if (seed.size() == pts[i].size() && (seed - pts[i]).cwiseAbs().maxCoeff() <= tol) {
                c.push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed) clusters.push_back({i});
    }
    std::vector<V> reps;
    for (const auto& c : clusters) {
        V r = pts[c.front()];
        for (Eigen::Index k = 0; k < r.size(); ++k) {
            std::vector<double> re, im;
            for (std::size_t i : c) {
                if constexpr (std::is_same_v<typename V::Scalar, double>) {
                    re.push_back(pts[i][k]);
                } else {
                    re.push_back(pts[i][k].real());
                    im.push_back(pts[i][k].imag());
                }
            }
            if constexpr (std::is_same_v<typename V::Scalar, double>) {
                r[k] = median(re);
            } else {
                r[k] = {median(re), median(im)};
            }
        }
        reps.push_back(std::move(r));
    }
    std::sort(reps.begin(), reps.end(), lex_less<V>);
    return reps;
}

}  // namespace

std::vector<Eigen::VectorXd> dedup(const std::vector<Eigen::VectorXd>& pts, double tol)
{
    return dedup_impl(pts, tol);
}

std::vector<Eigen::VectorXcd> dedup(const std::vector<Eigen::VectorXcd>& pts, double tol)
{
    return dedup_impl(pts, tol);
}

template <class S>
void write_trace_csv(std::ostream& os, const std::vector<PathResult<S>>& results)
{
    std::size_t n = 0;
    for (const auto& r : results)
        if (!r.trace.empty()) n = std::max<std::size_t>(n, r.trace.front().x.size());
    os << "path_id,t,step";
    for (std::size_t k = 1; k <= n; ++k) os << ",re_" << k << ",im_" << k;
    os << ",min_sv\n";
    auto num = [&](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    for (std::size_t p = 0; p < results.size(); ++p) {
        for (const auto& pt : results[p].trace) {
            os << p << ",";
            num(pt.t);
            os << ",";
            num(pt.step);
            for (Eigen::Index k = 0; k < pt.x.size(); ++k) {
                os << ",";
                num(std::real(pt.x[k]));
                os << ",";
                num(std::imag(pt.x[k]));
            }
            os << ",";
            num(pt.min_sv);
            os << "\n";
        }
    }
}

template <class S>
double jacobian_fd_error(const Homotopy<S>& h, const Eigen::Matrix<S, Eigen::Dynamic, 1>& x, double t,
                         double rel_step)
{
    using VecS = Eigen::Matrix<S, Eigen::Dynamic, 1>;
    auto jx = h.jac_x(x, t);
    auto jt = h.jac_t(x, t);
    double err = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        double hk = rel_step * std::max(1.0, std::abs(x[k]));
        VecS xp = x, xm = x;
        xp[k] += S(hk);
        xm[k] -= S(hk);
        VecS col = (h.eval(xp, t) - h.eval(xm, t)) / S(2.0 * hk);
        err = std::max(err, norm_inf(VecS(col - jx.col(k))));
    }
    double ht = rel_step * std::max(1.0, std::abs(t));
    VecS colt = (h.eval(x, t + ht) - h.eval(x, t - ht)) / S(2.0 * ht);
    err = std::max(err, norm_inf(VecS(colt - jt)));
    return err;
}

#define EQCONT_INSTANTIATE(S)                                                                                   \
    template class Homotopy<S>;                                                                                 \
    template JacobianDiagnostics<S> jacobian_diagnostics<S>(const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>&); \
    template JacobianDiagnostics<S> jacobian_diagnostics<S>(const Homotopy<S>&,                                 \
                                                            const Eigen::Matrix<S, Eigen::Dynamic, 1>&, double); \
    template bool newton_correct<S>(const Homotopy<S>&, Eigen::Matrix<S, Eigen::Dynamic, 1>&, double, double, int); \
    template PathResult<S> track<S>(const Homotopy<S>&, const Eigen::Matrix<S, Eigen::Dynamic, 1>&, double, double, \
                                    const TrackerConfig&);                                                      \
    template std::vector<PathResult<S>> track_all<S>(const Homotopy<S>&,                                        \
                                                     const std::vector<Eigen::Matrix<S, Eigen::Dynamic, 1>>&,   \
                                                     double, double, const TrackerConfig&);                     \
    template void write_trace_csv<S>(std::ostream&, const std::vector<PathResult<S>>&);                         \
    template double jacobian_fd_error<S>(const Homotopy<S>&, const Eigen::Matrix<S, Eigen::Dynamic, 1>&, double, double);

EQCONT_INSTANTIATE(double)
EQCONT_INSTANTIATE(cplx)

#undef EQCONT_INSTANTIATE

}  // namespace eqcont
