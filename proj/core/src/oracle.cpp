#include "eqcont/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <thread>

#include "eqcont/errors.hpp"

namespace eqcont {

namespace {

constexpr double kPriceGrid[] = {0.5, 1.0, 2.0};

// Unknowns: x (J) and, when elastic, log q (J).
class OracleSystem {
public:
    explicit OracleSystem(const City& city) : city_(city), J_(city.J()), elastic_(city.elastic())
    {
        delta_ = (-city.xi * city.dist).unaryExpr([](double v) { return std::exp(v); });
    }

    int size() const { return elastic_ ? 2 * J_ : J_; }

    Vec price(const Vec& u) const { return elastic_ ? Vec(u.tail(J_).array().exp().matrix()) : city_.mc; }

    bool eval(const Vec& u, Vec& f) const
    {
        Vec x = u.head(J_);
        Vec q = price(u);
        Vec psi = delta_ * x;
        if ((psi.array() <= 0).any()) return false;
        Vec g1(J_), g2(J_);
        for (int k = 0; k < J_; ++k) {
            double base = city_.A[k] * std::pow(q[k], -city_.alpha);
            g1[k] = base * std::pow(psi[k], city_.gamma1);
            g2[k] = base * std::pow(psi[k], city_.gamma2);
        }
        double s1 = g1.sum(), s2 = g2.sum();
        f.resize(size());
        f.head(J_) = x - g1 / s1;
        if (elastic_) {
            for (int k = 0; k < J_; ++k) {
                double eta = city_.eta_at(k);
                double supply = city_.c[k] * std::pow(q[k] / city_.mc[k], eta) * std::pow(q[k], city_.alpha);
                double demand = std::pow(q[k], city_.alpha) * (city_.L1 * g1[k] / s1 + city_.L2 * g2[k] / s2);
                f[J_ + k] = std::log(supply) - std::log(demand);
            }
        }
        return f.allFinite();
    }

    bool jacobian(const Vec& u, Mat& jac) const
    {
        const int n = size();
        jac.resize(n, n);
        Vec fp, fm;
        for (int k = 0; k < n; ++k) {
            double h = 1e-7 * std::max(1.0, std::abs(u[k]));
            Vec up = u, um = u;
            up[k] += h;
            um[k] -= h;
            if (!eval(up, fp) || !eval(um, fm)) return false;
            jac.col(k) = (fp - fm) / (2 * h);
        }
        return true;
    }

    // Damped Newton; returns the point when ‖f‖∞ <= tol.
    std::optional<Vec> solve(Vec u, double tol, int max_iters) const
    {
        Vec f;
        if (!eval(u, f)) return std::nullopt;
        double nf = f.cwiseAbs().maxCoeff();
        for (int it = 0; it < max_iters && nf > tol; ++it) {
            Mat jac;
            if (!jacobian(u, jac)) return std::nullopt;
            Vec step = jac.fullPivLu().solve(-f);
            if (!step.allFinite()) return std::nullopt;
            double lam = 1.0;
            bool moved = false;
            for (int b = 0; b < 30; ++b, lam *= 0.5) {
                Vec trial = u + lam * step;
                Vec ft;
                if (eval(trial, ft)) {
                    double nt = ft.cwiseAbs().maxCoeff();
                    if (nt < nf || nt <= tol) {
                        u = trial;
                        f = ft;
                        nf = nt;
                        moved = true;
                        break;
                    }
                }
            }
            if (!moved) return std::nullopt;
        }
        if (!(nf <= tol)) return std::nullopt;
        // A few extra full steps while they still reduce the residual.
        for (int extra = 0; extra < 3 && nf > 0; ++extra) {
            Mat jac;
            if (!jacobian(u, jac)) break;
            Vec trial = u + jac.fullPivLu().solve(-f);
            Vec ft;
            if (!eval(trial, ft) || !(ft.cwiseAbs().maxCoeff() < nf)) break;
            u = trial;
            f = ft;
            nf = ft.cwiseAbs().maxCoeff();
        }
        return u;
    }

private:
    const City& city_;
    int J_;
    bool elastic_;
    Mat delta_;
};

void simplex_nodes(int J, int res, std::vector<int>& cur, std::vector<Vec>& out)
{
    const int used = static_cast<int>(cur.size());
    int left = res;
    for (int v : cur) left -= v;
    if (used == J - 1) {
        Vec x(J);
        for (int k = 0; k < J - 1; ++k) x[k] = static_cast<double>(cur[k]) / res;
        x[J - 1] = static_cast<double>(left) / res;
        out.push_back(x);
        return;
    }
    for (int v = 0; v <= left; ++v) {
        cur.push_back(v);
        simplex_nodes(J, res, cur, out);
        cur.pop_back();
    }
}

std::vector<Vec> seeds(const City& city, const GridSpec& gs)
{
    const int J = city.J();
    std::vector<Vec> nodes;
    std::vector<int> cur;
    simplex_nodes(J, gs.resolution, cur, nodes);
    // Pull vertices and edges slightly inside so corner equilibria are reachable.
    for (Vec& x : nodes) {
        x = (x.array() + gs.corner_offset).matrix();
        x /= x.sum();
    }
    if (!city.elastic()) return nodes;
    std::vector<Vec> out;
    for (const Vec& x : nodes) {
        for (double m : kPriceGrid) {
            Vec u(2 * J);
            u << x, (city.mc.array() * m).log().matrix();
            out.push_back(u);
        }
    }
    return out;
}

}  // namespace

std::size_t oracle_seed_count(const City& city, const GridSpec& gs)
{
    // C(res + J - 1, J - 1) nodes.
    const int J = city.J();
    double n = 1;
    for (int k = 1; k < J; ++k) n = n * (gs.resolution + k) / k;
    if (city.elastic()) n *= std::size(kPriceGrid);
    return static_cast<std::size_t>(std::llround(n));
}

std::vector<Equilibrium> brute_force_equilibria(const City& city, const GridSpec& gs)
{
    city.validate();
    if (gs.resolution < 16) throw DomainError("oracle grid resolution must be at least 16");
    const int J = city.J();
    if (J > gs.max_dim) throw DomainError("oracle full-grid mode is limited to small J");
    OracleSystem sys(city);
    std::vector<Vec> starts = seeds(city, gs);
    std::vector<std::optional<Vec>> found(starts.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < starts.size(); i = next++)
            found[i] = sys.solve(starts[i], gs.polish_tol, gs.max_iters);
    };
    const int nt = std::max(1, gs.threads);
    std::vector<std::thread> pool;
    for (int k = 1; k < nt; ++k) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();

    std::vector<Equilibrium> eqs;
    const Mat delta = weights(city);
    for (const auto& u : found) {
        if (!u) continue;
        Vec x = u->head(J);
        Equilibrium e = classify(city, Vec(delta * x), sys.price(*u), gs.classify);
        if (e.status == EqStatus::proper) eqs.push_back(std::move(e));
    }
    eqs = unique_by_x(std::move(eqs), gs.dedup_tol);
    sort_by_x(eqs);
    return eqs;
}

}  // namespace eqcont
