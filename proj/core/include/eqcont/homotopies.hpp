#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eqcont/ad_homotopy.hpp"
#include "eqcont/model.hpp"
#include "eqcont/polysys.hpp"
#include "eqcont/tracker.hpp"

namespace eqcont {

// H(z, t) = γ t G(z) + (1 - t) P(z), tracked t: 1 -> 0.
class TotalDegreeH : public ComplexHomotopy {
public:
    TotalDegreeH(PolySystem target, PolySystem start, cplx gamma);

    int dimension() const override { return target_.nvars(); }
    CVec eval(const CVec& z, double t) const override;
    CMat jac_x(const CVec& z, double t) const override;
    CVec jac_t(const CVec& z, double t) const override;
    void eval_all(const CVec& z, double t, CVec* f, CMat* jx, CVec* jt) const override;

    const PolySystem& target() const { return target_; }
    const PolySystem& start() const { return start_; }
    cplx gamma() const { return gamma_; }

private:
    PolySystem target_;
    PolySystem start_;
    cplx gamma_;
};

// γ-trick constant e^{iφ}, φ uniform on [0, 2π) from the seed.
cplx gamma_trick(std::uint64_t seed);

// Coefficients of the static model at one end of a parameter path.
struct StaticParams {
    Vec A;
    Vec mc;
    Mat delta;
    double alpha = 0.3;

    static StaticParams of(const City& city);
    static StaticParams isolated(int J, double alpha);
    static StaticParams homogeneous(int J, double alpha, double level);
};

// Static system in z with coefficients linear in t between two parameter sets.
class StaticPathZH : public AdHomotopy<StaticPathZH> {
public:
    StaticPathZH(StaticParams from, StaticParams to, int p, int q);
    int dimension() const override { return static_cast<int>(from_.A.size()); }

    template <class T>
    void residual(const T* z, const T& t, T* out) const;

private:
    StaticParams from_, to_;
    int p_, q_;
};

// Same parameter path in composition space: F(x,t) = x - w(Δ(t)x)/Σw with
// w_k = a_k(t) sign(Ψ_k)|Ψ_k|^γ and the exact γ.
class StaticPathXH : public AdHomotopy<StaticPathXH> {
public:
    StaticPathXH(StaticParams from, StaticParams to, double gamma);
    int dimension() const override { return static_cast<int>(from_.A.size()); }

    template <class T>
    void residual(const T* x, const T& t, T* out) const;

private:
    StaticParams from_, to_;
    double gamma_;
};

struct SolveStats {
    std::size_t paths = 0;
    std::size_t converged = 0;
    std::size_t diverged = 0;
    std::size_t singular = 0;
    std::size_t step_failure = 0;
    std::size_t bad_start = 0;
    std::size_t complex_endpoints = 0;
    std::size_t real_endpoints = 0;
    std::size_t branch_points = 0;
    std::size_t branches_followed = 0;
    double seconds = 0;
};

struct SolveReport {
    std::vector<Equilibrium> equilibria;  // proper and improper, sorted
    SolveStats stats;
    std::string method;
    std::uint64_t seed = 0;
    cplx gamma{1.0, 0.0};
    Rational rat;
    bool complete = false;  // Theorem-1 guarantee applies

    std::size_t count(EqStatus s) const;
    std::vector<Equilibrium> proper() const;
};

struct SolveOptions {
    std::uint64_t seed = 1;
    double path_cap = kDefaultPathCap;
    double dedup_tol = 1e-6;
    ClassifyTol classify;
    bool keep_paths = false;
};

SolveReport solve_total_degree(const City& city, const Rational& rat, const TrackerConfig& cfg,
                               const SolveOptions& opt = {}, std::vector<PathResult<cplx>>* paths = nullptr);

struct AmenityOptions : SolveOptions {
    enum class Start { isolated, homogeneous };
    Start start = Start::isolated;
    double level = 2.718281828459045;
    // Continue through singular points with the bifurcation module.
    bool branch_on_singular = true;
    int max_branch_depth = 3;
};

SolveReport solve_amenity_homotopy(const City& city, const Rational& rat, const TrackerConfig& cfg,
                                   const AmenityOptions& opt = {});

// Starts of the isolated-locations city: x uniform on each nonempty support.
std::vector<Vec> isolated_starts(int J, double gamma);

// State (log z, log q) of length 2J, parameter t in [0,1] with ζ_j(t) = t ζ_j.
class ElasticityH : public AdHomotopy<ElasticityH> {
public:
    ElasticityH(const City& city, int q, Vec zeta_to);
    int dimension() const override { return 2 * J_; }

    template <class T>
    void residual(const T* y, const T& t, T* out) const;

    // Blockwise Davidenko solve through the Schur complement.
    bool tangent(const Vec& y, double t, Vec& dy) const override;

    struct Certificates {
        double min_sv_price_block = 0;  // σ_min(I - ∂Q/∂log q)
        double min_sv_schur = 0;        // σ_min of the Schur complement
    };
    Certificates certificates(const Vec& y, double t) const;

    Vec state_from(const Vec& psi, const Vec& qprice) const;
    void unpack(const Vec& y, Vec& psi, Vec& qprice) const;

private:
    void blocks(const Vec& y, double t, Mat& a11, Mat& a12, Mat& a21, Mat& a22, Vec& b1, Vec& b2) const;

    City city_;
    Mat delta_;
    int J_;
    int q_;
    Vec zeta_to_;
};

struct ElasticityResult {
    PathResult<double> path;
    Equilibrium equilibrium;
    double zeta_to = 0;
    double min_sv_price_block = 0;
    double min_sv_schur = 0;
};

// eq0 must have Ψ > 0; throws DomainError otherwise (callers count skips).
ElasticityResult solve_elasticity_homotopy(const City& city, const Equilibrium& eq0, const TrackerConfig& cfg,
                                           const ClassifyTol& tol = {});

struct MaclaurinSolveOptions : SolveOptions {
    MaclaurinOptions model;
};

SolveReport solve_maclaurin(const City& city, int n, const TrackerConfig& cfg, const MaclaurinSolveOptions& opt = {},
                            std::vector<PathResult<cplx>>* paths = nullptr);

// ---- template definitions ----

template <class T>
void StaticPathZH::residual(const T* z, const T& t, T* out) const
{
    const int n = dimension();
    const T one_t = T(1.0) - t;
    std::vector<T> a(n), zp(n);
    using std::pow;
    for (int k = 0; k < n; ++k) {
        T A = one_t * from_.A[k] + t * to_.A[k];
        T mc = one_t * from_.mc[k] + t * to_.mc[k];
        a[k] = A * pow(mc, -from_.alpha);
        zp[k] = a[k] * pow(z[k], p_);
    }
    T s = T(0.0);
    for (int k = 0; k < n; ++k) s += zp[k];
    for (int j = 0; j < n; ++j) {
        T r = s * pow(z[j], q_);
        for (int k = 0; k < n; ++k) r -= (one_t * from_.delta(j, k) + t * to_.delta(j, k)) * zp[k];
        out[j] = r;
    }
}

template <class T>
void StaticPathXH::residual(const T* x, const T& t, T* out) const
{
    const int n = dimension();
    const T one_t = T(1.0) - t;
    std::vector<T> w(n);
    using std::pow;
    T s = T(0.0);
    for (int k = 0; k < n; ++k) {
        T psi = T(0.0);
        for (int l = 0; l < n; ++l) psi += (one_t * from_.delta(k, l) + t * to_.delta(k, l)) * x[l];
        T A = one_t * from_.A[k] + t * to_.A[k];
        T mc = one_t * from_.mc[k] + t * to_.mc[k];
        w[k] = A * pow(mc, -from_.alpha) * spow(psi, gamma_);
        s += w[k];
    }
    for (int j = 0; j < n; ++j) out[j] = x[j] - w[j] / s;
}

template <class T>
void ElasticityH::residual(const T* y, const T& t, T* out) const
{
    using std::exp;
    using std::log;
    using std::pow;
    const int n = J_;
    const double qd = static_cast<double>(q_);
    std::vector<T> psi(n), g1(n), g2(n), price(n);
    T s1 = T(0.0), s2 = T(0.0);
    for (int k = 0; k < n; ++k) {
        psi[k] = exp(qd * y[k]);
        price[k] = exp(y[n + k]);
        T base = city_.A[k] * exp(-city_.alpha * y[n + k]);
        g1[k] = base * exp(city_.gamma1 * qd * y[k]);
        g2[k] = base * exp(city_.gamma2 * qd * y[k]);
        s1 += g1[k];
        s2 += g2[k];
    }
    for (int j = 0; j < n; ++j) {
        T r = psi[j];
        for (int k = 0; k < n; ++k) r -= delta_(j, k) * g1[k] / s1;
        out[j] = r;
    }
    for (int j = 0; j < n; ++j) {
        // A_j Ψ_j^γ / S = g_j q_j^α / S
        T qa = exp(city_.alpha * y[n + j]);
        T demand = (city_.L1 * g1[j] * qa / s1 + city_.L2 * g2[j] * qa / s2) / city_.c[j];
        T zeta = t * zeta_to_[j];
        T denom = city_.alpha * zeta + 1.0;
        T qj = (log(T(city_.mc[j])) + zeta * log(demand)) / denom;
        out[n + j] = qj - y[n + j];
    }
}

}  // namespace eqcont
