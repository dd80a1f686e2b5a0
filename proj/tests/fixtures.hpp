#pragma once

// Shared test cities and small independent reference computations. The
// helpers here are written from the model primitives and do not call the
// library's residual code.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <eqcont/ad_homotopy.hpp>
#include <eqcont/model.hpp>
#include <eqcont/nested.hpp>

namespace fx {

using eqcont::City;
using eqcont::Mat;
using eqcont::Vec;

// J = 3 line city, gamma1 = 5/2, equal amenities, 80/20 group split of L = 3.
inline City fig2_city()
{
    City c = City::line(3, 2.5, 1.0);
    c.alpha = 0.3;
    c.gamma2 = 0.0;
    c.L1 = 2.4;
    c.L2 = 0.6;
    return c;
}

// Δ = e·ones: negative distance with unit scope. Only valid for the
// weight-level functions, City::validate rejects it.
inline City prop4_city(int J)
{
    City c = City::line(J, 2.0, 1.0);
    c.dist = Mat::Constant(J, J, -1.0);
    return c;
}

// max_j |x_j - w_j / Σw| with Ψ = Σ_k e^{-ξ d_jk} x_k and
// w_k = A_k q_k^{-α} Ψ_k^γ.
inline double composition_gap(const City& c, const Vec& x, const Vec& q)
{
    const int J = static_cast<int>(x.size());
    std::vector<double> w(J);
    double s = 0;
    for (int j = 0; j < J; ++j) {
        double psi = 0;
        for (int k = 0; k < J; ++k) psi += std::exp(-c.xi * c.dist(j, k)) * x[k];
        w[j] = c.A[j] * std::pow(q[j], -c.alpha) * std::pow(psi, c.gamma1);
        s += w[j];
    }
    double gap = 0;
    for (int j = 0; j < J; ++j) gap = std::max(gap, std::abs(x[j] - w[j] / s));
    return gap;
}

// Market clearing in levels: c_j (q_j/mc_j)^η q_j^α = q_j^α Σ_g L_g P^g_j.
inline double market_gap(const City& c, const Vec& x, const Vec& q)
{
    const int J = static_cast<int>(x.size());
    std::vector<double> w1(J), w2(J);
    double s1 = 0, s2 = 0;
    for (int j = 0; j < J; ++j) {
        double psi = 0;
        for (int k = 0; k < J; ++k) psi += std::exp(-c.xi * c.dist(j, k)) * x[k];
        double base = c.A[j] * std::pow(q[j], -c.alpha);
        w1[j] = base * std::pow(psi, c.gamma1);
        w2[j] = base * std::pow(psi, c.gamma2);
        s1 += w1[j];
        s2 += w2[j];
    }
    double gap = 0;
    for (int j = 0; j < J; ++j) {
        double eta = c.eta_at(j);
        double supply = c.c[j] * std::pow(q[j] / c.mc[j], eta) * std::pow(q[j], c.alpha);
        double demand = std::pow(q[j], c.alpha) * (c.L1 * w1[j] / s1 + c.L2 * w2[j] / s2);
        gap = std::max(gap, std::abs(supply - demand));
    }
    return gap;
}

inline double max_abs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// h(z, t) = z² - t, the fold normal form.
struct FoldNormalForm : eqcont::AdHomotopy<FoldNormalForm> {
    int dimension() const override { return 1; }
    template <class T>
    void residual(const T* z, const T& t, T* out) const
    {
        out[0] = z[0] * z[0] - t;
    }
};

// h(z, t) = z² - (1 + 3t): roots move from ±1 to ±2.
struct ScalarRootPath : eqcont::AdHomotopy<ScalarRootPath> {
    int dimension() const override { return 1; }
    template <class T>
    void residual(const T* z, const T& t, T* out) const
    {
        out[0] = z[0] * z[0] - (1.0 + 3.0 * t);
    }
};

// h(z, t) = z - t, linear in z.
struct LinearPath : eqcont::AdHomotopy<LinearPath> {
    int dimension() const override { return 1; }
    template <class T>
    void residual(const T* z, const T& t, T* out) const
    {
        out[0] = z[0] - t;
    }
};

inline eqcont::NestedParams nested_params()
{
    eqcont::NestedParams p;
    p.gamma_w = 2.0;
    p.gamma_b = 0.5;
    p.xi = 1.0;
    p.alpha = 0.3;
    p.Lw = 0.4;
    p.Lb = 1.6;
    return p;
}

// Two communities of two neighborhoods in one region.
inline eqcont::NestedCity four_hood_city()
{
    std::vector<eqcont::Neighborhood> h(4);
    const double xs[4] = {0, 1, 3, 4};
    const double A[4] = {1.0, 1.3, 0.9, 1.1};
    for (int j = 0; j < 4; ++j) {
        h[j].id = "n" + std::to_string(j);
        h[j].community = j / 2;
        h[j].region = 0;
        h[j].x = xs[j];
        h[j].A = A[j];
    }
    return eqcont::NestedCity(h, {"a", "b"}, {"r"}, nested_params());
}

// One region of eight communities (36 neighborhoods).
inline eqcont::NestedCity west_side_city(std::uint64_t seed = 1)
{
    return eqcont::synthetic_nested_city(36, 8, 1, seed, nested_params());
}

// Five-neighborhood community whose H_A menu has five entries.
inline eqcont::NestedCity humboldt_city()
{
    eqcont::NestedParams p = nested_params();
    p.gamma_w = 2.003;
    return eqcont::synthetic_nested_city(5, 1, 1, 14, p);
}

}  // namespace fx
