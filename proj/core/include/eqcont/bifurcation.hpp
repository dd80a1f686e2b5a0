#pragma once

#include <string>
#include <vector>

#include "eqcont/ad_homotopy.hpp"
#include "eqcont/polysys.hpp"
#include "eqcont/tracker.hpp"

namespace eqcont {

struct BifurcationConfig {
    // Alarm: σ_min <= alarm_tol·max(1, σ_max) at the initial point.
    double alarm_tol = 0.25;
    // Converged when |det|/Π(other singular values) <= det_tol.
    double det_tol = 1e-12;
    double kernel_sv_tol = 1e-8;
    double newton_tol = 1e-12;
    int max_iters = 50;
    // Admit a quadratic root when ‖dz_⊥‖ <= kernel_tol·‖dz‖.
    double kernel_tol = 0.1;
    double imag_tol = 1e-8;
    std::uint64_t seed = 7;
};

struct SingularPoint {
    Vec x;
    double t_star = 0;
    std::vector<Vec> kernel;  // orthonormal
    double det_value = 0;     // det J_x scaled by the product of the other singular values
    double log_abs_det = 0;
    double min_sv = 0;
    int iterations = 0;
};

// Joint Newton on [H(x,t); det J_x(x,t)/scale] = 0 in (x, t).
SingularPoint locate_singular(const SecondOrderHomotopy& h, const Vec& x_near, double t_near,
                              const BifurcationConfig& cfg = {});

// Second-order Taylor system in dz at (s.x, s.t_star) for the given dt.
PolySystem second_order_system(const SecondOrderHomotopy& h, const SingularPoint& s, double dt);

struct Branch {
    Vec dz;
    double kernel_residual = 0;  // ‖dz_⊥‖ / ‖dz‖
    bool admitted = false;
    bool validated = false;
    Vec landing;                 // Newton-corrected point at t_star + dt
};

struct BranchSet {
    double dt = 0;
    std::vector<Branch> branches;  // every real root of the quadratic system
    std::size_t admitted() const;
    std::vector<Branch> validated() const;
};

BranchSet enumerate_branches(const SecondOrderHomotopy& h, const SingularPoint& s, double dt,
                             const TrackerConfig& cfg, const BifurcationConfig& bc = {});

// Reduced scalar equation a s² + b s + c = 0 along a one-dimensional kernel.
// Returns false only for a clear fold (u·H_t ≠ 0) whose reduced equation has
// no real root for this dt, i.e. no branch can continue that way.
bool fold_may_branch(const SecondOrderHomotopy& h, const SingularPoint& s, double dt);

// Default branching step: 1e-3·(t_to − t_star).
inline double default_branch_dt(double t_star, double t_to) { return 1e-3 * (t_to - t_star); }

std::string branch_report_json(const SingularPoint& s, const BranchSet& b);

// Two-location family A = (1, A2), A2 from a2_lo (three equilibria) to a2_hi
// (one equilibrium), at exponent gamma and scope xi.
struct TangencyStudy {
    double gamma = 3.0;
    double xi = 1.0;
    double a2_lo = 1.0;
    double a2_hi = 2.0;
    int bisect_iters = 40;
};

struct TangencyReport {
    double a2_bisect = 0;   // count transition located by bisection on the count
    double a2_star = 0;     // from the located singular point
    std::size_t count_below = 0;
    std::size_t count_above = 0;
    SingularPoint singular;
    BranchSet branches;
    std::vector<Vec> continued;     // validated branches tracked back to a2_lo
    std::vector<Equilibrium> lo_set;  // total-degree equilibria at a2_lo
};

City tangency_city(const TangencyStudy& st, double a2);
TangencyReport tangency_family(const TangencyStudy& st, const TrackerConfig& cfg, const BifurcationConfig& bc = {});

}  // namespace eqcont
