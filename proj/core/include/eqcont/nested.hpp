#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "eqcont/ad_homotopy.hpp"
#include "eqcont/homotopies.hpp"
#include "eqcont/model.hpp"
#include "eqcont/tracker.hpp"

namespace eqcont {

struct Neighborhood {
    std::string id;
    int community = 0;
    int region = 0;
    double x = 0, y = 0;  // centroid
    double A = 1.0;
    double mc = 1.0;
    double c = 1.0;
};

struct NestedParams {
    double theta = 1.0;
    double gamma_w = 2.0;
    double gamma_b = 0.0;
    double xi = 1.0;
    double alpha = 0.3;
    double Lw = 1.0;  // citywide group totals
    double Lb = 1.0;
};

// Neighborhoods nested in communities nested in regions.
class NestedCity {
public:
    NestedCity() = default;
    NestedCity(std::vector<Neighborhood> hoods, std::vector<std::string> community_ids,
               std::vector<std::string> region_ids, NestedParams params);

    int neighborhoods() const { return static_cast<int>(hoods_.size()); }
    int communities() const { return static_cast<int>(members_.size()); }
    int regions() const { return static_cast<int>(region_members_.size()); }

    const Neighborhood& hood(int j) const { return hoods_[j]; }
    const std::vector<int>& members(int i) const { return members_[i]; }
    const std::vector<int>& region_members(int r) const { return region_members_[r]; }
    int community_region(int i) const { return community_region_[i]; }
    const std::string& community_id(int i) const { return community_ids_[i]; }
    const std::string& region_id(int r) const { return region_ids_[r]; }
    const NestedParams& params() const { return params_; }
    void set_params(const NestedParams& p) { params_ = p; }

    // e^{-ξ d} between members of community i, and between communities of region r.
    Mat near_weights(int i) const;
    Mat far_weights(int r) const;
    // J_n x J_c design matrix with one 1 per row.
    Mat design() const;
    // Fixed group populations of region r: city totals times its share of neighborhoods.
    double region_population_w(int r) const;
    double region_population_b(int r) const;

    // Within-community city: A^θ, αθ, γ^w θ, same mc, c and distances.
    City community_city(int i) const;

    void validate() const;

private:
    std::vector<Neighborhood> hoods_;
    std::vector<std::string> community_ids_;
    std::vector<std::string> region_ids_;
    std::vector<std::vector<int>> members_;
    std::vector<std::vector<int>> region_members_;
    std::vector<int> community_region_;
    std::vector<double> region_share_;
    NestedParams params_;
};

// CSV with header neighborhood_id,community_id,region_id,centroid_x,centroid_y,log_amenity,mc,c.
NestedCity read_neighborhoods(std::istream& is, const NestedParams& params);
NestedCity ingest_neighborhoods(const std::string& path, const NestedParams& params);
void write_neighborhoods(std::ostream& os, const NestedCity& nc);

// Seeded synthetic city: regions on a grid, communities around region
// centres, neighborhoods around community centres, log A ~ N(0, sigma^2).
NestedCity synthetic_nested_city(int n_hoods, int n_communities, int n_regions, std::uint64_t seed,
                                 const NestedParams& params, double sigma = 0.5);

// Welfare [Σ_j (A_j q_j^{-α} Ψ_j^γ)^θ]^{1/θ} over the members of community i
// (Euler-Γ factor omitted). psi and q are indexed like members(i).
double community_welfare(const NestedCity& nc, int i, const Vec& psi, const Vec& q, double gamma);

// Within-community choice probabilities P_{j|i} for group exponent γ.
Vec within_probabilities(const NestedCity& nc, int i, const Vec& psi, const Vec& q, double gamma);

struct MenuEntry {
    Vec x;    // P^w_{j|i}
    Vec psi;  // near index
    double Uw = 0;
    double Ub = 0;
    double residual = 0;
};

using CommunityMenu = std::vector<MenuEntry>;

CommunityMenu community_equilibria(const NestedCity& nc, int i, const TrackerConfig& cfg,
                                   const AmenityOptions& opt = {});

// All communities, fanned out over threads.
std::vector<CommunityMenu> all_community_equilibria(const NestedCity& nc, const TrackerConfig& cfg,
                                                    const AmenityOptions& opt = {}, int threads = 1);

// Every selection (one menu index per community) when the product is within
// budget, otherwise `budget` distinct random selections from the seed.
std::vector<std::vector<int>> enumerate_selections(const std::vector<CommunityMenu>& menus, std::size_t budget,
                                                   std::uint64_t seed);

// Π of the menu sizes, exact (decimal string).
std::string combination_count(const std::vector<std::size_t>& sizes);
std::string combination_count(const std::vector<CommunityMenu>& menus);

struct RegionEquilibrium {
    int region = 0;
    Vec psi_c;    // far index, indexed like region_members(r)
    Vec share_w;  // community choice probabilities P^w_i
    Vec share_b;
    EqStatus status = EqStatus::proper;
    double residual = 0;
};

// Community-level fixed point of region r given one welfare pair per community.
std::vector<RegionEquilibrium> region_fixed_point(const NestedCity& nc, int r, const Vec& Uw, const Vec& Ub,
                                                  const TrackerConfig& cfg, const AmenityOptions& opt = {});

// P^g_i ∝ Ψ_i^{γθ} U_i^θ over the communities of region r.
Vec community_probabilities(const NestedCity& nc, int r, const Vec& psi_c, const Vec& U, double gamma);

struct CitywideState {
    Vec Lw, Lb;    // per community
    Vec Uw, Ub;    // per community
    Vec psi_c;     // per community
    Vec psi_n;     // per neighborhood
    Vec q_n;       // per neighborhood
    double zeta = 0;
};

// State at ζ = 0 from one menu entry per community and one region equilibrium per region.
CitywideState assemble_state(const NestedCity& nc, const std::vector<MenuEntry>& selection,
                             const std::vector<RegionEquilibrium>& regions);

struct CitywideResiduals {
    double f_c = 0;
    double f_n = 0;
    double m_n = 0;
    double population = 0;  // relative, max over groups
};

CitywideResiduals citywide_residuals(const NestedCity& nc, const CitywideState& s);

// Extended state (log q_n, Ψ_n, Ψ_c, L^w, L^b, U^w, U^b) with ζ = t·ζ_to.
class CitywideH : public AdHomotopy<CitywideH> {
public:
    CitywideH(const NestedCity& nc, double zeta_to);
    int dimension() const override { return 2 * jn_ + 5 * jc_; }

    template <class T>
    void residual(const T* y, const T& t, T* out) const;

    // q_n-only ODE (1 - Φ) dq/dt = B with the other blocks reconstructed.
    bool tangent(const Vec& y, double t, Vec& dy) const override;

    struct Reduced {
        Mat phi;
        Vec B;
        double min_eig = 0;  // smallest real part of eig(1 - Φ)
        double log_abs_det = 0;
    };
    bool reduced(const Vec& y, double t, Reduced& out, Vec* dy = nullptr) const;

    Vec pack(const CitywideState& s) const;
    CitywideState unpack(const Vec& y, double t) const;

private:
    const NestedCity* nc_;
    int jn_, jc_;
    double zeta_to_;
    std::vector<Mat> near_;
    std::vector<Mat> far_;
    Vec lw_region_, lb_region_;
    Vec log_a_, log_mc_, log_c_;
};

struct CitywideTracePoint {
    double zeta = 0;
    double min_eig = 0;
    double log_abs_det = 0;
    double q_norm = 0;
    double residual = 0;    // max of f_c, f_n, m_n
    double population = 0;  // relative conservation error
    Vec Lw, Lb;
};

struct CitywideResult {
    PathResult<double> path;
    CitywideState final_state;
    CitywideResiduals residuals;
    std::vector<CitywideTracePoint> trace;
    double min_eig_seen = 0;
    double max_step_residual = 0;
    double max_step_population = 0;
};

CitywideResult citywide_elasticity_homotopy(const NestedCity& nc, const CitywideState& state0, double zeta_to,
                                            const TrackerConfig& cfg);

// zeta,min_eig,log_abs_det,q_norm,residual,Lw_*,Lb_*
void write_citywide_trace(std::ostream& os, const CitywideResult& r);

// ---- template definitions ----

template <class T>
void CitywideH::residual(const T* y, const T& t, T* out) const
{
    using std::exp;
    using std::log;
    const NestedParams& p = nc_->params();
    const int jn = jn_, jc = jc_;
    const T* lq = y;
    const T* psin = y + jn;
    const T* psic = y + 2 * jn;
    const T* Lw = y + 2 * jn + jc;
    const T* Lb = y + 2 * jn + 2 * jc;
    const T* Uw = y + 2 * jn + 3 * jc;
    const T* Ub = y + 2 * jn + 4 * jc;
    T* m_n = out;
    T* f_n = out + jn;
    T* f_c = out + 2 * jn;
    T* eLw = out + 2 * jn + jc;
    T* eLb = out + 2 * jn + 2 * jc;
    T* eUw = out + 2 * jn + 3 * jc;
    T* eUb = out + 2 * jn + 4 * jc;
    const T zeta = t * zeta_to_;

    std::vector<T> pw(jn), pb(jn);
    for (int i = 0; i < jc; ++i) {
        const auto& mem = nc_->members(i);
        const int ni = static_cast<int>(mem.size());
        std::vector<T> ww(ni), wb(ni);
        T sw = T(0.0), sb = T(0.0);
        for (int a = 0; a < ni; ++a) {
            int j = mem[a];
            T base = log_a_[j] - p.alpha * lq[j];
            T lpsi = log(psin[j]);
            ww[a] = exp(p.theta * (base + p.gamma_w * lpsi));
            wb[a] = exp(p.theta * (base + p.gamma_b * lpsi));
            sw += ww[a];
            sb += wb[a];
        }
        for (int a = 0; a < ni; ++a) {
            pw[mem[a]] = ww[a] / sw;
            pb[mem[a]] = wb[a] / sb;
        }
        for (int a = 0; a < ni; ++a) {
            T r = psin[mem[a]];
            for (int b = 0; b < ni; ++b) r -= near_[i](a, b) * pw[mem[b]];
            f_n[mem[a]] = r;
        }
        eUw[i] = Uw[i] - exp(log(sw) / p.theta);
        eUb[i] = Ub[i] - exp(log(sb) / p.theta);
    }
    for (int r = 0; r < nc_->regions(); ++r) {
        const auto& cm = nc_->region_members(r);
        const int nr = static_cast<int>(cm.size());
        std::vector<T> vw(nr), vb(nr);
        T tw = T(0.0), tb = T(0.0);
        for (int a = 0; a < nr; ++a) {
            int i = cm[a];
            T lpc = log(psic[i]);
            vw[a] = exp(p.theta * (p.gamma_w * lpc + log(Uw[i])));
            vb[a] = exp(p.theta * (p.gamma_b * lpc + log(Ub[i])));
            tw += vw[a];
            tb += vb[a];
        }
        for (int a = 0; a < nr; ++a) {
            int i = cm[a];
            T r0 = psic[i];
            for (int b = 0; b < nr; ++b) r0 -= far_[r](a, b) * vw[b] / tw;
            f_c[i] = r0;
            eLw[i] = Lw[i] - lw_region_[r] * vw[a] / tw;
            eLb[i] = Lb[i] - lb_region_[r] * vb[a] / tb;
        }
    }
    for (int i = 0; i < jc; ++i) {
        for (int j : nc_->members(i)) {
            T demand = Lw[i] * pw[j] + Lb[i] * pb[j];
            m_n[j] = lq[j] - log_mc_[j] - zeta * (log(demand) - log_c_[j]);
        }
    }
}

}  // namespace eqcont
