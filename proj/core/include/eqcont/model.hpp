#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace eqcont {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Static city of the core model. Group 1 shapes the social index; group 2
// only enters housing demand.
struct City {
    Vec A;       // amenities
    Mat dist;    // symmetric, zero diagonal
    Vec c;       // supply constants
    Vec mc;      // marginal costs
    double L1 = 1.0;
    double L2 = 0.0;
    double xi = 1.0;
    double eta = kInf;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double alpha = 0.3;
    double theta = 1.0;
    // Optional per-location supply elasticities; all finite when present.
    Vec eta_local;

    int J() const { return static_cast<int>(A.size()); }
    bool elastic() const { return eta < kInf || eta_local.size() > 0; }
    double eta_at(int j) const { return eta_local.size() ? eta_local[j] : eta; }

    // Throws DomainError on invalid parameters.
    void validate() const;
    // Non-fatal findings (diagonal dominance of the weights).
    std::vector<std::string> warnings() const;

    // J locations on a line, d_jk = |j-k|, unit costs.
    static City line(int J, double gamma1, double xi);
    // Line city with log A ~ N(0, sigma^2) drawn from the seed.
    static City random_line(int J, double gamma1, double gamma2, double xi, double sigma, std::uint64_t seed);
};

Mat weights(const City& city);
bool diagonally_dominant(const Mat& delta);

Vec psi_from_x(const City& city, const Vec& x);
// LU solve; SingularWeights when cond(Δ) > 1e14.
Vec x_from_psi(const City& city, const Vec& psi);
Vec solve_weights(const Mat& delta, const Vec& rhs);

Vec social_residual(const City& city, const Vec& psi, const Vec& qprice);
Vec market_residual(const City& city, const Vec& psi, const Vec& qprice);

struct ResidualReport {
    Vec social;
    Vec market;  // empty when eta is infinite
    double max_norm() const;
};
ResidualReport residual_report(const City& city, const Vec& psi, const Vec& qprice);

enum class EqStatus { proper, improper, complex, divergent, singular_endpoint };
std::string_view to_string(EqStatus s);

struct Equilibrium {
    Vec psi;
    Vec x;
    Vec qprice;
    EqStatus status = EqStatus::singular_endpoint;
    double residual = kInf;
};

struct ClassifyTol {
    double tol_resid = 1e-10;
    double tol_box = 1e-6;
    double diverge_cap = 1e10;
};

// Classification from (Ψ, q). Negative Ψ components use the signed power
// sign(Ψ)|Ψ|^γ so improper points keep a real residual.
Equilibrium classify(const City& city, const CVec& psi, const Vec& qprice, const ClassifyTol& tol = {});
Equilibrium classify(const City& city, const Vec& psi, const Vec& qprice, const ClassifyTol& tol = {});

// Classification of a root z of the static polynomial system with γ ≈ p/q:
// Ψ = z^q and choice weights A mc^{-α} z^p, which keeps the sign branch of z.
Equilibrium classify_root(const City& city, int p, int q, const CVec& z, const ClassifyTol& tol = {});

bool in_box(const Vec& x, double tol_box);

// Lexicographic order on x, used for deterministic output.
void sort_by_x(std::vector<Equilibrium>& eqs);
// Drop equilibria whose x lies within tol (max-norm) of an earlier one.
std::vector<Equilibrium> unique_by_x(std::vector<Equilibrium> eqs, double tol);

}  // namespace eqcont
