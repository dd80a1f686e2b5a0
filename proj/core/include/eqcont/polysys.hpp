#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "eqcont/model.hpp"

namespace eqcont {

using cplx = std::complex<double>;

struct Rational {
    long long p = 0;
    long long q = 1;
    double value() const { return static_cast<double>(p) / static_cast<double>(q); }
    friend bool operator==(const Rational&, const Rational&) = default;
};

// Smallest-denominator continued-fraction convergent with |gamma - p/q| < eps.
Rational rational_approx(double gamma, double eps = 1e-9, long long max_den = 12);

struct Term {
    cplx coeff;
    std::vector<int> exps;
};

struct PolyMeta {
    long long p = 0;
    long long q = 1;
    std::string source;
    std::map<std::string, std::string> bindings;
};

class PolySystem {
public:
    PolySystem() = default;
    PolySystem(int nvars, int neqs) : nvars_(nvars), equations_(neqs), slot_(neqs) { compiled_.start.push_back(0); }

    int nvars() const { return nvars_; }
    int neqs() const { return static_cast<int>(equations_.size()); }
    const std::vector<Term>& equation(int j) const { return equations_[j]; }
    const std::vector<std::vector<Term>>& equations() const { return equations_; }

    // Appends a term; like monomials within an equation are merged in place.
    void add_term(int eq, cplx coeff, std::vector<int> exps);

    std::vector<int> degrees() const;
    int max_degree() const;

    CVec eval(const CVec& z) const;
    void eval_jac(const CVec& z, CVec& f, CMat& jac) const;

    PolyMeta meta;

private:
    struct Factor {
        int var;
        int exp;
    };
    struct Compiled {
        std::vector<int> eq;
        std::vector<cplx> coeff;
        std::vector<int> start;  // offsets into factors, size terms+1
        std::vector<Factor> factors;
        int maxdeg = 0;
    };

    int nvars_ = 0;
    std::vector<std::vector<Term>> equations_;
    std::vector<std::vector<int>> slot_;  // compiled index of each term
    Compiled compiled_;
};

// Text format: '#' metadata lines, then one line per term
// "eqIndex reCoeff imCoeff e1 ... eJ" with hex-float coefficients.
void write_polysystem(std::ostream& os, const PolySystem& sys);
PolySystem read_polysystem(std::istream& is);

struct StartSet {
    enum class Kind { unit_circle, homogeneous_city };
    std::vector<CVec> points;
    Kind kind = Kind::unit_circle;
};

PolySystem build_static_system(const City& city, const Rational& rat);

inline constexpr double kDefaultPathCap = 1e7;

// Start system z_j^{d_j} - 1 and its full root grid.
std::pair<PolySystem, StartSet> start_total_degree(const std::vector<int>& degrees, double cap = kDefaultPathCap);
double bezout_count(const std::vector<int>& degrees);

// Homogeneous city (A = 1, mc = 1, Δ = level * ones); roots z_j^q = level
// with sign patterns, each verified against the system's residual.
std::pair<PolySystem, StartSet> start_homogeneous(const City& city, const Rational& rat, double level = 2.718281828459045);

struct MaclaurinOptions {
    Vec surface;              // s_k, defaults to ones
    double population = -1;   // N^1, defaults to city.L1 when negative
};

// Truncated-exponential logit system in Ψ. City amenities hold the folded
// utility level A_j - α q_j.
PolySystem build_maclaurin_system(const City& city, int n, const MaclaurinOptions& opt = {});
// Exact logit counterpart of the MacLaurin system, normalized by Σ exp(.).
Vec logit_residual(const City& city, const Vec& psi, const MaclaurinOptions& opt = {});
// MacLaurin residual divided by Σ_ℓ e_n(A_ℓ + γΨ_ℓ).
Vec maclaurin_residual(const City& city, int n, const Vec& psi, const MaclaurinOptions& opt = {});

}  // namespace eqcont
