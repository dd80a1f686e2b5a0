#pragma once

#include <vector>

#include "eqcont/model.hpp"

namespace eqcont {

struct GridSpec {
    int resolution = 64;       // simplex nodes k/resolution, >= 16
    double corner_offset = 1e-3;
    double polish_tol = 1e-12;
    double dedup_tol = 1e-6;
    int max_iters = 100;
    int max_dim = 3;           // full-grid mode only up to this J
    int threads = 1;
    ClassifyTol classify;
};

// Newton from every simplex grid node (times a price grid when eta < inf)
// with a finite-difference Jacobian; returns the distinct proper equilibria,
// sorted by x.
std::vector<Equilibrium> brute_force_equilibria(const City& city, const GridSpec& gs = {});

// Number of Newton seeds brute_force_equilibria would use.
std::size_t oracle_seed_count(const City& city, const GridSpec& gs = {});

}  // namespace eqcont
