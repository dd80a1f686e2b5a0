#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eqcont/homotopies.hpp"
#include "eqcont/io.hpp"

namespace eqcont {

// Cartesian grid over the city parameters, with replicates per grid point.
struct SweepSpec {
    std::vector<int> J{3};
    std::vector<double> gamma1{2.0};
    std::vector<double> gamma2{0.0};
    std::vector<double> xi{1.0};
    std::vector<double> sigma{0.5};
    std::vector<double> eta;  // finite elasticities evaluated by H_η
    int replicates = 1;
    std::uint64_t seed = 1;
    double alpha = 0.3;

    void validate() const;
};

// Keys under "sweep.": J, gamma1, gamma2, xi, sigma, eta (lists), replicates, seed, alpha.
SweepSpec sweep_from_config(const Config& cfg);

struct SweepCell {
    int id = 0;
    int J = 0;
    double gamma1 = 0, gamma2 = 0, xi = 0, sigma = 0;
    int replicate = 0;
    std::uint64_t seed = 0;  // amenity draw
};

std::vector<SweepCell> sweep_cells(const SweepSpec& spec);
City sweep_city(const SweepCell& cell, double alpha);

struct SweepRow {
    SweepCell cell;
    std::size_t count_inf = 0;
    std::vector<std::size_t> count_eta;  // aligned with spec.eta
    std::size_t paths = 0;
    std::size_t singular = 0;
    double seconds = 0;
    std::vector<Equilibrium> equilibria;  // at eta = inf
};

SweepRow run_sweep_cell(const SweepCell& cell, const SweepSpec& spec, const TrackerConfig& cfg);

struct GammaSummary {
    double gamma1 = 0;
    std::size_t cells = 0;
    double mean_inf = 0;
    std::vector<double> mean_eta;
};

std::vector<GammaSummary> summarize_by_gamma(const std::vector<SweepRow>& rows, const SweepSpec& spec);

// Runs every cell, writing out_dir/summary.csv (one row per cell, flushed as
// cells finish), out_dir/cells/<id>/{equilibria.csv,manifest.json} and
// out_dir/gamma_summary.csv. With resume, cells already in summary.csv are
// read back instead of recomputed.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const TrackerConfig& cfg, const std::string& out_dir,
                                bool resume = true);

}  // namespace eqcont
