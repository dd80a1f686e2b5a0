#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <eqcont/errors.hpp>
#include <eqcont/sweep.hpp>

using namespace eqcont;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> lines_of(const fs::path& p)
{
    std::ifstream in(p);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

// Row without the trailing seconds column.
std::string without_seconds(const std::string& row) { return row.substr(0, row.rfind(',')); }

SweepSpec small_spec()
{
    SweepSpec s;
    s.J = {2, 3};
    s.gamma1 = {2.0, 3.0};
    s.eta = {2.0};
    s.replicates = 2;
    s.seed = 77;
    return s;
}

}  // namespace

TEST_SUITE("sweep")
{
    TEST_CASE("cells cover the grid with distinct seeds")
    {
        SweepSpec s = small_spec();
        auto cells = sweep_cells(s);
        CHECK(cells.size() == 8);
        std::set<std::uint64_t> seeds;
        for (const auto& c : cells) seeds.insert(c.seed);
        CHECK(seeds.size() == 8);
        auto again = sweep_cells(s);
        for (std::size_t k = 0; k < cells.size(); ++k) CHECK(cells[k].seed == again[k].seed);
        s.seed = 78;
        CHECK(sweep_cells(s)[0].seed != cells[0].seed);
    }

    TEST_CASE("spec validation")
    {
        SweepSpec s;
        s.replicates = 0;
        CHECK_THROWS_AS(s.validate(), ConfigError);
        s = SweepSpec{};
        s.gamma1.clear();
        CHECK_THROWS_AS(s.validate(), ConfigError);
        CHECK_THROWS_AS(sweep_from_config(Config::parse_string("[sweep]\nJ = 2.5\n")), ConfigError);
        SweepSpec f = sweep_from_config(Config::parse_string("[sweep]\nJ = 3, 4\neta = 0.67\nreplicates = 5\n"));
        CHECK(f.J == std::vector<int>{3, 4});
        CHECK(f.replicates == 5);
    }

    TEST_CASE("one cell equals a direct solve")
    {
        SweepSpec s;
        s.J = {3};
        s.gamma1 = {2.5};
        auto cells = sweep_cells(s);
        REQUIRE(cells.size() == 1);
        SweepRow row = run_sweep_cell(cells[0], s, TrackerConfig{});
        City c = sweep_city(cells[0], s.alpha);
        auto direct = solve_amenity_homotopy(c, rational_approx(2.5), TrackerConfig{}).proper();
        REQUIRE(row.equilibria.size() == direct.size());
        CHECK(row.count_inf == direct.size());
        for (std::size_t k = 0; k < direct.size(); ++k)
            CHECK((row.equilibria[k].x.array() == direct[k].x.array()).all());
    }

    TEST_CASE("run, interrupt and resume")
    {
        fs::path dir = fs::temp_directory_path() / "eqcont_test_sweep";
        fs::remove_all(dir);
        SweepSpec s = small_spec();
        auto rows = run_sweep(s, TrackerConfig{}, dir.string(), false);
        CHECK(rows.size() == 8);
        auto full = lines_of(dir / "summary.csv");
        REQUIRE(full.size() == 9);
        CHECK(full[0] == "cell_id,J,gamma1,gamma2,xi,sigma,replicate,seed,count_inf,count_eta_2,paths,singular,seconds");
        for (int id = 0; id < 8; ++id) {
            CHECK(fs::exists(dir / "cells" / std::to_string(id) / "manifest.json"));
            CHECK(fs::exists(dir / "cells" / std::to_string(id) / "equilibria.csv"));
        }
        CHECK(lines_of(dir / "gamma_summary.csv").size() == 3);

        // Keep three rows and a torn fourth, as after an interrupt.
        {
            std::ofstream out(dir / "summary.csv", std::ios::trunc);
            for (int k = 0; k < 4; ++k) out << full[k] << '\n';
            out << full[4].substr(0, 9);
        }
        auto resumed = run_sweep(s, TrackerConfig{}, dir.string(), true);
        auto after = lines_of(dir / "summary.csv");
        REQUIRE(after.size() == full.size());
        for (std::size_t k = 0; k < 4; ++k) CHECK(after[k] == full[k]);
        for (std::size_t k = 4; k < full.size(); ++k) CHECK(without_seconds(after[k]) == without_seconds(full[k]));
        CHECK(resumed[0].seconds == rows[0].seconds);

        // A different grid cannot resume from this file.
        SweepSpec other = s;
        other.eta = {3.0};
        CHECK_THROWS_AS(run_sweep(other, TrackerConfig{}, dir.string(), true), IoError);
        fs::remove_all(dir);
    }

    TEST_CASE("gamma summary means")
    {
        SweepSpec s = small_spec();
        std::vector<SweepRow> rows(4);
        rows[0].cell.gamma1 = 2;
        rows[0].count_inf = 1;
        rows[0].count_eta = {1};
        rows[1].cell.gamma1 = 2;
        rows[1].count_inf = 3;
        rows[1].count_eta = {2};
        rows[2].cell.gamma1 = 3;
        rows[2].count_inf = 5;
        rows[2].count_eta = {4};
        rows[3].cell.gamma1 = 3;
        rows[3].count_inf = 7;
        rows[3].count_eta = {4};
        auto g = summarize_by_gamma(rows, s);
        REQUIRE(g.size() == 2);
        CHECK(g[0].mean_inf == 2.0);
        CHECK(g[0].mean_eta[0] == 1.5);
        CHECK(g[1].mean_inf == 6.0);
        CHECK(g[1].cells == 2);
    }

    TEST_CASE("amenity dispersion report")
    {
        // Two J = 5 cells differing in σ and ξ; reported, not asserted.
        SweepCell a{0, 5, 2.0, 0.0, 3.0, 0.1, 0, 10};
        SweepCell b{1, 5, 2.0, 0.0, 4.0, 1.5, 0, 11};
        SweepSpec s;
        auto ra = run_sweep_cell(a, s, TrackerConfig{});
        auto rb = run_sweep_cell(b, s, TrackerConfig{});
        MESSAGE("count(sigma=0.1, xi=3) = " << ra.count_inf << ", count(sigma=1.5, xi=4) = " << rb.count_inf);
        CHECK(ra.count_inf >= 1);
        CHECK(rb.count_inf >= 1);
    }
}
