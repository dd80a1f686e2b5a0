// eqcont command-line front end.
//
//   eqcont <mode> --config run.ini --out results/ [--seed N] [--threads N]
//          [--trace] [--budget N] [--solver NAME] [--eta LIST] [--quiet]
//
// Exit codes: 0 ok, 2 path budget exceeded, 3 config error, 4 numerical
// failure, 5 I/O error.

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "eqcont/bifurcation.hpp"
#include "eqcont/errors.hpp"
#include "eqcont/homotopies.hpp"
#include "eqcont/io.hpp"
#include "eqcont/nested.hpp"
#include "eqcont/oracle.hpp"
#include "eqcont/sweep.hpp"

namespace {

using namespace eqcont;
using json = nlohmann::ordered_json;

enum Exit { kOk = 0, kBudget = 2, kConfig = 3, kNumerical = 4, kIo = 5 };

struct Options {
    std::string mode;
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool trace = false;
    std::optional<double> budget;
    std::string solver;
    std::string eta;
    bool quiet = false;
};

struct Run {
    Options opt;
    Config cfg;
    TrackerConfig tracker;
    std::uint64_t seed = 1;
    std::string solver;
    std::vector<double> etas;
    json meta;
    Manifest manifest;

    void log(const std::string& msg) const
    {
        if (!opt.quiet) std::cerr << msg << '\n';
    }

    std::ofstream open(const std::string& name)
    {
        std::ofstream out(opt.out_dir + "/" + name);
        if (!out) throw IoError("cannot write " + opt.out_dir + "/" + name);
        manifest.files.push_back(name);
        return out;
    }
};

Rational rational_for(const Run& run, double gamma)
{
    if (run.cfg.has("solve.p") || run.cfg.has("solve.q")) {
        Rational r{run.cfg.get_int("solve.p"), run.cfg.get_int("solve.q")};
        if (r.q <= 0) throw ConfigError("solve.q must be positive");
        return r;
    }
    try {
        return rational_approx(gamma);
    } catch (const ApproximationInfeasible&) {
        if (run.solver == "total-degree") throw;
        return Rational{};
    }
}

json stats_json(const SolveStats& s)
{
    json j;
    j["paths"] = s.paths;
    j["converged"] = s.converged;
    j["diverged"] = s.diverged;
    j["singular"] = s.singular;
    j["step_failure"] = s.step_failure;
    j["bad_start"] = s.bad_start;
    j["complex_endpoints"] = s.complex_endpoints;
    j["real_endpoints"] = s.real_endpoints;
    j["branch_points"] = s.branch_points;
    j["branches_followed"] = s.branches_followed;
    j["seconds"] = s.seconds;
    return j;
}

SolveReport solve_static(Run& run, const City& city, std::vector<PathResult<cplx>>* paths)
{
    City c = city;
    c.eta = kInf;
    c.eta_local.resize(0);
    Rational rat = rational_for(run, c.gamma1);
    SolveReport rep;
    if (run.solver == "total-degree") {
        SolveOptions so;
        so.seed = run.seed;
        if (run.opt.budget) so.path_cap = *run.opt.budget;
        rep = solve_total_degree(c, rat, run.tracker, so, paths);
    } else if (run.solver == "amenity-homotopy") {
        AmenityOptions ao;
        ao.seed = run.seed;
        if (run.opt.budget) ao.path_cap = *run.opt.budget;
        ao.start = run.cfg.get("solve.start", "isolated") == "homogeneous" ? AmenityOptions::Start::homogeneous
                                                                           : AmenityOptions::Start::isolated;
        ao.branch_on_singular = run.cfg.get_bool("solve.branch_on_singular", true);
        rep = solve_amenity_homotopy(c, rat, run.tracker, ao);
    } else {
        throw ConfigError("unknown solver '" + run.solver + "' (total-degree or amenity-homotopy)");
    }
    run.meta["solver"] = rep.method;
    run.meta["rational"] = {rep.rat.p, rep.rat.q};
    run.meta["complete"] = rep.complete;
    run.meta["stats"] = stats_json(rep.stats);
    run.manifest.gamma_re = rep.gamma.real();
    run.manifest.gamma_im = rep.gamma.imag();
    run.meta["gamma_trick"] = {rep.gamma.real(), rep.gamma.imag()};
    return rep;
}

std::vector<Equilibrium> elasticity_step(Run& run, const City& city, double eta, const std::vector<Equilibrium>& start,
                                         json& info)
{
    City ce = city;
    ce.eta = eta;
    std::vector<Equilibrium> out;
    std::size_t converged = 0, skipped = 0;
    double min_schur = kInf;
    for (const auto& e : start) {
        try {
            ElasticityResult r = solve_elasticity_homotopy(ce, e, run.tracker);
            if (r.path.status == PathStatus::converged) ++converged;
            min_schur = std::min(min_schur, r.min_sv_schur);
            if (r.path.status == PathStatus::converged) out.push_back(r.equilibrium);
        } catch (const DomainError&) {
            ++skipped;
        }
    }
    out = unique_by_x(std::move(out), 1e-6);
    sort_by_x(out);
    info["eta"] = eta;
    info["paths"] = start.size();
    info["converged"] = converged;
    info["skipped"] = skipped;
    info["endpoints"] = out.size();
    info["min_sv_schur"] = std::isfinite(min_schur) ? json(min_schur) : json(nullptr);
    return out;
}

int cmd_enumerate(Run& run)
{
    City city = city_from_config(run.cfg);
    std::vector<PathResult<cplx>> paths;
    SolveReport rep = solve_static(run, city, run.opt.trace ? &paths : nullptr);
    {
        auto out = run.open("equilibria.csv");
        write_equilibria_csv(out, rep.equilibria, city.J());
    }
    if (run.opt.trace && !paths.empty()) {
        auto out = run.open("paths_trace.csv");
        write_trace_csv(out, paths);
    }
    run.meta["proper"] = rep.count(EqStatus::proper);
    run.meta["improper"] = rep.count(EqStatus::improper);
    run.log("proper equilibria: " + std::to_string(rep.count(EqStatus::proper)));
    std::vector<double> etas = run.etas;
    if (etas.empty() && city.eta < kInf) etas.push_back(city.eta);
    json steps = json::array();
    for (double eta : etas) {
        json info;
        auto eqs = elasticity_step(run, city, eta, rep.proper(), info);
        auto out = run.open("equilibria_eta_" + label(eta) + ".csv");
        write_equilibria_csv(out, eqs, city.J());
        steps.push_back(info);
    }
    if (!steps.empty()) run.meta["elasticity"] = steps;
    if (rep.stats.paths > 0 && rep.stats.converged == 0) return kNumerical;
    return kOk;
}

int cmd_elasticity(Run& run)
{
    City city = city_from_config(run.cfg);
    std::vector<double> etas = run.etas;
    if (etas.empty() && city.eta < kInf) etas.push_back(city.eta);
    if (etas.empty()) throw ConfigError("elasticity mode needs city.eta or --eta");
    SolveReport rep = solve_static(run, city, nullptr);
    {
        auto out = run.open("equilibria.csv");
        write_equilibria_csv(out, rep.equilibria, city.J());
    }
    json steps = json::array();
    bool any = false;
    for (double eta : etas) {
        json info;
        auto eqs = elasticity_step(run, city, eta, rep.proper(), info);
        any = any || !eqs.empty();
        auto out = run.open("equilibria_eta_" + label(eta) + ".csv");
        write_equilibria_csv(out, eqs, city.J());
        steps.push_back(info);
        run.log("eta " + fmt(eta) + ": " + std::to_string(eqs.size()) + " endpoints");
    }
    run.meta["elasticity"] = steps;
    return any || rep.proper().empty() ? kOk : kNumerical;
}

int cmd_maclaurin(Run& run)
{
    City city = city_from_config(run.cfg);
    MaclaurinSolveOptions mo;
    mo.seed = run.seed;
    if (run.opt.budget) mo.path_cap = *run.opt.budget;
    int n = static_cast<int>(run.cfg.get_int("maclaurin.n", 8));
    mo.model.population = run.cfg.get_double("maclaurin.population", -1.0);
    if (run.cfg.has("maclaurin.surface")) {
        auto s = run.cfg.get_list("maclaurin.surface");
        if (static_cast<int>(s.size()) != city.J()) throw ConfigError("maclaurin.surface needs J values");
        mo.model.surface = Eigen::Map<Vec>(s.data(), city.J());
    }
    std::vector<PathResult<cplx>> paths;
    SolveReport rep = solve_maclaurin(city, n, run.tracker, mo, run.opt.trace ? &paths : nullptr);
    auto out = run.open("equilibria.csv");
    write_equilibria_csv(out, rep.equilibria, city.J());
    if (run.opt.trace && !paths.empty()) {
        auto tr = run.open("paths_trace.csv");
        write_trace_csv(tr, paths);
    }
    run.meta["order"] = n;
    run.meta["proper"] = rep.count(EqStatus::proper);
    run.meta["stats"] = stats_json(rep.stats);
    run.manifest.gamma_re = rep.gamma.real();
    run.manifest.gamma_im = rep.gamma.imag();
    run.meta["gamma_trick"] = {rep.gamma.real(), rep.gamma.imag()};
    run.log("proper equilibria: " + std::to_string(rep.count(EqStatus::proper)));
    return rep.stats.paths > 0 && rep.stats.converged == 0 ? kNumerical : kOk;
}

int cmd_oracle(Run& run)
{
    City city = city_from_config(run.cfg);
    GridSpec gs;
    gs.resolution = static_cast<int>(run.cfg.get_int("oracle.resolution", gs.resolution));
    gs.max_dim = static_cast<int>(run.cfg.get_int("oracle.max_dim", gs.max_dim));
    gs.threads = run.tracker.threads;
    auto eqs = brute_force_equilibria(city, gs);
    auto out = run.open("equilibria.csv");
    write_equilibria_csv(out, eqs, city.J());
    run.meta["proper"] = eqs.size();
    run.meta["seeds"] = oracle_seed_count(city, gs);
    run.log("proper equilibria: " + std::to_string(eqs.size()));
    return kOk;
}

int cmd_bifurcate(Run& run)
{
    TangencyStudy st;
    st.gamma = run.cfg.get_double("bifurcate.gamma", st.gamma);
    st.xi = run.cfg.get_double("bifurcate.xi", st.xi);
    st.a2_lo = run.cfg.get_double("bifurcate.a2_lo", st.a2_lo);
    st.a2_hi = run.cfg.get_double("bifurcate.a2_hi", st.a2_hi);
    BifurcationConfig bc;
    bc.seed = run.seed;
    TangencyReport rep = tangency_family(st, run.tracker, bc);
    {
        auto out = run.open("singular_point.json");
        out << branch_report_json(rep.singular, rep.branches) << '\n';
    }
    {
        auto out = run.open("continued.csv");
        out << "branch,x_1,x_2\n";
        for (std::size_t k = 0; k < rep.continued.size(); ++k)
            out << k + 1 << ',' << fmt(rep.continued[k][0]) << ',' << fmt(rep.continued[k][1]) << '\n';
    }
    {
        auto out = run.open("equilibria_lo.csv");
        write_equilibria_csv(out, rep.lo_set, 2);
    }
    run.meta["a2_bisect"] = rep.a2_bisect;
    run.meta["a2_star"] = rep.a2_star;
    run.meta["count_below"] = rep.count_below;
    run.meta["count_above"] = rep.count_above;
    run.meta["branches_admitted"] = rep.branches.admitted();
    run.meta["branches_validated"] = rep.branches.validated().size();
    run.log("singular A2 = " + fmt(rep.a2_star) + ", counts " + std::to_string(rep.count_below) + " -> " +
            std::to_string(rep.count_above));
    return kOk;
}

NestedCity nested_from_config(const Run& run)
{
    NestedParams p;
    const Config& c = run.cfg;
    p.theta = c.get_double("nested.theta", p.theta);
    p.gamma_w = c.get_double("nested.gamma_w", p.gamma_w);
    p.gamma_b = c.get_double("nested.gamma_b", p.gamma_b);
    p.xi = c.get_double("nested.xi", p.xi);
    p.alpha = c.get_double("nested.alpha", p.alpha);
    p.Lw = c.get_double("nested.Lw", p.Lw);
    p.Lb = c.get_double("nested.Lb", p.Lb);
    const std::string source = c.get("nested.source", "synthetic");
    try {
        if (source == "file") return ingest_neighborhoods(c.get("nested.file"), p);
        if (source == "synthetic")
            return synthetic_nested_city(static_cast<int>(c.get_int("nested.neighborhoods", 353)),
                                         static_cast<int>(c.get_int("nested.communities", 77)),
                                         static_cast<int>(c.get_int("nested.regions", 9)),
                                         static_cast<std::uint64_t>(c.get_int("nested.fixture_seed", 2024)), p,
                                         c.get_double("nested.sigma", 0.5));
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid nested city: ") + e.what());
    }
    throw ConfigError("nested.source must be synthetic or file");
}

int cmd_nested(Run& run)
{
    NestedCity nc = nested_from_config(run);
    if (run.cfg.get_bool("nested.write_fixture", false)) {
        auto out = run.open("neighborhoods.csv");
        write_neighborhoods(out, nc);
    }
    AmenityOptions ao;
    ao.seed = run.seed;
    auto menus = all_community_equilibria(nc, run.tracker, ao, run.tracker.threads);
    {
        auto out = run.open("menus.csv");
        out << "community_id,entry,menu_size,U_w,U_b,residual,neighborhood_id,x,psi\n";
        for (int i = 0; i < nc.communities(); ++i) {
            const auto& mem = nc.members(i);
            for (std::size_t e = 0; e < menus[i].size(); ++e) {
                const auto& m = menus[i][e];
                for (std::size_t a = 0; a < mem.size(); ++a)
                    out << nc.community_id(i) << ',' << e + 1 << ',' << menus[i].size() << ',' << fmt(m.Uw) << ','
                        << fmt(m.Ub) << ',' << fmt(m.residual) << ',' << nc.hood(mem[a]).id << ','
                        << fmt(m.x[static_cast<int>(a)]) << ',' << fmt(m.psi[static_cast<int>(a)]) << '\n';
            }
        }
    }
    std::vector<std::size_t> sizes;
    double max_res = 0;
    for (const auto& m : menus) {
        sizes.push_back(m.size());
        for (const auto& e : m) max_res = std::max(max_res, e.residual);
    }
    json summary;
    summary["neighborhoods"] = nc.neighborhoods();
    summary["communities"] = nc.communities();
    summary["regions"] = nc.regions();
    summary["menu_sizes"] = sizes;
    summary["combinations"] = combination_count(sizes);
    summary["max_menu_residual"] = max_res;
    run.log("communities: " + std::to_string(nc.communities()) + ", combinations: " + combination_count(sizes));

    const bool empty_menu = std::any_of(menus.begin(), menus.end(), [](const auto& m) { return m.empty(); });
    const auto budget = static_cast<std::size_t>(run.cfg.get_int("nested.selection_budget", 10000));
    const auto region_selections = static_cast<std::size_t>(run.cfg.get_int("nested.region_selections", 1));
    if (!empty_menu && region_selections > 0) {
        auto selections = enumerate_selections(menus, std::min(budget, region_selections), run.seed);
        auto out = run.open("region_equilibria.csv");
        out << "selection,region_id,region_eq,community_id,share_w,share_b,psi_c\n";
        json sel_info = json::array();
        std::optional<CitywideState> start;
        for (std::size_t s = 0; s < selections.size(); ++s) {
            std::vector<MenuEntry> pick;
            for (int i = 0; i < nc.communities(); ++i) pick.push_back(menus[i][selections[s][i]]);
            std::vector<RegionEquilibrium> first;
            std::vector<std::size_t> counts;
            for (int r = 0; r < nc.regions(); ++r) {
                const auto& cm = nc.region_members(r);
                Vec Uw(static_cast<int>(cm.size())), Ub(static_cast<int>(cm.size()));
                for (std::size_t a = 0; a < cm.size(); ++a) {
                    Uw[static_cast<int>(a)] = pick[cm[a]].Uw;
                    Ub[static_cast<int>(a)] = pick[cm[a]].Ub;
                }
                auto eqs = region_fixed_point(nc, r, Uw, Ub, run.tracker, ao);
                counts.push_back(eqs.size());
                for (std::size_t k = 0; k < eqs.size(); ++k)
                    for (std::size_t a = 0; a < cm.size(); ++a)
                        out << s + 1 << ',' << nc.region_id(r) << ',' << k + 1 << ',' << nc.community_id(cm[a]) << ','
                            << fmt(eqs[k].share_w[static_cast<int>(a)]) << ','
                            << fmt(eqs[k].share_b[static_cast<int>(a)]) << ','
                            << fmt(eqs[k].psi_c[static_cast<int>(a)]) << '\n';
                if (!eqs.empty()) first.push_back(eqs.front());
            }
            json si;
            si["selection"] = selections[s];
            si["region_counts"] = counts;
            sel_info.push_back(si);
            if (!start && static_cast<int>(first.size()) == nc.regions()) start = assemble_state(nc, pick, first);
        }
        summary["selections"] = sel_info;
        const double eta = run.etas.empty() ? run.cfg.get_double("nested.eta", kInf) : run.etas.front();
        if (start && eta < kInf) {
            CitywideResult cr = citywide_elasticity_homotopy(nc, *start, 1.0 / eta, run.tracker);
            auto tr = run.open("citywide_trace.csv");
            write_citywide_trace(tr, cr);
            json cw;
            cw["eta"] = eta;
            cw["status"] = std::string(to_string(cr.path.status));
            cw["zeta_final"] = cr.final_state.zeta;
            cw["min_eig"] = cr.min_eig_seen;
            cw["max_step_residual"] = cr.max_step_residual;
            cw["population_error"] = cr.max_step_population;
            cw["f_c"] = cr.residuals.f_c;
            cw["f_n"] = cr.residuals.f_n;
            cw["m_n"] = cr.residuals.m_n;
            summary["citywide"] = cw;
            run.log("citywide path: " + std::string(to_string(cr.path.status)));
        }
    }
    {
        auto out = run.open("summary.json");
        out << summary.dump(2) << '\n';
    }
    run.meta["nested"] = summary;
    return kOk;
}

int cmd_sweep(Run& run)
{
    SweepSpec spec = sweep_from_config(run.cfg);
    if (run.opt.seed) spec.seed = *run.opt.seed;
    if (!run.etas.empty()) spec.eta = run.etas;
    for (double e : spec.eta)
        if (!(e < kInf)) throw ConfigError("sweep eta values must be finite");
    auto rows = run_sweep(spec, run.tracker, run.opt.out_dir, run.cfg.get_bool("sweep.resume", true));
    run.manifest.files.push_back("summary.csv");
    run.manifest.files.push_back("gamma_summary.csv");
    json g = json::array();
    for (const auto& s : summarize_by_gamma(rows, spec)) {
        json e;
        e["gamma1"] = s.gamma1;
        e["cells"] = s.cells;
        e["mean_count_inf"] = s.mean_inf;
        e["mean_count_eta"] = s.mean_eta;
        g.push_back(e);
    }
    run.meta["cells"] = rows.size();
    run.meta["eta"] = spec.eta;
    run.meta["by_gamma"] = g;
    run.log("sweep cells: " + std::to_string(rows.size()));
    return kOk;
}

std::string utc_now()
{
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

int dispatch(Run& run)
{
    const std::string& m = run.opt.mode;
    if (m == "enumerate") return cmd_enumerate(run);
    if (m == "elasticity") return cmd_elasticity(run);
    if (m == "maclaurin") return cmd_maclaurin(run);
    if (m == "nested") return cmd_nested(run);
    if (m == "sweep") return cmd_sweep(run);
    if (m == "bifurcate") return cmd_bifurcate(run);
    if (m == "oracle") return cmd_oracle(run);
    throw ConfigError("unknown mode '" + m + "'");
}

int run_main(Options opt)
{
    Run run;
    run.opt = opt;
    try {
        run.cfg = opt.config_path.empty() ? Config() : Config::load(opt.config_path);
        if (run.opt.mode.empty()) run.opt.mode = run.cfg.get("mode", "");
        if (run.opt.mode.empty()) throw ConfigError("no mode given (positional argument or 'mode' key)");
        run.tracker = tracker_from_config(run.cfg);
        run.tracker.threads = opt.threads ? *opt.threads
                                          : static_cast<int>(run.cfg.get_int(
                                                "threads", std::max(1u, std::thread::hardware_concurrency())));
        if (run.tracker.threads < 1) throw ConfigError("threads must be positive");
        run.tracker.trace = opt.trace || run.tracker.trace;
        run.seed = opt.seed ? *opt.seed : static_cast<std::uint64_t>(run.cfg.get_int("seed", 1));
        run.solver = !opt.solver.empty() ? opt.solver : run.cfg.get("solver", "total-degree");
        if (!opt.eta.empty()) run.etas = parse_list(opt.eta, "--eta");
        for (double e : run.etas)
            if (!(e > 0)) throw ConfigError("--eta values must be positive");
        if (opt.budget && !(*opt.budget >= 1)) throw ConfigError("--budget must be at least 1");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    }

    auto t0 = std::chrono::steady_clock::now();
    int code = kOk;
    std::string error;
    try {
        ensure_directory(run.opt.out_dir);
        code = dispatch(run);
    } catch (const ConfigError& e) {
        code = kConfig;
        error = std::string("config error: ") + e.what();
    } catch (const SchemaError& e) {
        code = kConfig;
        error = std::string("input error: ") + e.what();
    } catch (const HierarchyError& e) {
        code = kConfig;
        error = std::string("input error: ") + e.what();
    } catch (const PathBudgetExceeded& e) {
        code = kBudget;
        error = std::string("path budget exceeded: ") + e.what();
    } catch (const ApproximationInfeasible& e) {
        code = kConfig;
        error = std::string("exponent approximation: ") + e.what();
    } catch (const IoError& e) {
        code = kIo;
        error = std::string("I/O error: ") + e.what();
    } catch (const DomainError& e) {
        code = kConfig;
        error = std::string("invalid input: ") + e.what();
    } catch (const Error& e) {
        code = kNumerical;
        error = std::string("numerical failure: ") + e.what();
    } catch (const std::exception& e) {
        code = kNumerical;
        error = std::string("error: ") + e.what();
    }
    if (!error.empty()) std::cerr << error << '\n';
    if (code == kIo) return code;

    try {
        run.meta["mode"] = run.opt.mode;
        run.meta["version"] = library_version();
        run.meta["seed"] = run.seed;
        run.meta["threads"] = run.tracker.threads;
        run.meta["config_sha256"] = sha256_hex(run.cfg.text());
        run.meta["finished_utc"] = utc_now();
        run.meta["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        run.meta["exit_code"] = code;
        if (!error.empty()) run.meta["error"] = error;
        {
            std::ofstream out(run.opt.out_dir + "/metadata.json");
            if (!out) throw IoError("cannot write metadata.json");
            out << run.meta.dump(2) << '\n';
        }
        run.manifest.files.push_back("metadata.json");
        run.manifest.config_hash = sha256_hex(run.cfg.text());
        run.manifest.seed = run.seed;
        run.manifest.mode = run.opt.mode;
        write_manifest(run.opt.out_dir, run.manifest);
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    }
    return code;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Equilibrium enumeration for spatial models with social interactions"};
    Options opt;
    std::uint64_t seed = 0;
    int threads = 0;
    double budget = 0;
    app.add_option("mode", opt.mode, "enumerate, elasticity, maclaurin, nested, sweep, bifurcate or oracle")
        ->check(CLI::IsMember({"enumerate", "elasticity", "maclaurin", "nested", "sweep", "bifurcate", "oracle"}));
    app.add_option("--config", opt.config_path, "INI-style run configuration");
    app.add_option("--out", opt.out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "random seed (gamma trick, subsampling)");
    auto* threads_opt = app.add_option("--threads", threads, "worker threads (default: logical cores)");
    app.add_flag("--trace", opt.trace, "write per-step path traces");
    auto* budget_opt = app.add_option("--budget", budget, "maximum number of paths");
    app.add_option("--solver", opt.solver, "total-degree or amenity-homotopy");
    app.add_option("--eta", opt.eta, "comma-separated finite supply elasticities");
    app.add_flag("--quiet", opt.quiet, "suppress progress messages");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }
    if (*seed_opt) opt.seed = seed;
    if (*threads_opt) opt.threads = threads;
    if (*budget_opt) opt.budget = budget;
    return run_main(opt);
}
