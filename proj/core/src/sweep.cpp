#include "eqcont/sweep.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "eqcont/errors.hpp"

namespace eqcont {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string cell_key(const SweepCell& c)
{
    std::ostringstream os;
    os << "J=" << c.J << ";gamma1=" << fmt(c.gamma1) << ";gamma2=" << fmt(c.gamma2) << ";xi=" << fmt(c.xi)
       << ";sigma=" << fmt(c.sigma) << ";replicate=" << c.replicate << ";seed=" << c.seed;
    return os.str();
}

Rational rat_or_default(double gamma)
{
    try {
        return rational_approx(gamma);
    } catch (const ApproximationInfeasible&) {
        return Rational{};
    }
}

std::string summary_header(const SweepSpec& spec)
{
    std::string h = "cell_id,J,gamma1,gamma2,xi,sigma,replicate,seed,count_inf";
    for (double e : spec.eta) h += ",count_eta_" + label(e);
    h += ",paths,singular,seconds";
    return h;
}

std::string summary_line(const SweepRow& r)
{
    std::ostringstream os;
    const auto& c = r.cell;
    os << c.id << ',' << c.J << ',' << fmt(c.gamma1) << ',' << fmt(c.gamma2) << ',' << fmt(c.xi) << ','
       << fmt(c.sigma) << ',' << c.replicate << ',' << c.seed << ',' << r.count_inf;
    for (auto n : r.count_eta) os << ',' << n;
    os << ',' << r.paths << ',' << r.singular << ',' << fmt(r.seconds);
    return os.str();
}

}  // namespace

void SweepSpec::validate() const
{
    if (J.empty() || gamma1.empty() || gamma2.empty() || xi.empty() || sigma.empty())
        throw ConfigError("sweep grid lists must be nonempty");
    if (replicates < 1) throw ConfigError("sweep.replicates must be at least 1");
    for (int j : J)
        if (j < 1) throw ConfigError("sweep.J values must be positive");
    for (double s : sigma)
        if (!(s >= 0)) throw ConfigError("sweep.sigma values must be nonnegative");
    for (double x : xi)
        if (!(x >= 0)) throw ConfigError("sweep.xi values must be nonnegative");
    for (double e : eta)
        if (!(e > 0) || !std::isfinite(e)) throw ConfigError("sweep.eta values must be positive and finite");
}

SweepSpec sweep_from_config(const Config& cfg)
{
    SweepSpec s;
    if (cfg.has("sweep.J")) {
        s.J.clear();
        for (double v : cfg.get_list("sweep.J")) {
            if (v != std::floor(v)) throw ConfigError("sweep.J values must be integers");
            s.J.push_back(static_cast<int>(v));
        }
    }
    s.gamma1 = cfg.get_list("sweep.gamma1", s.gamma1);
    s.gamma2 = cfg.get_list("sweep.gamma2", s.gamma2);
    s.xi = cfg.get_list("sweep.xi", s.xi);
    s.sigma = cfg.get_list("sweep.sigma", s.sigma);
    s.eta = cfg.get_list("sweep.eta", s.eta);
    s.replicates = static_cast<int>(cfg.get_int("sweep.replicates", s.replicates));
    s.seed = static_cast<std::uint64_t>(cfg.get_int("sweep.seed", static_cast<long long>(s.seed)));
    s.alpha = cfg.get_double("sweep.alpha", s.alpha);
    s.validate();
    return s;
}

std::vector<SweepCell> sweep_cells(const SweepSpec& spec)
{
    std::vector<SweepCell> out;
    int id = 0;
    for (int J : spec.J)
        for (double g1 : spec.gamma1)
            for (double g2 : spec.gamma2)
                for (double xi : spec.xi)
                    for (double sg : spec.sigma)
                        for (int r = 0; r < spec.replicates; ++r) {
                            SweepCell c;
                            c.id = id;
                            c.J = J;
                            c.gamma1 = g1;
                            c.gamma2 = g2;
                            c.xi = xi;
                            c.sigma = sg;
                            c.replicate = r;
                            c.seed = splitmix64(spec.seed ^ splitmix64(static_cast<std::uint64_t>(id)));
                            out.push_back(c);
                            ++id;
                        }
    return out;
}

City sweep_city(const SweepCell& cell, double alpha)
{
    City c = City::random_line(cell.J, cell.gamma1, cell.gamma2, cell.xi, cell.sigma, cell.seed);
    c.alpha = alpha;
    return c;
}

SweepRow run_sweep_cell(const SweepCell& cell, const SweepSpec& spec, const TrackerConfig& cfg)
{
    auto t0 = std::chrono::steady_clock::now();
    SweepRow row;
    row.cell = cell;
    City city = sweep_city(cell, spec.alpha);
    SolveReport rep = solve_amenity_homotopy(city, rat_or_default(cell.gamma1), cfg);
    row.equilibria = rep.proper();
    row.count_inf = row.equilibria.size();
    row.paths = rep.stats.paths;
    row.singular = rep.stats.singular;
    for (double eta : spec.eta) {
        City ce = city;
        ce.eta = eta;
        std::vector<Equilibrium> ends;
        for (const auto& e : row.equilibria) {
            ElasticityResult er = solve_elasticity_homotopy(ce, e, cfg);
            if (er.path.status == PathStatus::converged && er.equilibrium.status == EqStatus::proper)
                ends.push_back(er.equilibrium);
        }
        row.count_eta.push_back(unique_by_x(std::move(ends), 1e-6).size());
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

std::vector<GammaSummary> summarize_by_gamma(const std::vector<SweepRow>& rows, const SweepSpec& spec)
{
    std::map<double, GammaSummary> by;
    for (const auto& r : rows) {
        auto& g = by[r.cell.gamma1];
        g.gamma1 = r.cell.gamma1;
        if (g.mean_eta.empty()) g.mean_eta.assign(spec.eta.size(), 0.0);
        ++g.cells;
        g.mean_inf += static_cast<double>(r.count_inf);
        for (std::size_t k = 0; k < r.count_eta.size() && k < g.mean_eta.size(); ++k)
            g.mean_eta[k] += static_cast<double>(r.count_eta[k]);
    }
    std::vector<GammaSummary> out;
    for (auto& [gamma, g] : by) {
        g.mean_inf /= static_cast<double>(g.cells);
        for (double& m : g.mean_eta) m /= static_cast<double>(g.cells);
        out.push_back(g);
    }
    return out;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const TrackerConfig& cfg, const std::string& out_dir,
                                bool resume)
{
    spec.validate();
    ensure_directory(out_dir);
    const std::string summary_path = out_dir + "/summary.csv";
    const std::string header = summary_header(spec);
    auto cells = sweep_cells(spec);

    std::map<int, SweepRow> done;
    if (resume && std::filesystem::exists(summary_path)) {
        std::ifstream in(summary_path);
        std::string line;
        std::getline(in, line);
        if (line != header) throw IoError(summary_path + " was written for a different sweep grid");
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::vector<std::string> f;
            std::stringstream ss(line);
            std::string tok;
            while (std::getline(ss, tok, ',')) f.push_back(tok);
            const std::size_t ne = spec.eta.size();
            if (f.size() != 12 + ne) continue;  // partial line from an interrupted run
            int id = std::stoi(f[0]);
            if (id < 0 || id >= static_cast<int>(cells.size())) continue;
            SweepRow r;
            r.cell = cells[id];
            r.count_inf = std::stoul(f[8]);
            for (std::size_t k = 0; k < ne; ++k) r.count_eta.push_back(std::stoul(f[9 + k]));
            r.paths = std::stoul(f[9 + ne]);
            r.singular = std::stoul(f[10 + ne]);
            r.seconds = std::stod(f[11 + ne]);
            done[id] = std::move(r);
        }
    }
    {
        // Rewrite the file with the recovered rows so a torn last line is dropped.
        std::ofstream out(summary_path, std::ios::trunc);
        if (!out) throw IoError("cannot write " + summary_path);
        out << header << '\n';
        for (const auto& [id, r] : done) out << summary_line(r) << '\n';
    }
    std::ofstream out(summary_path, std::ios::app);
    std::vector<SweepRow> rows;
    for (const auto& cell : cells) {
        if (auto it = done.find(cell.id); it != done.end()) {
            rows.push_back(it->second);
            continue;
        }
        SweepRow r = run_sweep_cell(cell, spec, cfg);
        const std::string dir = out_dir + "/cells/" + std::to_string(cell.id);
        ensure_directory(dir);
        {
            std::ofstream eq(dir + "/equilibria.csv");
            if (!eq) throw IoError("cannot write " + dir + "/equilibria.csv");
            write_equilibria_csv(eq, r.equilibria, cell.J);
        }
        Manifest m;
        m.config_hash = sha256_hex(cell_key(cell));
        m.seed = cell.seed;
        m.mode = "sweep-cell";
        m.files = {"equilibria.csv"};
        write_manifest(dir, m);
        out << summary_line(r) << '\n';
        out.flush();
        rows.push_back(std::move(r));
    }
    out.close();

    std::ofstream gs(out_dir + "/gamma_summary.csv");
    if (!gs) throw IoError("cannot write gamma_summary.csv");
    gs << "gamma1,cells,mean_count_inf";
    for (double e : spec.eta) gs << ",mean_count_eta_" << label(e);
    gs << '\n';
    for (const auto& g : summarize_by_gamma(rows, spec)) {
        gs << fmt(g.gamma1) << ',' << g.cells << ',' << fmt(g.mean_inf);
        for (double m : g.mean_eta) gs << ',' << fmt(m);
        gs << '\n';
    }
    return rows;
}

}  // namespace eqcont
