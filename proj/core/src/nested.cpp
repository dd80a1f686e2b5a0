#include "eqcont/nested.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <boost/multiprecision/cpp_int.hpp>

#include "eqcont/errors.hpp"

namespace eqcont {

namespace {

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    for (auto& s : out) {
        auto b = s.find_first_not_of(" \t");
        auto e = s.find_last_not_of(" \t");
        s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    }
    return out;
}

double parse_number(const std::string& s, int row, const char* col)
{
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << "row " << row << ", column " << col << ": cannot parse '" << s << "' as a finite number";
        throw SchemaError(msg.str());
    }
    return v;
}

Mat distance_weights(const std::vector<double>& xs, const std::vector<double>& ys, double xi)
{
    const int n = static_cast<int>(xs.size());
    Mat w(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) w(a, b) = std::exp(-xi * std::hypot(xs[a] - xs[b], ys[a] - ys[b]));
    return w;
}

Vec logit(const Vec& log_w)
{
    Vec p = (log_w.array() - log_w.maxCoeff()).exp().matrix();
    return p / p.sum();
}

}  // namespace

NestedCity::NestedCity(std::vector<Neighborhood> hoods, std::vector<std::string> community_ids,
                       std::vector<std::string> region_ids, NestedParams params)
    : hoods_(std::move(hoods)), community_ids_(std::move(community_ids)), region_ids_(std::move(region_ids)),
      params_(params)
{
    const int jc = static_cast<int>(community_ids_.size());
    const int nr = static_cast<int>(region_ids_.size());
    members_.assign(jc, {});
    region_members_.assign(nr, {});
    community_region_.assign(jc, -1);
    for (int j = 0; j < neighborhoods(); ++j) {
        const auto& h = hoods_[j];
        if (h.community < 0 || h.community >= jc)
            throw HierarchyError("neighborhood '" + h.id + "' references a missing community");
        if (h.region < 0 || h.region >= nr)
            throw HierarchyError("neighborhood '" + h.id + "' references a missing region");
        int& r = community_region_[h.community];
        if (r >= 0 && r != h.region)
            throw HierarchyError("community '" + community_ids_[h.community] + "' spans regions '" +
                                 region_ids_[r] + "' and '" + region_ids_[h.region] + "'");
        r = h.region;
        members_[h.community].push_back(j);
    }
    for (int i = 0; i < jc; ++i) {
        if (members_[i].empty()) throw HierarchyError("community '" + community_ids_[i] + "' has no neighborhoods");
        region_members_[community_region_[i]].push_back(i);
    }
    region_share_.assign(nr, 0.0);
    for (int r = 0; r < nr; ++r) {
        if (region_members_[r].empty()) throw HierarchyError("region '" + region_ids_[r] + "' has no communities");
        for (int i : region_members_[r]) region_share_[r] += static_cast<double>(members_[i].size());
        region_share_[r] /= static_cast<double>(neighborhoods());
    }
    validate();
}

Mat NestedCity::near_weights(int i) const
{
    std::vector<double> xs, ys;
    for (int j : members_[i]) {
        xs.push_back(hoods_[j].x);
        ys.push_back(hoods_[j].y);
    }
    return distance_weights(xs, ys, params_.xi);
}

Mat NestedCity::far_weights(int r) const
{
    std::vector<double> xs, ys;
    for (int i : region_members_[r]) {
        double cx = 0, cy = 0;
        for (int j : members_[i]) {
            cx += hoods_[j].x;
            cy += hoods_[j].y;
        }
        xs.push_back(cx / static_cast<double>(members_[i].size()));
        ys.push_back(cy / static_cast<double>(members_[i].size()));
    }
    return distance_weights(xs, ys, params_.xi);
}

Mat NestedCity::design() const
{
    Mat d = Mat::Zero(neighborhoods(), communities());
    for (int j = 0; j < neighborhoods(); ++j) d(j, hoods_[j].community) = 1.0;
    return d;
}

double NestedCity::region_population_w(int r) const { return params_.Lw * region_share_[r]; }
double NestedCity::region_population_b(int r) const { return params_.Lb * region_share_[r]; }

City NestedCity::community_city(int i) const
{
    const auto& mem = members_[i];
    const int n = static_cast<int>(mem.size());
    const NestedParams& p = params_;
    City city;
    city.A.resize(n);
    city.mc.resize(n);
    city.c.resize(n);
    city.dist.resize(n, n);
    for (int a = 0; a < n; ++a) {
        const auto& h = hoods_[mem[a]];
        city.A[a] = std::pow(h.A, p.theta);
        city.mc[a] = h.mc;
        city.c[a] = h.c;
        for (int b = 0; b < n; ++b) city.dist(a, b) = std::hypot(h.x - hoods_[mem[b]].x, h.y - hoods_[mem[b]].y);
    }
    city.xi = p.xi;
    city.alpha = p.alpha * p.theta;
    city.gamma1 = p.gamma_w * p.theta;
    city.gamma2 = p.gamma_b * p.theta;
    city.L1 = p.Lw;
    city.L2 = p.Lb;
    return city;
}

void NestedCity::validate() const
{
    const NestedParams& p = params_;
    if (!(p.theta > 0) || !std::isfinite(p.theta)) throw DomainError("theta must be positive");
    if (!(p.xi >= 0) || !std::isfinite(p.xi)) throw DomainError("xi must be nonnegative");
    if (!(p.alpha > 0) || !(p.alpha < 1)) throw DomainError("alpha must lie in (0, 1)");
    if (!(p.Lw > 0) || !(p.Lb >= 0)) throw DomainError("group populations must be positive");
    if (!std::isfinite(p.gamma_w) || !std::isfinite(p.gamma_b)) throw DomainError("gamma must be finite");
    for (const auto& h : hoods_) {
        if (!(h.A > 0) || !std::isfinite(h.A)) throw DomainError("amenity of '" + h.id + "' must be positive");
        if (!(h.mc > 0) || !(h.c > 0)) throw DomainError("mc and c of '" + h.id + "' must be positive");
        if (!std::isfinite(h.x) || !std::isfinite(h.y)) throw DomainError("centroid of '" + h.id + "' not finite");
    }
    if (hoods_.empty()) throw HierarchyError("no neighborhoods");
}

NestedCity read_neighborhoods(std::istream& is, const NestedParams& params)
{
    static const std::vector<std::string> kHeader = {"neighborhood_id", "community_id", "region_id", "centroid_x",
                                                     "centroid_y",      "log_amenity",  "mc",        "c"};
    std::string line;
    if (!std::getline(is, line)) throw SchemaError("row 1: missing header");
    auto head = split_csv_line(line);
    if (head != kHeader) {
        std::ostringstream msg;
        msg << "row 1: expected header";
        for (const auto& h : kHeader) msg << ' ' << h;
        throw SchemaError(msg.str());
    }
    std::vector<Neighborhood> hoods;
    std::vector<std::string> cids, rids;
    std::map<std::string, int> cidx, ridx;
    std::map<std::string, int> seen;
    int row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto f = split_csv_line(line);
        if (f.size() != kHeader.size()) {
            std::ostringstream msg;
            msg << "row " << row << ": expected " << kHeader.size() << " columns, found " << f.size();
            throw SchemaError(msg.str());
        }
        Neighborhood h;
        h.id = f[0];
        if (h.id.empty()) throw SchemaError("row " + std::to_string(row) + ", column neighborhood_id: empty");
        if (!seen.emplace(h.id, row).second)
            throw SchemaError("row " + std::to_string(row) + ", column neighborhood_id: duplicate '" + h.id + "'");
        if (f[1].empty()) throw HierarchyError("row " + std::to_string(row) + ": neighborhood '" + h.id +
                                               "' has no community");
        if (f[2].empty()) throw HierarchyError("row " + std::to_string(row) + ": neighborhood '" + h.id +
                                               "' has no region");
        auto [ci, cnew] = cidx.emplace(f[1], static_cast<int>(cids.size()));
        if (cnew) cids.push_back(f[1]);
        auto [ri, rnew] = ridx.emplace(f[2], static_cast<int>(rids.size()));
        if (rnew) rids.push_back(f[2]);
        h.community = ci->second;
        h.region = ri->second;
        h.x = parse_number(f[3], row, "centroid_x");
        h.y = parse_number(f[4], row, "centroid_y");
        h.A = std::exp(parse_number(f[5], row, "log_amenity"));
        h.mc = parse_number(f[6], row, "mc");
        h.c = parse_number(f[7], row, "c");
        if (!(h.mc > 0)) throw SchemaError("row " + std::to_string(row) + ", column mc: must be positive");
        if (!(h.c > 0)) throw SchemaError("row " + std::to_string(row) + ", column c: must be positive");
        hoods.push_back(std::move(h));
    }
    if (hoods.empty()) throw SchemaError("no data rows");
    return NestedCity(std::move(hoods), std::move(cids), std::move(rids), params);
}

NestedCity ingest_neighborhoods(const std::string& path, const NestedParams& params)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_neighborhoods(in, params);
}

void write_neighborhoods(std::ostream& os, const NestedCity& nc)
{
    os << "neighborhood_id,community_id,region_id,centroid_x,centroid_y,log_amenity,mc,c\n";
    char buf[512];
    for (int j = 0; j < nc.neighborhoods(); ++j) {
        const auto& h = nc.hood(j);
        std::snprintf(buf, sizeof buf, "%s,%s,%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", h.id.c_str(),
                      nc.community_id(h.community).c_str(), nc.region_id(h.region).c_str(), h.x, h.y,
                      std::log(h.A), h.mc, h.c);
        os << buf;
    }
}

NestedCity synthetic_nested_city(int n_hoods, int n_communities, int n_regions, std::uint64_t seed,
                                 const NestedParams& params, double sigma)
{
    if (n_regions < 1 || n_communities < n_regions || n_hoods < n_communities)
        throw DomainError("need hoods >= communities >= regions >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_regions))));
    const double spacing = 10.0;
    std::vector<std::string> rids, cids;
    for (int r = 0; r < n_regions; ++r) rids.push_back("R" + std::to_string(r + 1));
    std::vector<Neighborhood> hoods;
    const int base = n_hoods / n_communities;
    const int extra = n_hoods % n_communities;
    for (int i = 0; i < n_communities; ++i) {
        const int r = i % n_regions;
        cids.push_back("C" + std::to_string(i + 1));
        double cx = spacing * (r % side) + 2.0 * n01(rng);
        double cy = spacing * (r / side) + 2.0 * n01(rng);
        const int size = base + (i < extra ? 1 : 0);
        for (int a = 0; a < size; ++a) {
            Neighborhood h;
            h.id = "N" + std::to_string(hoods.size() + 1);
            h.community = i;
            h.region = r;
            h.x = cx + n01(rng);
            h.y = cy + n01(rng);
            h.A = std::exp(sigma * n01(rng));
            hoods.push_back(std::move(h));
        }
    }
    return NestedCity(std::move(hoods), std::move(cids), std::move(rids), params);
}

Vec within_probabilities(const NestedCity& nc, int i, const Vec& psi, const Vec& q, double gamma)
{
    const auto& mem = nc.members(i);
    const NestedParams& p = nc.params();
    Vec lw(static_cast<int>(mem.size()));
    for (int a = 0; a < lw.size(); ++a)
        lw[a] = p.theta * (std::log(nc.hood(mem[a]).A) - p.alpha * std::log(q[a]) + gamma * std::log(psi[a]));
    return logit(lw);
}

double community_welfare(const NestedCity& nc, int i, const Vec& psi, const Vec& q, double gamma)
{
    const auto& mem = nc.members(i);
    const NestedParams& p = nc.params();
    double s = 0;
    for (int a = 0; a < static_cast<int>(mem.size()); ++a)
        s += std::pow(nc.hood(mem[a]).A * std::pow(q[a], -p.alpha) * std::pow(psi[a], gamma), p.theta);
    return std::pow(s, 1.0 / p.theta);
}

CommunityMenu community_equilibria(const NestedCity& nc, int i, const TrackerConfig& cfg, const AmenityOptions& opt)
{
    const auto& mem = nc.members(i);
    const int n = static_cast<int>(mem.size());
    const NestedParams& p = nc.params();
    Vec mc(n);
    for (int a = 0; a < n; ++a) mc[a] = nc.hood(mem[a]).mc;
    CommunityMenu menu;
    auto push = [&](const Vec& x, const Vec& psi, double residual) {
        MenuEntry e;
        e.x = x;
        e.psi = psi;
        e.Uw = community_welfare(nc, i, psi, mc, p.gamma_w);
        e.Ub = community_welfare(nc, i, psi, mc, p.gamma_b);
        e.residual = residual;
        menu.push_back(std::move(e));
    };
    if (n == 1) {
        push(Vec::Ones(1), Vec::Ones(1), 0.0);
        return menu;
    }
    City city = nc.community_city(i);
    Rational rat;
    try {
        rat = rational_approx(city.gamma1);
    } catch (const ApproximationInfeasible&) {
        rat = Rational{};
    }
    SolveReport rep = solve_amenity_homotopy(city, rat, cfg, opt);
    for (const auto& e : rep.equilibria) {
        if (e.status != EqStatus::proper) continue;
        push(e.x, e.psi, social_residual(city, e.psi, city.mc).cwiseAbs().maxCoeff());
    }
    return menu;
}

std::vector<CommunityMenu> all_community_equilibria(const NestedCity& nc, const TrackerConfig& cfg,
                                                    const AmenityOptions& opt, int threads)
{
    const int jc = nc.communities();
    std::vector<CommunityMenu> menus(jc);
    std::vector<std::exception_ptr> errors(jc);
    std::atomic<int> next{0};
    TrackerConfig inner = cfg;
    inner.threads = 1;
    auto work = [&] {
        for (int i = next++; i < jc; i = next++) {
            try {
                menus[i] = community_equilibria(nc, i, inner, opt);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int nt = std::max(1, std::min(threads, jc));
    std::vector<std::thread> pool;
    for (int k = 1; k < nt; ++k) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return menus;
}

std::string combination_count(const std::vector<std::size_t>& sizes)
{
    boost::multiprecision::cpp_int n = 1;
    for (std::size_t s : sizes) n *= s;
    return n.str();
}

std::string combination_count(const std::vector<CommunityMenu>& menus)
{
    std::vector<std::size_t> sizes;
    for (const auto& m : menus) sizes.push_back(m.size());
    return combination_count(sizes);
}

std::vector<std::vector<int>> enumerate_selections(const std::vector<CommunityMenu>& menus, std::size_t budget,
                                                   std::uint64_t seed)
{
    std::vector<std::vector<int>> out;
    for (const auto& m : menus)
        if (m.empty()) return out;
    boost::multiprecision::cpp_int total = 1;
    for (const auto& m : menus) total *= m.size();
    const int jc = static_cast<int>(menus.size());
    if (total <= budget) {
        std::vector<int> idx(jc, 0);
        while (true) {
            out.push_back(idx);
            int k = jc - 1;
            while (k >= 0 && ++idx[k] == static_cast<int>(menus[k].size())) idx[k--] = 0;
            if (k < 0) break;
        }
        return out;
    }
    std::mt19937_64 rng(seed);
    std::set<std::vector<int>> seen;
    while (out.size() < budget) {
        std::vector<int> idx(jc);
        for (int k = 0; k < jc; ++k)
            idx[k] = std::uniform_int_distribution<int>(0, static_cast<int>(menus[k].size()) - 1)(rng);
        if (seen.insert(idx).second) out.push_back(std::move(idx));
    }
    return out;
}

Vec community_probabilities(const NestedCity& nc, int r, const Vec& psi_c, const Vec& U, double gamma)
{
    const NestedParams& p = nc.params();
    const int n = static_cast<int>(nc.region_members(r).size());
    Vec lw(n);
    for (int a = 0; a < n; ++a) lw[a] = p.theta * (gamma * std::log(psi_c[a]) + std::log(U[a]));
    return logit(lw);
}

std::vector<RegionEquilibrium> region_fixed_point(const NestedCity& nc, int r, const Vec& Uw, const Vec& Ub,
                                                  const TrackerConfig& cfg, const AmenityOptions& opt)
{
    const auto& cm = nc.region_members(r);
    const int n = static_cast<int>(cm.size());
    const NestedParams& p = nc.params();
    if (Uw.size() != n || Ub.size() != n) throw DomainError("welfare vectors must match the region's communities");
    if ((Uw.array() <= 0).any() || (Ub.array() <= 0).any()) throw DomainError("welfare must be positive");
    std::vector<RegionEquilibrium> out;
    auto finish = [&](const Vec& x, EqStatus status, double residual) {
        RegionEquilibrium e;
        e.region = r;
        e.share_w = x;
        e.psi_c = nc.far_weights(r) * x;
        e.share_b = community_probabilities(nc, r, e.psi_c, Ub, p.gamma_b);
        e.status = status;
        e.residual = residual;
        out.push_back(std::move(e));
    };
    if (n == 1) {
        finish(Vec::Ones(1), EqStatus::proper, 0.0);
        return out;
    }
    City city;
    city.A = Uw.array().pow(p.theta).matrix();
    city.mc = Vec::Ones(n);
    city.c = Vec::Ones(n);
    city.alpha = p.alpha;
    city.xi = p.xi;
    city.gamma1 = p.gamma_w * p.theta;
    city.L1 = nc.region_population_w(r);
    if (p.xi == 0) throw DomainError("region fixed point needs xi > 0");
    city.dist.resize(n, n);
    Mat far = nc.far_weights(r);
    // far weights are e^{-ξd}; recover d so the sub-city reproduces them exactly.
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) city.dist(a, b) = -std::log(far(a, b)) / p.xi;
    Rational rat;
    try {
        rat = rational_approx(city.gamma1);
    } catch (const ApproximationInfeasible&) {
        rat = Rational{};
    }
    SolveReport rep = solve_amenity_homotopy(city, rat, cfg, opt);
    for (const auto& e : rep.equilibria)
        if (e.status == EqStatus::proper) finish(e.x, e.status, e.residual);
    return out;
}

CitywideState assemble_state(const NestedCity& nc, const std::vector<MenuEntry>& selection,
                             const std::vector<RegionEquilibrium>& regions)
{
    const int jn = nc.neighborhoods(), jc = nc.communities();
    if (static_cast<int>(selection.size()) != jc) throw DomainError("selection needs one entry per community");
    if (static_cast<int>(regions.size()) != nc.regions()) throw DomainError("need one equilibrium per region");
    CitywideState s;
    s.Lw.resize(jc);
    s.Lb.resize(jc);
    s.Uw.resize(jc);
    s.Ub.resize(jc);
    s.psi_c.resize(jc);
    s.psi_n.resize(jn);
    s.q_n.resize(jn);
    for (int i = 0; i < jc; ++i) {
        const auto& mem = nc.members(i);
        if (selection[i].psi.size() != static_cast<int>(mem.size())) throw DomainError("menu entry size mismatch");
        s.Uw[i] = selection[i].Uw;
        s.Ub[i] = selection[i].Ub;
        for (int a = 0; a < static_cast<int>(mem.size()); ++a) {
            s.psi_n[mem[a]] = selection[i].psi[a];
            s.q_n[mem[a]] = nc.hood(mem[a]).mc;
        }
    }
    for (int r = 0; r < nc.regions(); ++r) {
        const auto& cm = nc.region_members(r);
        const auto& e = regions[r];
        if (e.psi_c.size() != static_cast<int>(cm.size())) throw DomainError("region equilibrium size mismatch");
        for (int a = 0; a < static_cast<int>(cm.size()); ++a) {
            s.psi_c[cm[a]] = e.psi_c[a];
            s.Lw[cm[a]] = nc.region_population_w(r) * e.share_w[a];
            s.Lb[cm[a]] = nc.region_population_b(r) * e.share_b[a];
        }
    }
    s.zeta = 0;
    return s;
}

CitywideH::CitywideH(const NestedCity& nc, double zeta_to)
    : nc_(&nc), jn_(nc.neighborhoods()), jc_(nc.communities()), zeta_to_(zeta_to)
{
    if (!(zeta_to >= 0) || !std::isfinite(zeta_to)) throw DomainError("zeta_to must be finite and nonnegative");
    for (int i = 0; i < jc_; ++i) near_.push_back(nc.near_weights(i));
    for (int r = 0; r < nc.regions(); ++r) far_.push_back(nc.far_weights(r));
    lw_region_.resize(nc.regions());
    lb_region_.resize(nc.regions());
    for (int r = 0; r < nc.regions(); ++r) {
        lw_region_[r] = nc.region_population_w(r);
        lb_region_[r] = nc.region_population_b(r);
    }
    log_a_.resize(jn_);
    log_mc_.resize(jn_);
    log_c_.resize(jn_);
    for (int j = 0; j < jn_; ++j) {
        log_a_[j] = std::log(nc.hood(j).A);
        log_mc_[j] = std::log(nc.hood(j).mc);
        log_c_[j] = std::log(nc.hood(j).c);
    }
}

Vec CitywideH::pack(const CitywideState& s) const
{
    Vec y(dimension());
    y << s.q_n.array().log().matrix(), s.psi_n, s.psi_c, s.Lw, s.Lb, s.Uw, s.Ub;
    return y;
}

CitywideState CitywideH::unpack(const Vec& y, double t) const
{
    CitywideState s;
    s.q_n = y.head(jn_).array().exp().matrix();
    s.psi_n = y.segment(jn_, jn_);
    s.psi_c = y.segment(2 * jn_, jc_);
    s.Lw = y.segment(2 * jn_ + jc_, jc_);
    s.Lb = y.segment(2 * jn_ + 2 * jc_, jc_);
    s.Uw = y.segment(2 * jn_ + 3 * jc_, jc_);
    s.Ub = y.segment(2 * jn_ + 4 * jc_, jc_);
    s.zeta = t * zeta_to_;
    return s;
}

bool CitywideH::reduced(const Vec& y, double t, Reduced& out, Vec* dy) const
{
    const int n = dimension();
    const int m = n - jn_;
    Vec f, jt;
    Mat jx;
    eval_all(y, t, &f, &jx, &jt);
    // Blocks: q = log-price rows/cols, r = (Ψ_n, Ψ_c, L, U).
    Mat jqq = jx.topLeftCorner(jn_, jn_);
    Mat jqr = jx.topRightCorner(jn_, m);
    Mat jrq = jx.bottomLeftCorner(m, jn_);
    Mat jrr = jx.bottomRightCorner(m, m);
    Eigen::PartialPivLU<Mat> lu_rr(jrr);
    if (!(lu_rr.rcond() > 1e-15)) return false;
    Mat x_rq = lu_rr.solve(jrq);
    Vec x_rt = lu_rr.solve(jt.tail(m));
    Mat schur = jqq - jqr * x_rq;
    Eigen::PartialPivLU<Mat> lu_qq(jqq);
    if (!(lu_qq.rcond() > 1e-15)) return false;
    // 1 - Φ = m_q^{-1} S, B = -m_q^{-1}(m_t - m_r J_rr^{-1} r_t)
    Mat one_minus_phi = lu_qq.solve(schur);
    out.phi = Mat::Identity(jn_, jn_) - one_minus_phi;
    out.B = -lu_qq.solve(jt.head(jn_) - jqr * x_rt);
    Eigen::EigenSolver<Mat> es(one_minus_phi, false);
    out.min_eig = es.eigenvalues().real().minCoeff();
    Eigen::PartialPivLU<Mat> lu(one_minus_phi);
    out.log_abs_det = 0;
    for (int k = 0; k < jn_; ++k) out.log_abs_det += std::log(std::abs(lu.matrixLU()(k, k)));
    if (!(lu.rcond() > 1e-15)) return false;
    if (dy) {
        Vec dq = lu.solve(out.B);
        dy->resize(n);
        dy->head(jn_) = dq;
        dy->tail(m) = -(x_rq * dq + x_rt);
        if (!dy->allFinite()) return false;
    }
    return true;
}

bool CitywideH::tangent(const Vec& y, double t, Vec& dy) const
{
    Reduced r;
    return reduced(y, t, r, &dy);
}

CitywideResiduals citywide_residuals(const NestedCity& nc, const CitywideState& s)
{
    CitywideH h(nc, s.zeta);
    Vec f = h.eval(h.pack(s), 1.0);
    const int jn = nc.neighborhoods(), jc = nc.communities();
    CitywideResiduals r;
    r.m_n = f.head(jn).cwiseAbs().maxCoeff();
    r.f_n = f.segment(jn, jn).cwiseAbs().maxCoeff();
    r.f_c = f.segment(2 * jn, jc).cwiseAbs().maxCoeff();
    const NestedParams& p = nc.params();
    r.population = std::abs(s.Lw.sum() - p.Lw) / p.Lw;
    if (p.Lb > 0) r.population = std::max(r.population, std::abs(s.Lb.sum() - p.Lb) / p.Lb);
    return r;
}

CitywideResult citywide_elasticity_homotopy(const NestedCity& nc, const CitywideState& state0, double zeta_to,
                                            const TrackerConfig& cfg)
{
    CitywideH h(nc, zeta_to);
    Vec y0 = h.pack(state0);
    if (!y0.allFinite() || (y0.tail(y0.size() - nc.neighborhoods()).array() <= 0).any())
        throw DomainError("citywide start state must be finite and positive");
    TrackerConfig c = cfg;
    c.trace = true;
    c.detect_det_sign = false;
    CitywideResult res;
    res.path = track<double>(h, y0, 0.0, 1.0, c);
    res.min_eig_seen = kInf;
    for (const auto& pt : res.path.trace) {
        CitywideH::Reduced red;
        h.reduced(pt.x, pt.t, red);
        CitywideTracePoint tp;
        CitywideState s = h.unpack(pt.x, pt.t);
        tp.zeta = s.zeta;
        tp.min_eig = red.min_eig;
        tp.log_abs_det = red.log_abs_det;
        tp.q_norm = s.q_n.norm();
        CitywideResiduals cr = citywide_residuals(nc, s);
        tp.residual = std::max({cr.f_c, cr.f_n, cr.m_n});
        tp.population = cr.population;
        res.max_step_residual = std::max(res.max_step_residual, tp.residual);
        res.max_step_population = std::max(res.max_step_population, tp.population);
        tp.Lw = s.Lw;
        tp.Lb = s.Lb;
        res.min_eig_seen = std::min(res.min_eig_seen, tp.min_eig);
        res.trace.push_back(std::move(tp));
    }
    if (!cfg.trace) res.path.trace.clear();
    res.final_state = h.unpack(res.path.endpoint, res.path.t_final);
    res.residuals = citywide_residuals(nc, res.final_state);
    return res;
}

void write_citywide_trace(std::ostream& os, const CitywideResult& r)
{
    os << "zeta,min_eig,log_abs_det,q_norm,residual";
    const int jc = r.trace.empty() ? 0 : static_cast<int>(r.trace.front().Lw.size());
    for (int i = 0; i < jc; ++i) os << ",Lw_" << i + 1;
    for (int i = 0; i < jc; ++i) os << ",Lb_" << i + 1;
    os << '\n';
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    for (const auto& tp : r.trace) {
        put(tp.zeta);
        os << ',';
        put(tp.min_eig);
        os << ',';
        put(tp.log_abs_det);
        os << ',';
        put(tp.q_norm);
        os << ',';
        put(tp.residual);
        for (int i = 0; i < jc; ++i) {
            os << ',';
            put(tp.Lw[i]);
        }
        for (int i = 0; i < jc; ++i) {
            os << ',';
            put(tp.Lb[i]);
        }
        os << '\n';
    }
}

}  // namespace eqcont
