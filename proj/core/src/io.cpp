#include "eqcont/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "eqcont/errors.hpp"

#ifndef EQCONT_VERSION
#define EQCONT_VERSION "0.0.0"
#endif

namespace eqcont {

namespace {

std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s)
{
    for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

}  // namespace

double parse_double(const std::string& raw, const std::string& what)
{
    std::string s = lower(trim(raw));
    if (s == "inf" || s == "+inf" || s == "infinity") return kInf;
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (s.empty() || used != s.size() || std::isnan(v)) throw ConfigError(what + ": '" + raw + "' is not a number");
    return v;
}

std::vector<double> parse_list(const std::string& raw, const std::string& what)
{
    std::vector<double> out;
    std::string s = raw;
    for (char& ch : s)
        if (ch == ',') ch = ' ';
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(parse_double(tok, what));
    return out;
}

Config Config::parse(std::istream& is, const std::string& origin)
{
    Config c;
    c.origin_ = origin;
    std::ostringstream all;
    std::string line, section;
    int n = 0;
    while (std::getline(is, line)) {
        all << line << '\n';
        ++n;
        std::string s = line;
        auto hash = s.find_first_of("#;");
        // ';' inside a value separates matrix rows, so only a leading ';' is a comment.
        if (hash != std::string::npos && (s[hash] == '#' || trim(s.substr(0, hash)).empty())) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(origin + ":" + std::to_string(n) + ": malformed section header");
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(n) + ": expected key = value, got '" + s + "'");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError(origin + ":" + std::to_string(n) + ": empty key");
        if (!section.empty()) key = section + "." + key;
        if (c.values_.count(key))
            throw ConfigError(origin + ":" + std::to_string(n) + ": duplicate key '" + key + "' (first on line " +
                              std::to_string(c.lines_[key]) + ")");
        c.values_[key] = value;
        c.lines_[key] = n;
    }
    c.text_ = all.str();
    return c;
}

Config Config::parse_string(const std::string& text)
{
    std::istringstream is(text);
    return parse(is);
}

Config Config::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    return parse(in, path);
}

std::string Config::where(const std::string& key) const
{
    auto it = lines_.find(key);
    if (it == lines_.end()) return origin_ + ": key '" + key + "'";
    return origin_ + ":" + std::to_string(it->second) + ": key '" + key + "'";
}

std::string Config::get(const std::string& key) const
{
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(origin_ + ": missing required key '" + key + "'");
    return it->second;
}

std::string Config::get(const std::string& key, const std::string& fallback) const
{
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const { return parse_double(get(key), where(key)); }

double Config::get_double(const std::string& key, double fallback) const
{
    return has(key) ? get_double(key) : fallback;
}

long long Config::get_int(const std::string& key) const
{
    double v = get_double(key);
    if (!std::isfinite(v) || v != std::floor(v)) throw ConfigError(where(key) + ": expected an integer");
    return static_cast<long long>(v);
}

long long Config::get_int(const std::string& key, long long fallback) const
{
    return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const
{
    if (!has(key)) return fallback;
    std::string v = lower(get(key));
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(where(key) + ": expected a boolean");
}

std::vector<double> Config::get_list(const std::string& key) const { return parse_list(get(key), where(key)); }

std::vector<double> Config::get_list(const std::string& key, const std::vector<double>& fallback) const
{
    return has(key) ? get_list(key) : fallback;
}

namespace {

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

Vec list_or(const Config& cfg, const std::string& key, int J, double fallback)
{
    if (!cfg.has(key)) return Vec::Constant(J, fallback);
    auto v = cfg.get_list(key);
    if (v.size() == 1) return Vec::Constant(J, v[0]);
    if (static_cast<int>(v.size()) != J)
        throw ConfigError("key '" + key + "': expected " + std::to_string(J) + " values, got " +
                          std::to_string(v.size()));
    return to_vec(v);
}

}  // namespace

City city_from_config(const Config& cfg)
{
    const std::string geometry = cfg.get("city.geometry", "line");
    City city;
    int J = 0;
    if (geometry == "line") {
        J = static_cast<int>(cfg.get_int("city.J"));
        if (J < 1) throw ConfigError("city.J must be positive");
        city = City::line(J, cfg.get_double("city.gamma1", 0.0), cfg.get_double("city.xi", 1.0));
    } else if (geometry == "explicit") {
        std::vector<std::vector<double>> rows;
        std::string d = cfg.get("city.dist");
        std::stringstream ss(d);
        std::string row;
        while (std::getline(ss, row, ';'))
            if (!trim(row).empty()) rows.push_back(parse_list(row, "city.dist"));
        J = static_cast<int>(rows.size());
        if (J < 1) throw ConfigError("city.dist is empty");
        city = City::line(J, cfg.get_double("city.gamma1", 0.0), cfg.get_double("city.xi", 1.0));
        for (int j = 0; j < J; ++j) {
            if (static_cast<int>(rows[j].size()) != J) throw ConfigError("city.dist must be square");
            for (int k = 0; k < J; ++k) city.dist(j, k) = rows[j][k];
        }
    } else {
        throw ConfigError("city.geometry must be line or explicit, got '" + geometry + "'");
    }
    city.gamma2 = cfg.get_double("city.gamma2", 0.0);
    city.alpha = cfg.get_double("city.alpha", city.alpha);
    city.eta = cfg.get_double("city.eta", kInf);
    city.L1 = cfg.get_double("city.L1", city.L1);
    city.L2 = cfg.get_double("city.L2", city.L2);
    if (cfg.has("city.A") && cfg.has("city.sigma")) throw ConfigError("give either city.A or city.sigma, not both");
    if (cfg.has("city.A")) {
        city.A = list_or(cfg, "city.A", J, 1.0);
    } else if (cfg.has("city.sigma")) {
        double sigma = cfg.get_double("city.sigma");
        auto seed = static_cast<std::uint64_t>(cfg.get_int("city.amenity_seed", 1));
        City r = City::random_line(J, city.gamma1, city.gamma2, city.xi, sigma, seed);
        city.A = r.A;
    }
    city.mc = list_or(cfg, "city.mc", J, 1.0);
    city.c = list_or(cfg, "city.c", J, 1.0);
    if (cfg.has("city.eta_local")) city.eta_local = list_or(cfg, "city.eta_local", J, 1.0);
    try {
        city.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid city: ") + e.what());
    }
    return city;
}

TrackerConfig tracker_from_config(const Config& cfg, TrackerConfig t)
{
    t.step_init = cfg.get_double("tracker.step_init", t.step_init);
    t.step_min = cfg.get_double("tracker.step_min", t.step_min);
    t.step_max = cfg.get_double("tracker.step_max", t.step_max);
    t.newton_tol = cfg.get_double("tracker.newton_tol", t.newton_tol);
    t.newton_max_iters = static_cast<int>(cfg.get_int("tracker.newton_max_iters", t.newton_max_iters));
    t.diverge_cap = cfg.get_double("tracker.diverge_cap", t.diverge_cap);
    t.singular_eig_tol = cfg.get_double("tracker.singular_eig_tol", t.singular_eig_tol);
    t.endgame_radius = cfg.get_double("tracker.endgame_radius", t.endgame_radius);
    t.endgame_ratio = cfg.get_double("tracker.endgame_ratio", t.endgame_ratio);
    t.endgame_floor = cfg.get_double("tracker.endgame_floor", t.endgame_floor);
    t.start_tol = cfg.get_double("tracker.start_tol", t.start_tol);
    t.corrector_tol = cfg.get_double("tracker.corrector_tol", t.corrector_tol);
    t.corrector_trust = cfg.get_double("tracker.corrector_trust", t.corrector_trust);
    t.monitor_singular = cfg.get_bool("tracker.monitor_singular", t.monitor_singular);
    t.detect_det_sign = cfg.get_bool("tracker.detect_det_sign", t.detect_det_sign);
    t.max_steps = static_cast<long>(cfg.get_int("tracker.max_steps", t.max_steps));
    t.threads = static_cast<int>(cfg.get_int("tracker.threads", t.threads));
    try {
        t.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid tracker settings: ") + e.what());
    }
    return t;
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string label(double v)
{
    char buf[40];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

void write_equilibria_csv(std::ostream& os, const std::vector<Equilibrium>& eqs, int J)
{
    os << "eq_id,status,residual";
    for (const char* p : {"x_", "q_", "psi_"})
        for (int j = 1; j <= J; ++j) os << ',' << p << j;
    os << '\n';
    int id = 0;
    for (const auto& e : eqs) {
        os << ++id << ',' << to_string(e.status) << ',' << fmt(e.residual);
        for (const Vec* v : {&e.x, &e.qprice, &e.psi})
            for (int j = 0; j < J; ++j) os << ',' << (j < v->size() ? fmt((*v)[j]) : std::string("nan"));
        os << '\n';
    }
}

std::string sha256_hex(const std::string& data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw IoError("sha256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

void ensure_directory(const std::string& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create directory " + dir);
}

void write_manifest(const std::string& dir, const Manifest& m)
{
    nlohmann::ordered_json j;
    j["config_sha256"] = m.config_hash;
    j["seed"] = m.seed;
    j["gamma_trick"] = {m.gamma_re, m.gamma_im};
    j["version"] = m.version.empty() ? library_version() : m.version;
    j["mode"] = m.mode;
    j["files"] = m.files;
    std::ofstream out(dir + "/manifest.json");
    if (!out) throw IoError("cannot write " + dir + "/manifest.json");
    out << j.dump(2) << '\n';
}

const char* library_version() { return EQCONT_VERSION; }

}  // namespace eqcont
