#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eqcont/model.hpp"
#include "eqcont/tracker.hpp"

namespace eqcont {

// Flat key = value text. "[section]" lines prefix the following keys with
// "section."; '#' and ';' start comments. Later duplicates are an error.
class Config {
public:
    static Config parse(std::istream& is, const std::string& origin = "<config>");
    static Config parse_string(const std::string& text);
    static Config load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::string text() const { return text_; }
    const std::map<std::string, std::string>& values() const { return values_; }

    std::string get(const std::string& key) const;  // ConfigError when missing
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& key) const;
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;
    std::string origin_;
    std::string text_;
    std::string where(const std::string& key) const;
};

// Numbers accept "inf"; lists are comma or whitespace separated.
double parse_double(const std::string& s, const std::string& what);
std::vector<double> parse_list(const std::string& s, const std::string& what);

// Keys under "city.":
//   geometry = line | explicit, J, xi, gamma1, gamma2, alpha, eta, L1, L2,
//   A (list) or sigma + amenity_seed, mc, c, eta_local (lists),
//   dist (rows separated by ';', explicit geometry only).
City city_from_config(const Config& cfg);

// Keys under "tracker.", overriding `base`.
TrackerConfig tracker_from_config(const Config& cfg, TrackerConfig base = {});

// %.17g
std::string fmt(double v);

// Shortest round-trip form, for column and file names.
std::string label(double v);

// eq_id,status,residual,x_1..x_J,q_1..q_J,psi_1..psi_J
void write_equilibria_csv(std::ostream& os, const std::vector<Equilibrium>& eqs, int J);

std::string sha256_hex(const std::string& data);

struct Manifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    double gamma_re = 1.0;
    double gamma_im = 0.0;
    std::string version;
    std::string mode;
    std::vector<std::string> files;
};

// Writes dir/manifest.json.
void write_manifest(const std::string& dir, const Manifest& m);

// Creates the directory (and parents); IoError on failure.
void ensure_directory(const std::string& dir);

const char* library_version();

}  // namespace eqcont
