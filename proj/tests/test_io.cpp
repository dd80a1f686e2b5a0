#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include <eqcont/errors.hpp>
#include <eqcont/homotopies.hpp>
#include <eqcont/io.hpp>

#include "fixtures.hpp"

using namespace eqcont;
namespace fs = std::filesystem;

TEST_SUITE("io")
{
    TEST_CASE("config: sections, comments and lists")
    {
        Config cfg = Config::parse_string(
            "# comment\n"
            "mode = enumerate\n"
            "; also a comment\n"
            "[city]\n"
            "J = 3   # trailing\n"
            "A = 1, 2.5 3\n"
            "eta = inf\n"
            "[tracker]\n"
            "trace = true\n");
        CHECK(cfg.get("mode") == "enumerate");
        CHECK(cfg.get_int("city.J") == 3);
        CHECK(cfg.get_list("city.A") == std::vector<double>{1, 2.5, 3});
        CHECK(std::isinf(cfg.get_double("city.eta")));
        CHECK(cfg.get_bool("tracker.trace", false));
        CHECK(cfg.get("missing", "fallback") == "fallback");
        CHECK(cfg.get_double("city.xi", 1.5) == 1.5);
        CHECK_THROWS_AS(cfg.get("missing"), ConfigError);
    }

    TEST_CASE("config: errors")
    {
        try {
            Config::parse_string("[city]\nJ = 3\nJ = 4\n");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            std::string msg = e.what();
            CHECK(msg.find(":3:") != std::string::npos);
            CHECK(msg.find("line 2") != std::string::npos);
        }
        CHECK_THROWS_AS(Config::parse_string("no equals sign\n"), ConfigError);
        Config cfg = Config::parse_string("J = three\nflag = maybe\n");
        CHECK_THROWS_AS(cfg.get_int("J"), ConfigError);
        CHECK_THROWS_AS(cfg.get_bool("flag", false), ConfigError);
        CHECK_THROWS_AS(parse_double("1.5x", "v"), ConfigError);
        CHECK_THROWS_AS(Config::load("/nonexistent/eqcont.ini"), IoError);
    }

    TEST_CASE("city_from_config: line geometry")
    {
        Config cfg = Config::parse_string(
            "[city]\nJ = 3\ngamma1 = 2.5\nxi = 1\nL1 = 2.4\nL2 = 0.6\nA = 1\nmc = 1, 2, 3\n");
        City c = city_from_config(cfg);
        CHECK(c.J() == 3);
        CHECK(c.A == Vec::Ones(3));
        CHECK(c.mc[2] == 3.0);
        CHECK(c.dist(0, 2) == 2.0);
        CHECK(c.gamma1 == 2.5);
        CHECK(std::isinf(c.eta));
    }

    TEST_CASE("city_from_config: explicit geometry and random amenities")
    {
        Config cfg = Config::parse_string(
            "[city]\ngeometry = explicit\nJ = 2\ngamma1 = 3\ndist = 0, 1.5; 1.5, 0\nsigma = 0.5\namenity_seed = 4\n");
        City c = city_from_config(cfg);
        CHECK(c.dist(0, 1) == 1.5);
        City r = City::random_line(2, 3.0, 0.0, 1.0, 0.5, 4);
        CHECK(c.A == r.A);
    }

    TEST_CASE("city_from_config: invalid input is a config error")
    {
        CHECK_THROWS_AS(city_from_config(Config::parse_string("[city]\nJ = 3\ngamma1 = 2\nA = 1, 2\n")), ConfigError);
        CHECK_THROWS_AS(city_from_config(Config::parse_string("[city]\nJ = 2\ngamma1 = 2\nxi = -1\n")), ConfigError);
        CHECK_THROWS_AS(city_from_config(Config::parse_string("[city]\ngamma1 = 2\n")), ConfigError);
    }

    TEST_CASE("tracker_from_config")
    {
        TrackerConfig t = tracker_from_config(Config::parse_string("[tracker]\nstep_max = 0.05\nmax_steps = 10\n"));
        CHECK(t.step_max == 0.05);
        CHECK(t.max_steps == 10);
        CHECK_THROWS_AS(tracker_from_config(Config::parse_string("[tracker]\nstep_min = 1\n")), ConfigError);
    }

    TEST_CASE("fmt round-trips doubles")
    {
        for (double v : {0.1, 1.0 / 3, 2.5e-300, -7.25, 6.02214076e23}) CHECK(std::stod(fmt(v)) == v);
        CHECK(fmt(0.1) == "0.10000000000000001");
        CHECK(label(0.67) == "0.67");
    }

    TEST_CASE("equilibria csv")
    {
        City c = fx::fig2_city();
        auto eqs = solve_total_degree(c, rational_approx(2.5), TrackerConfig{}).equilibria;
        std::ostringstream os;
        write_equilibria_csv(os, eqs, 3);
        std::istringstream is(os.str());
        std::string line;
        std::getline(is, line);
        CHECK(line == "eq_id,status,residual,x_1,x_2,x_3,q_1,q_2,q_3,psi_1,psi_2,psi_3");
        std::size_t rows = 0, proper = 0;
        while (std::getline(is, line)) {
            ++rows;
            if (line.find(",proper,") != std::string::npos) ++proper;
        }
        CHECK(rows == eqs.size());
        CHECK(proper == 5);
    }

    TEST_CASE("sha256")
    {
        CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    TEST_CASE("manifest")
    {
        fs::path dir = fs::temp_directory_path() / "eqcont_test_manifest";
        fs::remove_all(dir);
        ensure_directory((dir / "nested").string());
        Manifest m;
        m.config_hash = sha256_hex("x");
        m.seed = 42;
        m.gamma_re = 0.6;
        m.gamma_im = 0.8;
        m.version = library_version();
        m.mode = "enumerate";
        m.files = {"equilibria.csv"};
        write_manifest((dir / "nested").string(), m);
        std::ifstream in(dir / "nested" / "manifest.json");
        auto j = nlohmann::json::parse(in);
        CHECK(j["config_sha256"] == m.config_hash);
        CHECK(j["seed"] == 42);
        CHECK(j["gamma_trick"][0] == 0.6);
        CHECK(j["version"] == library_version());
        CHECK(j["files"][0] == "equilibria.csv");
        fs::remove_all(dir);
    }
}
