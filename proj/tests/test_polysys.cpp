#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <eqcont/errors.hpp>
#include <eqcont/polysys.hpp>

#include "fixtures.hpp"

using namespace eqcont;

namespace {

// Σ_{m<=n} u^m / m!
double taylor_exp(double u, int n)
{
    double term = 1, s = 1;
    for (int m = 1; m <= n; ++m) {
        term *= u / m;
        s += term;
    }
    return s;
}

std::vector<double> real_coeffs(const PolySystem& sys, int eq)
{
    std::vector<double> c;
    for (const auto& t : sys.equation(eq)) c.push_back(t.coeff.real());
    std::sort(c.begin(), c.end());
    return c;
}

}  // namespace

TEST_SUITE("polysys")
{
    TEST_CASE("rational_approx")
    {
        CHECK(rational_approx(2.5) == Rational{5, 2});
        CHECK(rational_approx(0.0) == Rational{0, 1});
        CHECK(rational_approx(2.003, 1e-6, 10000) == Rational{2003, 1000});
        CHECK(rational_approx(3.0) == Rational{3, 1});
        CHECK_THROWS_AS(rational_approx(2.003), ApproximationInfeasible);
    }

    TEST_CASE("build_static_system: three-location city")
    {
        City c = City::line(3, 2.5, 1.0);
        PolySystem sys = build_static_system(c, Rational{5, 2});
        REQUIRE(sys.nvars() == 3);
        auto got = real_coeffs(sys, 0);
        std::vector<double> want = {1, 1, 1, -1, -std::exp(-1.0), -std::exp(-2.0)};
        std::sort(want.begin(), want.end());
        REQUIRE(got.size() == want.size());
        for (std::size_t k = 0; k < want.size(); ++k) CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-15));
        for (int d : sys.degrees()) CHECK(d == 7);
        // z_1^5 z_1^2 term
        bool found = false;
        for (const auto& t : sys.equation(0))
            if (t.exps == std::vector<int>{7, 0, 0}) found = true;
        CHECK(found);
    }

    TEST_CASE("build_static_system: one location")
    {
        City c = City::line(1, 2.5, 1.0);
        PolySystem sys = build_static_system(c, Rational{5, 2});
        REQUIRE(sys.equation(0).size() == 2);
        CHECK(std::abs(sys.eval(CVec::Ones(1))[0]) < 1e-15);
        CVec z = CVec::Constant(1, 1.5);
        CHECK(std::abs(sys.eval(z)[0] - (std::pow(1.5, 7) - std::pow(1.5, 5))) < 1e-12);
    }

    TEST_CASE("build_static_system: homogeneous city is permutation invariant")
    {
        City c = fx::prop4_city(3);
        PolySystem sys = build_static_system(c, Rational{2, 1});
        auto row0 = real_coeffs(sys, 0);
        CHECK(real_coeffs(sys, 1) == row0);
        CHECK(real_coeffs(sys, 2) == row0);
        CVec z(3);
        z << cplx(0.3, 0.1), cplx(-0.7, 0.2), cplx(1.1, -0.4);
        CVec zp(3);
        zp << z[2], z[0], z[1];
        CVec f = sys.eval(z), fp = sys.eval(zp);
        CHECK(std::abs(fp[0] - f[2]) < 1e-13);
        CHECK(std::abs(fp[1] - f[0]) < 1e-13);
        CHECK(std::abs(fp[2] - f[1]) < 1e-13);
    }

    TEST_CASE("eval_jac matches finite differences")
    {
        City c = City::random_line(3, 2.5, 0.0, 1.0, 0.5, 9);
        PolySystem sys = build_static_system(c, Rational{5, 2});
        CVec z(3);
        z << cplx(0.8, 0.1), cplx(0.6, -0.3), cplx(1.1, 0.2);
        CVec f;
        CMat jac;
        sys.eval_jac(z, f, jac);
        CHECK((f - sys.eval(z)).cwiseAbs().maxCoeff() < 1e-14);
        const double h = 1e-7;
        for (int k = 0; k < 3; ++k) {
            CVec zp = z, zm = z;
            zp[k] += h;
            zm[k] -= h;
            CVec col = (sys.eval(zp) - sys.eval(zm)) / (2 * h);
            CHECK((col - jac.col(k)).cwiseAbs().maxCoeff() < 1e-6);
        }
    }

    TEST_CASE("polysystem text round trip")
    {
        PolySystem sys = build_static_system(City::random_line(3, 2.5, 0.0, 1.0, 0.5, 4), Rational{5, 2});
        std::stringstream ss;
        write_polysystem(ss, sys);
        PolySystem back = read_polysystem(ss);
        CVec z(3);
        z << cplx(0.4, 0.2), cplx(0.9, -0.1), cplx(-0.3, 0.5);
        CHECK((back.eval(z) - sys.eval(z)).cwiseAbs().maxCoeff() == 0.0);
        CHECK(back.meta.p == 5);
        CHECK(back.meta.q == 2);
    }

    TEST_CASE("start_total_degree")
    {
        auto [s22, st22] = start_total_degree({2, 2});
        REQUIRE(st22.points.size() == 4);
        for (const auto& z : st22.points)
            for (int k = 0; k < 2; ++k) {
                CHECK(std::abs(z[k].imag()) < 1e-15);
                CHECK(std::abs(std::abs(z[k].real()) - 1.0) < 1e-15);
            }

        auto [s7, st7] = start_total_degree({7, 7, 7});
        REQUIRE(st7.points.size() == 343);
        // z^7 - 1 of the stored doubles, evaluated in extended precision.
        long double worst = 0;
        for (const auto& z : st7.points)
            for (int k = 0; k < 3; ++k) {
                std::complex<long double> w(z[k].real(), z[k].imag()), p = 1;
                for (int m = 0; m < 7; ++m) p *= w;
                worst = std::max(worst, std::abs(p - 1.0L));
            }
        CHECK(worst < 1e-15L);
        for (const auto& z : st7.points) CHECK(s7.eval(z).cwiseAbs().maxCoeff() < 1e-14);

        CHECK(start_total_degree({3, 3, 3}).second.points.size() == 27);
        CHECK(bezout_count({9, 9, 9, 9}) == 6561);
        CHECK_THROWS_AS(start_total_degree({9, 9, 9, 9}, 1000), PathBudgetExceeded);
    }

    TEST_CASE("start_homogeneous: two locations, q = 2")
    {
        City c = City::line(2, 2.5, 1.0);
        auto [sys, st] = start_homogeneous(c, Rational{5, 2});
        // Mixed signs give z1^5 + z2^5 = 0, which every equation vanishes on.
        REQUIRE(st.points.size() == 2);
        const double e = std::exp(1.0);
        for (const auto& z : st.points) {
            cplx S = std::pow(z[0], 5) + std::pow(z[1], 5);
            for (int j = 0; j < 2; ++j) {
                CHECK(std::abs(std::abs(z[j].real()) - std::sqrt(e)) < 1e-12);
                CHECK(std::abs(z[j] * z[j] * S - e * S) < 1e-12);
            }
            CHECK(sys.eval(z).cwiseAbs().maxCoeff() < 1e-12);
        }
    }

    TEST_CASE("start_homogeneous: weight level 3/e")
    {
        City c = City::line(3, 2.5, 1.0);
        const double level = 3 * std::exp(-1.0);
        auto [sys, st] = start_homogeneous(c, Rational{5, 2}, level);
        REQUIRE(!st.points.empty());
        for (const auto& z : st.points) CHECK(std::abs(z[0] * z[0] - level) < 1e-12);
    }

    TEST_CASE("start_homogeneous: odd q gives one real start")
    {
        City c = City::line(3, 2.0, 1.0);
        auto [sys, st] = start_homogeneous(c, Rational{2, 1});
        REQUIRE(st.points.size() == 1);
        for (int k = 0; k < 3; ++k) CHECK(std::abs(st.points[0][k] - std::exp(1.0)) < 1e-12);
    }

    TEST_CASE("build_maclaurin_system: one location, first order")
    {
        City c = City::line(1, 2.0, 1.0);
        c.A[0] = 0.0;
        MaclaurinOptions opt;
        opt.population = 1.0;
        PolySystem sys = build_maclaurin_system(c, 1, opt);
        CHECK(std::abs(sys.eval(CVec::Ones(1))[0]) < 1e-15);
        // (1 + γΨ)Ψ - (1 + γΨ) at Ψ = 3
        CHECK(std::abs(sys.eval(CVec::Constant(1, 3.0))[0] - 14.0) < 1e-12);
    }

    TEST_CASE("build_maclaurin_system: coefficients against direct evaluation")
    {
        City c = City::line(4, 5.0, 2.0);
        c.L1 = 1.0;
        MaclaurinOptions opt;
        opt.population = 1.0;
        const int n = 8;
        PolySystem sys = build_maclaurin_system(c, n, opt);
        CHECK(sys.max_degree() == n + 1);
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0.05, 0.6);
        for (int trial = 0; trial < 5; ++trial) {
            Vec psi(4);
            for (int k = 0; k < 4; ++k) psi[k] = u(rng);
            std::vector<double> e(4);
            double tot = 0;
            for (int k = 0; k < 4; ++k) {
                double arg = c.A[k] + c.gamma1 * psi[k];
                e[k] = taylor_exp(arg, n);
                tot += e[k];
                // Lagrange remainder bound of the truncated exponential
                double bound = std::exp(std::abs(arg)) * std::pow(std::abs(arg), n + 1) / std::tgamma(n + 2.0);
                CHECK(std::abs(std::exp(arg) - e[k]) <= bound);
            }
            CVec f = sys.eval(psi.cast<cplx>());
            for (int j = 0; j < 4; ++j) {
                double want = psi[j] * tot;
                for (int k = 0; k < 4; ++k) want -= std::exp(-2.0 * std::abs(j - k)) * e[k];
                CHECK(std::abs(f[j] - want) < 1e-10 * (1 + std::abs(want)));
            }
        }
    }

    TEST_CASE("maclaurin order bounds")
    {
        City c = City::line(2, 2.0, 1.0);
        CHECK_THROWS_AS(build_maclaurin_system(c, 0), DomainError);
        CHECK_THROWS_AS(build_maclaurin_system(c, 21), OverflowRisk);
    }
}
