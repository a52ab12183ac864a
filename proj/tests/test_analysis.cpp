#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "maplab/analysis.hpp"

using namespace maplab;

namespace {

MapSpec two_state_exp() {
    LevyComponent c0, c1;
    c0.drift = -0.5;
    c0.jump_rate = 1.0;
    c0.jump_law = JumpLaw::exponential(1.0);
    c1.drift = -0.5;
    c1.jump_rate = 1.0;
    c1.jump_law = JumpLaw::exponential(1.0);
    return MapSpec({{-1.0, 1.0}, {1.0, -1.0}}, {c0, c1});
}

}  // namespace

TEST_CASE("matrix exponent reduces to the scalar exponent for one state") {
    LevyComponent c;
    c.drift = 1.5;
    c.sigma2 = 2.0;
    c.jump_rate = 0.7;
    c.jump_law = JumpLaw::exponential(3.0);
    MapSpec spec({{0.0}}, {c});
    std::complex<double> z(0.4, 1.1);
    auto f = matrix_exponent(spec, z);
    auto psi = 1.5 * z + z * z + 0.7 * (3.0 / (3.0 - z) - 1.0);
    REQUIRE(std::abs(f(0, 0) - psi) < 1e-12);
}

TEST_CASE("matrix exponent at zero recovers the rate matrix") {
    auto spec = two_state_exp();
    auto f = matrix_exponent(spec, 0.0);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            REQUIRE(std::abs(f(i, j) - spec.rate(i, j)) < 1e-12);
    auto p = transform_matrix(spec, 0.0, 2.5);
    REQUIRE(std::abs(p(0, 0) + p(0, 1) - 1.0) < 1e-12);
    REQUIRE(std::abs(p(1, 0) + p(1, 1) - 1.0) < 1e-12);
}

TEST_CASE("transition jumps enter through off-diagonal transforms") {
    LevyComponent c;
    std::vector<std::vector<JumpLaw>> d(2, std::vector<JumpLaw>(2, JumpLaw::point_mass(0.0)));
    d[0][1] = JumpLaw::point_mass(2.0);
    MapSpec spec({{-1.0, 1.0}, {3.0, -3.0}}, {c, c}, d);
    std::complex<double> z(0.3, 0.0);
    auto f = matrix_exponent(spec, z);
    REQUIRE(std::abs(f(0, 1) - std::exp(0.6)) < 1e-12);
    REQUIRE(std::abs(f(1, 0) - 3.0) < 1e-12);
}

TEST_CASE("dual spec satisfies the exponent duality") {
    LevyComponent c0, c1;
    c0.drift = 0.7;
    c0.sigma2 = 1.3;
    c1.drift = -0.2;
    c1.jump_rate = 2.0;
    c1.jump_law = JumpLaw::two_sided_exponential(3.0, 2.0, 0.4);
    std::vector<std::vector<JumpLaw>> d(2, std::vector<JumpLaw>(2, JumpLaw::point_mass(0.0)));
    d[0][1] = JumpLaw::uniform(-0.5, 0.5);
    d[1][0] = JumpLaw::exponential(4.0, -1);
    MapSpec spec({{-2.0, 2.0}, {1.0, -1.0}}, {c0, c1}, d);
    auto dual = dual_spec(spec);
    auto pi = spec.stationary_distribution();
    std::complex<double> z(0.4, 0.9);
    auto fhat = matrix_exponent(dual, z);
    auto f = matrix_exponent(spec, -z);
    // Fhat(z) = diag(pi)^{-1} F(-z)^T diag(pi)
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            REQUIRE(std::abs(fhat(i, j) - f(j, i) * pi[j] / pi[i]) < 1e-10);
    // dual of the dual recovers the original exponent
    auto back = matrix_exponent(dual_spec(dual), z);
    auto orig = matrix_exponent(spec, z);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) REQUIRE(std::abs(back(i, j) - orig(i, j)) < 1e-10);
}

TEST_CASE("asymptotic drift combines local means and transition jumps") {
    LevyComponent c0, c1;
    c0.drift = 1.0;
    c1.drift = -2.0;
    c1.jump_rate = 3.0;
    c1.jump_law = JumpLaw::exponential(2.0);
    std::vector<std::vector<JumpLaw>> d(2, std::vector<JumpLaw>(2, JumpLaw::point_mass(0.0)));
    d[0][1] = JumpLaw::point_mass(0.25);
    MapSpec spec({{-1.0, 1.0}, {1.0, -1.0}}, {c0, c1}, d);
    // pi = (1/2, 1/2); drift = 0.5*1 + 0.5*(-2 + 3*0.5) + 0.5*1*0.25
    auto m = asymptotic_drift(spec);
    REQUIRE(m);
    REQUIRE(*m == Catch::Approx(0.5 - 0.25 + 0.125));
    REQUIRE(classify_regime(spec) == DriftRegime::driftsUp);
}

TEST_CASE("zero drift classifies as oscillating") {
    LevyComponent c;
    c.sigma2 = 1.0;
    MapSpec spec({{-1.0, 1.0}, {1.0, -1.0}}, {c, c});
    REQUIRE(classify_regime(spec) == DriftRegime::oscillates);
}

TEST_CASE("condition holds for exponentially tailed jumps") {
    auto rep = check_condition(two_state_exp());
    REQUIRE(rep.holds);
    REQUIRE(std::isfinite(rep.integral_estimate));
}

TEST_CASE("condition fails for a quadratic upper tail with light lower tail") {
    LevyComponent c0, c1;
    c0.jump_rate = 0.5;
    c0.jump_law = JumpLaw::pareto(2.0, 1.0);
    c1.jump_rate = 2.0;
    c1.jump_law = JumpLaw::uniform(-1.0, 0.0);
    MapSpec spec({{-1.0, 1.0}, {1.0, -1.0}}, {c0, c1});
    auto rep = check_condition(spec);
    REQUIRE_FALSE(rep.holds);
}

TEST_CASE("condition holds when the lower tail is non-integrable") {
    LevyComponent c0, c1;
    c0.jump_rate = 0.5;
    c0.jump_law = JumpLaw::pareto(1.5, 1.0);
    c1.jump_rate = 0.5;
    c1.jump_law = JumpLaw::pareto(1.0, 1.0, -1);
    MapSpec spec({{-1.0, 1.0}, {1.0, -1.0}}, {c0, c1});
    auto rep = check_condition(spec);
    REQUIRE(rep.holds);
    REQUIRE(rep.integral_estimate == 0.0);
}

TEST_CASE("condition holds via the denominator for heavy two-sided tails") {
    // upper index 1.6, lower index 1.5: integrand exponent 1 - 1.6 - 0.5 = -1.1
    LevyComponent c0, c1;
    c0.jump_rate = 1.0;
    c0.jump_law = JumpLaw::pareto(1.6, 1.0);
    c1.jump_rate = 1.0;
    c1.jump_law = JumpLaw::pareto(1.5, 1.0, -1);
    MapSpec spec({{-1.0, 1.0}, {1.0, -1.0}}, {c0, c1});
    auto rep = check_condition(spec);
    REQUIRE(rep.holds);
}
