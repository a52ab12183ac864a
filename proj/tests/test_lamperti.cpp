#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "maplab/fixtures.hpp"
#include "maplab/lamperti.hpp"

using namespace maplab;

TEST_CASE("deterministic drift gives the closed-form linear path") {
    auto spec = fixtures::deterministic_drift();
    RngStream rng(101, 0);
    auto path = simulate_rssmp(spec, ScalingIndex(1.0), 1.0, 3.0, rng);
    for (double t : {0.0, 0.25, 0.5, 1.0, 2.0, 3.0})
        REQUIRE(std::abs(path.value(t, spec) - (1.0 + t)) <= 1e-9);
    auto neg = simulate_rssmp(spec, ScalingIndex(1.0), -1.0, 3.0, rng);
    for (double t : {0.5, 2.0}) REQUIRE(std::abs(neg.value(t, spec) + (1.0 + t)) <= 1e-9);
}

TEST_CASE("deterministic drift with index two matches the square-root law") {
    auto spec = fixtures::deterministic_drift();
    RngStream rng(102, 0);
    auto path = simulate_rssmp(spec, ScalingIndex(2.0), 1.0, 3.0, rng);
    for (double t : {0.1, 0.5, 1.0, 2.5})
        REQUIRE(std::abs(path.value(t, spec) - std::sqrt(1.0 + 2.0 * t)) <= 1e-9);
}

TEST_CASE("zero additive part leaves the value constant") {
    LevyComponent c;  // all parts zero
    MapSpec spec({{0.0}}, {c});
    RngStream rng(103, 0);
    auto path = simulate_rssmp(spec, ScalingIndex(1.0), 0.7, 2.0, rng);
    for (double t : {0.0, 1.0, 2.0}) REQUIRE(path.value(t, spec) == Catch::Approx(0.7));
}

TEST_CASE("clock inversion is consistent at every node") {
    auto spec = fixtures::brownian_two_state();
    RngStream rng(104, 0);
    auto path = simulate_rssmp(spec, ScalingIndex(1.0), 1.0, 1.0, rng);
    REQUIRE(path.nodes.size() > 10);
    for (const auto& nd : path.nodes) {
        REQUIRE(std::abs(path.map_time(nd.phi) - nd.map_t) <= 1e-10 * (1.0 + nd.map_t));
        REQUIRE(std::abs(path.value(nd.phi, spec)) ==
                Catch::Approx(std::exp(nd.xi_right)).margin(1e-12));
    }
    // phi strictly increasing
    for (std::size_t k = 1; k < path.nodes.size(); ++k)
        REQUIRE(path.nodes[k].phi >= path.nodes[k - 1].phi);
}

TEST_CASE("deterministic first exit has the closed-form time") {
    auto spec = fixtures::deterministic_drift();
    RngStream rng(105, 0);
    auto ex = first_exit(spec, ScalingIndex(1.0), 0.5, 1.0, rng);
    REQUIRE(std::abs(ex.t_exit - 0.5) <= 1e-9);
    REQUIRE(std::abs(ex.z_exit - 1.0) <= 1e-9);
}

TEST_CASE("exit overshoot law matches the exponential oracle") {
    auto spec = fixtures::exp_jump_drift();
    SeedPlan plan{106, 10000};
    auto over = run_replicated(
        [&](RngStream& rng, std::size_t) {
            auto ex = first_exit(spec, ScalingIndex(1.0), 0.01, 1.0, rng);
            return std::log(std::abs(ex.z_exit));  // = overshoot above log(1)
        },
        plan);
    EmpiricalMeasure m;
    for (double v : over) m.add(v);
    double ks = ks_distance_to(m, [](double x) { return x < 0.0 ? 0.0 : 1.0 - std::exp(-x); });
    REQUIRE(ks <= 0.03);
    for (double v : over) REQUIRE(v >= 0.0);  // |Z| >= eps always
}

TEST_CASE("exit time vanishes as the start approaches the boundary") {
    auto drift = fixtures::deterministic_drift();
    RngStream rng(107, 0);
    auto ex = first_exit(drift, ScalingIndex(1.0), 0.99, 1.0, rng);
    REQUIRE(std::abs(ex.t_exit - 0.01) <= 1e-9);

    // the Brownian fixture creeps, so starting next to the boundary exits fast
    auto spec = fixtures::brownian_two_state();
    SeedPlan plan{108, 1000};
    auto times = run_replicated(
        [&](RngStream& r, std::size_t) {
            return first_exit(spec, ScalingIndex(1.0), 0.99, 1.0, r).t_exit;
        },
        plan);
    EmpiricalMeasure m;
    for (double t : times) m.add(t);
    REQUIRE(m.median() < 0.01);
}

TEST_CASE("exit moment scaling is exact for the deterministic fixture") {
    auto spec = fixtures::deterministic_drift();
    auto rep = exit_moment_scaling(spec, ScalingIndex(1.0), {0.1, 0.05, 0.025}, 0.5, 200, 108);
    for (const auto& r : rep.rows) REQUIRE(r.ratio == Catch::Approx(0.5).margin(1e-9));
    REQUIRE(rep.pass);
}

TEST_CASE("exit moment scaling stabilizes on the jump fixture") {
    auto spec = fixtures::exp_jump_drift();
    auto rep = exit_moment_scaling(spec, ScalingIndex(1.0), {0.1, 0.05, 0.025}, 0.5, 4000, 109);
    REQUIRE(rep.pass);
    auto rep2 = exit_moment_scaling(spec, ScalingIndex(2.0), {0.1, 0.05, 0.025}, 0.5, 4000, 110);
    REQUIRE(rep2.ratio_stable);
}

TEST_CASE("mu_eps stabilizes along the z-schedule and is Markov-consistent") {
    auto spec = fixtures::exp_jump_drift();
    auto rep = estimate_mu_eps(spec, ScalingIndex(1.0), 0.25, 0.1, 4, 4000, 111);
    REQUIRE(rep.stabilized);
    auto cons = mu_eps_consistency(spec, ScalingIndex(1.0), 0.25, 0.5, 10000, 112);
    REQUIRE(cons.pass);
}

TEST_CASE("exit laws from opposite starts mirror each other on the symmetric fixture") {
    auto spec = fixtures::exp_oscillating();
    auto pos = detail::mu_eps_core(spec, ScalingIndex(1.0), 0.5, 0.1, 2, 6000, 113);
    auto neg = detail::mu_eps_core(spec, ScalingIndex(1.0), 0.5, -0.1, 2, 6000, 1113);
    double ks = ks_distance(pos.mu, neg.mu.mirrored());
    REQUIRE(ks <= 0.03);
}

TEST_CASE("self-similarity holds on the Brownian fixture") {
    auto spec = fixtures::brownian_two_state();
    auto rep = check_scaling(spec, ScalingIndex(1.0), 1.0, 2.0, {0.5, 1.0}, 10000, 114);
    REQUIRE(rep.all_pass);
}

TEST_CASE("scaling with c equal one is pure sampling noise") {
    auto spec = fixtures::deterministic_drift();
    auto rep = check_scaling(spec, ScalingIndex(1.0), 0.5, 1.0, {1.0}, 500, 115);
    REQUIRE(rep.rows[0].ks <= 0.03);
}
