#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "maplab/entrance.hpp"
#include "maplab/fixtures.hpp"

using namespace maplab;

TEST_CASE("sampler refuses a model whose overshoot law is not tight") {
    auto spec = fixtures::pareto_oscillating();
    EntranceConfig cfg;
    REQUIRE_THROWS_AS(EntranceSampler(spec, ScalingIndex(1.0), cfg, 500, 201),
                      std::runtime_error);
}

TEST_CASE("entrance marginals stabilize under epsilon-halving") {
    auto spec = fixtures::exp_jump_drift();
    std::vector<EmpiricalMeasure> laws;
    std::uint64_t seed = 202;
    for (double eps : {0.05, 0.025}) {
        EntranceConfig cfg;
        cfg.eps = eps;
        EntranceSampler sampler(spec, ScalingIndex(1.0), cfg, 4000, seed);
        SeedPlan plan{derive_seed(seed, "marg-" + std::to_string(eps)), 4000};
        auto vals = run_replicated(
            [&](RngStream& rng, std::size_t) { return sampler.sample(1.0, rng).value(1.0, spec); },
            plan);
        EmpiricalMeasure m;
        for (double v : vals) m.add(v);
        laws.push_back(std::move(m));
    }
    REQUIRE(ks_distance(laws[0], laws[1]) <= 0.03);
}

TEST_CASE("the full convergence report passes on the drifting fixture") {
    auto spec = fixtures::exp_jump_drift();
    auto rep = convergence_report(spec, ScalingIndex(1.0), {0.1, 0.05, 0.025}, 4000, 203);
    REQUIRE(rep.condition_holds);
    REQUIRE(rep.exit_moments.pass);
    REQUIRE(rep.mu_stability.stabilized);
    REQUIRE(rep.no_zero_visits);
    REQUIRE(rep.post_exit_pass);
    REQUIRE(rep.pass);
}

TEST_CASE("necessity witness decays when the condition fails") {
    auto spec = fixtures::pareto_heavy_oscillating();
    REQUIRE_FALSE(check_condition(spec).holds);
    double eps = 0.1;
    std::vector<double> zs;
    for (double level : {2.0, 4.0, 8.0, 12.0}) zs.push_back(eps * std::exp(-level));
    ExitOptions opts;
    opts.max_events = 500'000;
    auto rep =
        necessity_witness(spec, ScalingIndex(1.0), eps, 10.0 * eps, zs, 1500, 204, opts);
    REQUIRE_FALSE(rep.vacuous);
    REQUIRE(rep.probs.size() == 4);
    REQUIRE(rep.decaying);
}

TEST_CASE("necessity witness is vacuous when the condition holds") {
    auto spec = fixtures::exp_jump_drift();
    auto rep = necessity_witness(spec, ScalingIndex(1.0), 1.0, 2.0, {0.5, 0.25}, 100, 205);
    REQUIRE(rep.vacuous);
}

TEST_CASE("oscillating entrance concatenates through the level and respects symmetry") {
    auto spec = fixtures::exp_oscillating();
    EntranceConfig cfg;
    cfg.eps = 0.05;
    cfg.oscillating_level = 1.0;
    EntranceSampler sampler(spec, ScalingIndex(1.0), cfg, 3000, 206);
    SeedPlan plan{derive_seed(std::uint64_t{206}, "osc-draws"), 3000};
    auto vals = run_replicated(
        [&](RngStream& rng, std::size_t) {
            auto path = sampler.sample(2.0, rng);
            // a deep clock stall can truncate the path before the horizon;
            // those rare draws carry the flag and are skipped below
            if (path.truncated || path.horizon() < 2.0)
                return std::numeric_limits<double>::quiet_NaN();
            double v = path.value(2.0, spec);
            REQUIRE(v != 0.0);
            return v;
        },
        plan);
    EmpiricalMeasure m;
    std::size_t skipped = 0;
    for (double v : vals) {
        if (std::isnan(v))
            ++skipped;
        else
            m.add(v);
    }
    REQUIRE(skipped <= vals.size() / 100);
    REQUIRE(ks_distance(m, m.mirrored()) <= 0.03);
}

TEST_CASE("empirical time offset shifts the path origin") {
    auto spec = fixtures::exp_jump_drift();
    EntranceConfig zero_cfg;
    zero_cfg.eps = 0.05;
    EntranceConfig emp_cfg = zero_cfg;
    emp_cfg.policy = TimeOriginPolicy::empirical_offset;
    EntranceSampler zs(spec, ScalingIndex(1.0), zero_cfg, 2000, 207);
    EntranceSampler es(spec, ScalingIndex(1.0), emp_cfg, 2000, 207);
    RngStream rng(208, 0);
    auto pz = zs.sample(1.0, rng);
    auto pe = es.sample(1.0, rng);
    REQUIRE(pz.nodes.front().phi == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(pe.nodes.front().phi > 0.0);
}
