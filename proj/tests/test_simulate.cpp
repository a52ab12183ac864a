#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "maplab/analysis.hpp"
#include "maplab/mc.hpp"
#include "maplab/simulate.hpp"
#include "maplab/stats.hpp"

using namespace maplab;

namespace {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

MapSpec mixed_spec() {
    LevyComponent c0, c1;
    c0.drift = 0.3;
    c0.sigma2 = 0.8;
    c1.drift = -0.4;
    c1.jump_rate = 1.5;
    c1.jump_law = JumpLaw::two_sided_exponential(2.0, 3.0, 0.5);
    std::vector<std::vector<JumpLaw>> d(2, std::vector<JumpLaw>(2, JumpLaw::point_mass(0.0)));
    d[0][1] = JumpLaw::uniform(-0.3, 0.3);
    d[1][0] = JumpLaw::point_mass(0.1);
    return MapSpec({{-1.2, 1.2}, {0.7, -0.7}}, {c0, c1}, d);
}

}  // namespace

TEST_CASE("terminal transform matches the matrix exponent") {
    auto spec = mixed_spec();
    const double t = 1.5;
    std::complex<double> z(0.4, 0.6);
    auto exact = transform_matrix(spec, z, t);

    SeedPlan plan{777, 40000};
    struct Obs {
        std::complex<double> v;
        int j;
    };
    auto res = run_replicated(
        [&](RngStream& rng, std::size_t) {
            auto p = simulate_path(spec, 0, t, rng);
            return Obs{std::exp(z * p.final_position()), p.final_state()};
        },
        plan);
    for (int j = 0; j < 2; ++j) {
        SummaryStat sr, si;
        for (const auto& o : res) {
            sr.add(o.j == j ? o.v.real() : 0.0);
            si.add(o.j == j ? o.v.imag() : 0.0);
        }
        std::complex<double> mc(sr.mean(), si.mean());
        double se = std::sqrt(sr.variance() + si.variance()) /
                    std::sqrt(static_cast<double>(res.size()));
        REQUIRE(std::abs(mc - exact(0, j)) < 4.0 * se + 1e-6);
    }
}

TEST_CASE("modulator occupation matches the chain exponential") {
    auto spec = mixed_spec();
    const double t = 2.0;
    auto p0 = transform_matrix(spec, 0.0, t);  // reduces to e^{Qt}
    SeedPlan plan{778, 20000};
    auto res = run_replicated(
        [&](RngStream& rng, std::size_t) {
            return simulate_path(spec, 1, t, rng).final_state();
        },
        plan);
    double frac = 0.0;
    for (int j : res) frac += (j == 0);
    frac /= static_cast<double>(res.size());
    double exact = p0(1, 0).real();
    double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(res.size()));
    REQUIRE(std::abs(frac - exact) < 4.0 * se + 1e-9);
}

TEST_CASE("killing produces the right survival probability") {
    LevyComponent c;
    c.drift = 1.0;
    c.kill_rate = 0.8;
    MapSpec spec({{0.0}}, {c});
    SeedPlan plan{779, 20000};
    auto res = run_replicated(
        [&](RngStream& rng, std::size_t) { return simulate_path(spec, 0, 1.0, rng).killed; },
        plan);
    double frac = 0.0;
    for (bool k : res) frac += k;
    frac /= static_cast<double>(res.size());
    double exact = 1.0 - std::exp(-0.8);
    REQUIRE(std::abs(frac - exact) <
            4.0 * std::sqrt(exact * (1.0 - exact) / static_cast<double>(res.size())));
}

TEST_CASE("brownian first passage law via bridge crossings") {
    LevyComponent c0, c1;
    c0.sigma2 = 1.0;
    c1.sigma2 = 1.0;
    MapSpec spec({{-1.0, 1.0}, {1.0, -1.0}}, {c0, c1});
    const double a = 1.0, cap = 50.0;
    PassageOptions opts;
    opts.time_cap = cap;
    SeedPlan plan{781, 8000};
    auto res = run_replicated(
        [&](RngStream& rng, std::size_t) { return first_passage_up(spec, 0, a, rng, opts); },
        plan);
    EmpiricalMeasure times;
    std::size_t reached = 0;
    for (const auto& s : res) {
        REQUIRE((s.reached || s.censored));
        if (s.reached) {
            REQUIRE(s.creeping);
            REQUIRE(s.overshoot == 0.0);
            times.add(s.time);
            ++reached;
        }
    }
    double p_cap = 2.0 * (1.0 - norm_cdf(a / std::sqrt(cap)));
    double frac = static_cast<double>(reached) / static_cast<double>(res.size());
    REQUIRE(std::abs(frac - p_cap) <
            4.0 * std::sqrt(p_cap * (1.0 - p_cap) / static_cast<double>(res.size())) + 0.005);
    auto cond_cdf = [&](double t) {
        if (t <= 0.0) return 0.0;
        return 2.0 * (1.0 - norm_cdf(a / std::sqrt(t))) / p_cap;
    };
    REQUIRE(ks_distance_to(times, cond_cdf) < 0.03);
}

TEST_CASE("jump overshoots above a level are memoryless for exponential jumps") {
    LevyComponent c;
    c.drift = -0.5;
    c.jump_rate = 1.0;
    c.jump_law = JumpLaw::exponential(1.0);
    MapSpec spec({{-0.6, 0.6}, {0.6, -0.6}}, {c, c});
    SeedPlan plan{782, 8000};
    auto res = run_replicated(
        [&](RngStream& rng, std::size_t) { return first_passage_up(spec, 0, 2.0, rng); }, plan);
    EmpiricalMeasure over;
    for (const auto& s : res) {
        REQUIRE(s.reached);
        REQUIRE_FALSE(s.creeping);
        over.add(s.overshoot);
    }
    REQUIRE(ks_distance_to(over, [](double x) {
                return x <= 0.0 ? 0.0 : 1.0 - std::exp(-x);
            }) < 0.03);
}

TEST_CASE("drift-only passage is exact and the exponential clock integrates the path") {
    LevyComponent c;
    c.drift = 1.0;
    MapSpec spec({{0.0}}, {c});
    RngStream rng(5, 0);
    PassageOptions opts;
    opts.clock_alpha = 1.0;
    auto s = first_passage_up(spec, 0, 2.5, rng, opts);
    REQUIRE(s.reached);
    REQUIRE(s.creeping);
    REQUIRE(s.time == Catch::Approx(2.5));
    REQUIRE(s.clock == Catch::Approx(std::exp(2.5) - 1.0).epsilon(1e-9));
}

TEST_CASE("downward passage mirrors upward passage of the reflected process") {
    LevyComponent c;
    c.drift = 0.5;
    c.jump_rate = 1.0;
    c.jump_law = JumpLaw::exponential(1.0, -1);
    MapSpec spec({{0.0}}, {c});
    SeedPlan plan{783, 6000};
    auto res = run_replicated(
        [&](RngStream& rng, std::size_t) { return first_passage_down(spec, 0, 1.5, rng); }, plan);
    EmpiricalMeasure over;
    for (const auto& s : res) {
        REQUIRE(s.reached);
        over.add(s.overshoot);
    }
    REQUIRE(ks_distance_to(over, [](double x) {
                return x <= 0.0 ? 0.0 : 1.0 - std::exp(-x);
            }) < 0.03);
}

TEST_CASE("skeleton increments of brownian modulation are gaussian") {
    LevyComponent c;
    c.sigma2 = 2.0;
    MapSpec spec({{-1.0, 1.0}, {1.0, -1.0}}, {c, c});
    RngStream rng(6, 0);
    const double h = 0.25;
    EmpiricalMeasure inc;
    for (int rep = 0; rep < 40; ++rep) {
        auto sk = skeleton_chain(spec, 0, h, 200, rng);
        double prev = 0.0;
        for (double x : sk.positions) {
            inc.add(x - prev);
            prev = x;
        }
    }
    double sd = std::sqrt(2.0 * h);
    REQUIRE(ks_distance_to(inc, [&](double x) { return norm_cdf(x / sd); }) < 0.03);
}

TEST_CASE("maximum at an exponential horizon is exponential for brownian motion") {
    LevyComponent c;
    c.sigma2 = 1.0;
    MapSpec spec({{-1.0, 1.0}, {1.0, -1.0}}, {c, c});
    const double q = 0.5;
    SeedPlan plan{784, 10000};
    auto res = run_replicated(
        [&](RngStream& rng, std::size_t) {
            return sample_at_exponential_horizon(spec, 0, q, rng);
        },
        plan);
    EmpiricalMeasure maxima, drawdown;
    SummaryStat m;
    for (const auto& s : res) {
        maxima.add(s.max);
        drawdown.add(s.max - s.final_position);
        m.add(s.max);
    }
    double rate = std::sqrt(2.0 * q);
    REQUIRE(ks_distance_to(maxima, [&](double x) {
                return x <= 0.0 ? 0.0 : 1.0 - std::exp(-rate * x);
            }) < 0.03);
    REQUIRE(std::abs(m.mean() - 1.0 / rate) < 4.0 * m.standard_error());
    // duality: the drawdown at e_q is distributed as the maximum
    REQUIRE(ks_distance(maxima, drawdown) < 0.03);
}
