#pragma once

// The acceptance suite: one numbered, self-contained check per release
// criterion, each with its tolerance pinned in code. Both the standalone
// acceptance binary and the `verify-all` subcommand run this suite.

#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "maplab/analysis.hpp"
#include "maplab/entrance.hpp"
#include "maplab/fixtures.hpp"
#include "maplab/fluctuation.hpp"
#include "maplab/lamperti.hpp"
#include "maplab/serialize.hpp"

namespace maplab {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace acceptance {

// 1. F(0) recovers the rate matrix to machine precision on every fixture.
inline CriterionResult matrix_exponent_at_zero() {
    CriterionResult r{1, "matrix exponent at zero equals the rate matrix", true, ""};
    double worst = 0.0;
    for (const auto& spec :
         {fixtures::deterministic_drift(), fixtures::exp_jump_drift(),
          fixtures::brownian_two_state(), fixtures::exp_oscillating(),
          fixtures::pareto_oscillating(), fixtures::exp_drift_down(),
          fixtures::pareto_heavy_oscillating()}) {
        auto f0 = matrix_exponent(spec, 0.0);
        const auto& q = spec.rate_matrix();
        for (std::size_t i = 0; i < spec.num_states(); ++i)
            for (std::size_t j = 0; j < spec.num_states(); ++j)
                worst = std::max(worst, std::abs(f0(static_cast<Eigen::Index>(i),
                                                    static_cast<Eigen::Index>(j)) -
                                                 q[i][j]));
    }
    r.pass = worst <= 1e-12;
    r.detail = "max |F(0)-Q| = " + csv_format(worst);
    return r;
}

// 2. exp(F(z)t) against the Monte Carlo characteristic matrix, 4 SE.
inline CriterionResult characteristic_matrix(std::uint64_t seed) {
    CriterionResult r{2, "transform matrix matches Monte Carlo characteristics", true, ""};
    auto spec = fixtures::exp_jump_drift();
    const double t = 1.0;
    const std::size_t n = 100'000;
    double worst_ratio = 0.0;
    for (double zi : {0.5, 1.0, 2.0}) {
        std::complex<double> z(0.0, zi);
        auto exact = transform_matrix(spec, z, t);
        for (std::size_t i = 0; i < spec.num_states(); ++i) {
            SeedPlan plan{derive_seed(seed, "acc2-" + std::to_string(zi) + "-" +
                                                std::to_string(i)),
                          n};
            struct Obs {
                std::complex<double> v;
                int j;
            };
            auto res = run_replicated(
                [&](RngStream& rng, std::size_t) {
                    auto p = simulate_path(spec, static_cast<int>(i), t, rng);
                    return Obs{std::exp(z * p.final_position()), p.final_state()};
                },
                plan);
            for (std::size_t j = 0; j < spec.num_states(); ++j) {
                SummaryStat sr, si;
                for (const auto& o : res) {
                    bool hit = o.j == static_cast<int>(j);
                    sr.add(hit ? o.v.real() : 0.0);
                    si.add(hit ? o.v.imag() : 0.0);
                }
                std::complex<double> mc(sr.mean(), si.mean());
                double se = std::sqrt(sr.variance() + si.variance()) /
                            std::sqrt(static_cast<double>(res.size()));
                double err = std::abs(mc - exact(static_cast<Eigen::Index>(i),
                                                 static_cast<Eigen::Index>(j)));
                worst_ratio = std::max(worst_ratio, err / (4.0 * se + 1e-9));
                if (err > 4.0 * se + 1e-9) r.pass = false;
            }
        }
    }
    r.detail = "worst |err|/(4 SE) = " + csv_format(worst_ratio);
    return r;
}

// 3. Increment duality: pi_i E^{0,i}[e^{iz xi_t}; J_t=j] equals
//    pi_j Ehat^{0,j}[e^{-iz xi_t}; J_t=i], by Monte Carlo on both sides, 4 SE.
inline CriterionResult increment_duality(std::uint64_t seed) {
    CriterionResult r{3, "increment duality between the process and its dual", true, ""};
    auto spec = fixtures::exp_jump_drift();
    auto dual = dual_spec(spec);
    auto pi = spec.stationary_distribution();
    const double t = 1.0;
    const std::size_t n = 100'000;
    std::complex<double> z(0.0, 1.0);
    auto side = [&](const MapSpec& s, std::complex<double> zz, int init,
                    const std::string& tag) {
        SeedPlan plan{derive_seed(seed, tag), n};
        struct Obs {
            std::complex<double> v;
            int j;
        };
        return run_replicated(
            [&](RngStream& rng, std::size_t) {
                auto p = simulate_path(s, init, t, rng);
                return Obs{std::exp(zz * p.final_position()), p.final_state()};
            },
            plan);
    };
    double worst_ratio = 0.0;
    for (std::size_t i = 0; i < spec.num_states(); ++i) {
        auto fwd = side(spec, z, static_cast<int>(i), "acc3-f" + std::to_string(i));
        for (std::size_t j = 0; j < spec.num_states(); ++j) {
            auto bwd = side(dual, -z, static_cast<int>(j), "acc3-b" + std::to_string(j));
            SummaryStat fr, fi2, br, bi;
            for (const auto& o : fwd) {
                bool hit = o.j == static_cast<int>(j);
                fr.add(hit ? o.v.real() : 0.0);
                fi2.add(hit ? o.v.imag() : 0.0);
            }
            for (const auto& o : bwd) {
                bool hit = o.j == static_cast<int>(i);
                br.add(hit ? o.v.real() : 0.0);
                bi.add(hit ? o.v.imag() : 0.0);
            }
            std::complex<double> lhs = pi[i] * std::complex<double>(fr.mean(), fi2.mean());
            std::complex<double> rhs = pi[j] * std::complex<double>(br.mean(), bi.mean());
            double se = pi[i] * std::sqrt(fr.variance() + fi2.variance()) /
                            std::sqrt(static_cast<double>(n)) +
                        pi[j] * std::sqrt(br.variance() + bi.variance()) /
                            std::sqrt(static_cast<double>(n));
            double err = std::abs(lhs - rhs);
            worst_ratio = std::max(worst_ratio, err / (4.0 * se + 1e-9));
            if (err > 4.0 * se + 1e-9) r.pass = false;
        }
    }
    r.detail = "worst |lhs-rhs|/(4 SE) = " + csv_format(worst_ratio);
    return r;
}

// 4. Stationary overshoot of the drift-plus-Exp(1)-jump fixture is Exp(1).
inline CriterionResult stationary_overshoot(std::uint64_t seed) {
    CriterionResult r{4, "stationary overshoot law and init-independence", true, ""};
    auto spec = fixtures::exp_jump_drift();
    auto study =
        estimate_stationary_overshoot(spec, {5.0, 10.0}, 10'000, derive_seed(seed, "acc4"));
    double worst = 0.0;
    for (std::size_t li = 0; li < study.levels.size(); ++li) {
        double ks = ks_distance_to(study.laws[li][0], [](double x) {
            return x <= 0.0 ? 0.0 : 1.0 - std::exp(-x);
        });
        worst = std::max({worst, ks, study.ks_between_inits[li]});
    }
    r.pass = worst <= 0.03;
    r.detail = "worst KS = " + csv_format(worst);
    return r;
}

// 5. Deterministic Lamperti closed form Z_t = 1 + t on a 100-point grid.
inline CriterionResult deterministic_lamperti(std::uint64_t seed) {
    CriterionResult r{5, "deterministic Lamperti path matches 1 + t", true, ""};
    auto spec = fixtures::deterministic_drift();
    RngStream rng(derive_seed(seed, "acc5"), 0);
    auto path = simulate_rssmp(spec, ScalingIndex(1.0), 1.0, 5.0, rng);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        double t = 5.0 * static_cast<double>(k) / 99.0;
        worst = std::max(worst, std::abs(path.value(t, spec) - (1.0 + t)));
    }
    r.pass = worst <= 1e-9;
    r.detail = "max |Z_t-(1+t)| = " + csv_format(worst);
    return r;
}

// 6. Exit-time moment scaling E^z[T_eps]/eps^alpha stable within 20%.
inline CriterionResult exit_time_scaling(std::uint64_t seed) {
    CriterionResult r{6, "exit moment scales like eps^alpha", true, ""};
    auto spec = fixtures::exp_jump_drift();
    auto rep = exit_moment_scaling(spec, ScalingIndex(1.0), {0.1, 0.05, 0.025}, 0.5, 10'000,
                                   derive_seed(seed, "acc6"));
    double lo = rep.rows[0].ratio, hi = rep.rows[0].ratio;
    bool decreasing = true;
    for (std::size_t k = 0; k < rep.rows.size(); ++k) {
        lo = std::min(lo, rep.rows[k].ratio);
        hi = std::max(hi, rep.rows[k].ratio);
        if (k > 0 && rep.rows[k].mean_t >= rep.rows[k - 1].mean_t) decreasing = false;
    }
    double spread = (hi - lo) / hi;
    r.pass = spread <= 0.2 && decreasing;
    r.detail = "ratio spread = " + csv_format(spread) +
               (decreasing ? ", means decreasing" : ", means NOT decreasing");
    return r;
}

// 7. Exit-law consistency: resampled mu_{eps'} vs direct mu_{eps'}.
inline CriterionResult exit_law_consistency(std::uint64_t seed) {
    CriterionResult r{7, "exit laws are Markov-consistent across radii", true, ""};
    auto spec = fixtures::exp_jump_drift();
    auto rep =
        mu_eps_consistency(spec, ScalingIndex(1.0), 0.25, 0.5, 10'000, derive_seed(seed, "acc7"));
    r.pass = rep.ks <= 0.03;
    r.detail = "KS = " + csv_format(rep.ks);
    return r;
}

// 8. Self-similarity: c Z_{c^{-alpha} t} under P^z equals Z_t under P^{cz}.
inline CriterionResult self_similarity(std::uint64_t seed) {
    CriterionResult r{8, "self-similar scaling of the transformed path", true, ""};
    auto spec = fixtures::brownian_two_state();
    auto rep = check_scaling(spec, ScalingIndex(1.0), 1.0, 2.0, {0.5, 1.0}, 10'000,
                             derive_seed(seed, "acc8"));
    double worst = 0.0;
    for (const auto& row : rep.rows) worst = std::max(worst, row.ks);
    r.pass = rep.all_pass;
    r.detail = "worst KS = " + csv_format(worst);
    return r;
}

// 9. Splitting at the maximum against the analytic resolvent, 4 SE.
inline CriterionResult wiener_hopf(std::uint64_t seed) {
    CriterionResult r{9, "splitting at the maximum matches the resolvent", true, ""};
    LevyComponent c0, c1;
    c0.drift = 0.2;
    c0.sigma2 = 0.5;
    c1.jump_rate = 1.0;
    c1.jump_law = JumpLaw::two_sided_exponential(2.0, 1.5, 0.5);
    std::vector<std::vector<JumpLaw>> d(2, std::vector<JumpLaw>(2, JumpLaw::point_mass(0.0)));
    d[0][1] = JumpLaw::uniform(-0.4, 0.4);
    MapSpec spec({{-1.5, 1.5}, {0.8, -0.8}}, {c0, c1}, d);
    auto rep = verify_wiener_hopf_splitting(spec, 0.5, {0.0, 0.35, 0.7, 1.05, 1.4}, 100'000,
                                            derive_seed(seed, "acc9"));
    double worst = 0.0;
    for (const auto& e : rep.entries)
        worst = std::max(worst, std::abs(e.lhs - e.rhs) / (4.0 * e.se + 1e-12));
    r.pass = rep.all_pass;
    r.detail = "worst |err|/(4 SE) = " + csv_format(worst);
    return r;
}

// 10. Markov renewal theorem: ladder potential slope 1 within 5%, init-free.
inline CriterionResult markov_renewal(std::uint64_t seed) {
    CriterionResult r{10, "ladder potential grows linearly, slope init-independent", true, ""};
    auto spec = fixtures::exp_jump_drift();
    std::vector<double> grid;
    for (double g = 5.0; g <= 50.0; g += 5.0) grid.push_back(g);
    auto rep =
        check_markov_renewal(spec, LadderSide::ascending, grid, 2000, derive_seed(seed, "acc10"));
    bool slopes_ok = true;
    double worst = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        double total = rep.slope[i][0] + rep.slope[i][1];
        worst = std::max(worst, std::abs(total - 1.0));
        if (std::abs(total - 1.0) > 0.05) slopes_ok = false;
    }
    r.pass = slopes_ok && rep.max_relative_spread <= 0.05;
    r.detail = "worst |slope-1| = " + csv_format(worst) +
               ", init spread = " + csv_format(rep.max_relative_spread);
    return r;
}

// 11. Harmonic martingale at (x, t) in {5,10} x {1,2}, 4 SE.
inline CriterionResult harmonic_martingale(std::uint64_t seed) {
    CriterionResult r{11, "harmonic function is a martingale under killing", true, ""};
    auto spec = fixtures::exp_oscillating();
    auto rep = harmonic_report(spec, {5.0, 10.0}, {1.0, 2.0}, 100'000, derive_seed(seed, "acc11"));
    double worst = 0.0;
    for (const auto& hc : rep.checks)
        worst = std::max(worst, std::abs(hc.lhs_mean - hc.rhs) / (4.0 * hc.lhs_se + 1e-12));
    r.pass = rep.all_pass;
    r.detail = "worst |err|/(4 SE) = " + csv_format(worst);
    return r;
}

// 12. Condition checker trichotomy on the canonical fixtures.
inline CriterionResult condition_trichotomy() {
    CriterionResult r{12, "condition checker classifies the canonical fixtures", true, ""};
    bool a = check_condition(fixtures::exp_jump_drift()).holds;
    bool b = check_condition(fixtures::exp_oscillating()).holds;
    bool c = check_condition(fixtures::pareto_oscillating()).holds;
    r.pass = a && b && !c;
    r.detail = std::string("drift: ") + (a ? "holds" : "fails") +
               ", exp-tails: " + (b ? "holds" : "fails") +
               ", heavy-tail: " + (c ? "holds" : "fails");
    return r;
}

// 13. Entrance stability, post-exit law, and the necessity witness.
inline CriterionResult entrance_stability(std::uint64_t seed) {
    CriterionResult r{13, "entrance law is stable, consistent, and necessary", true, ""};
    auto spec = fixtures::exp_jump_drift();
    ScalingIndex index(1.0);

    // eps-halving stability of the t = 1 marginal
    std::vector<EmpiricalMeasure> laws;
    for (double eps : {0.05, 0.025}) {
        EntranceConfig cfg;
        cfg.eps = eps;
        EntranceSampler sampler(spec, index, cfg, 5000, derive_seed(seed, "acc13-s"));
        SeedPlan plan{derive_seed(seed, "acc13-m" + csv_format(eps)), 10'000};
        auto vals = run_replicated(
            [&](RngStream& rng, std::size_t) { return sampler.sample(1.0, rng).value(1.0, spec); },
            plan);
        EmpiricalMeasure m;
        for (double v : vals) m.add(v);
        laws.push_back(std::move(m));
    }
    double ks_halving = ks_distance(laws[0], laws[1]);

    // post-exit law against the direct small-start exit law
    auto conv = convergence_report(spec, index, {0.1, 0.05, 0.025}, 10'000,
                                   derive_seed(seed, "acc13-c"));

    // necessity witness on the condition-failing fixture
    auto heavy = fixtures::pareto_heavy_oscillating();
    double eps_w = 0.1;
    std::vector<double> zs;
    for (double level : {2.0, 4.0, 8.0, 12.0}) zs.push_back(eps_w * std::exp(-level));
    ExitOptions wopts;
    wopts.max_events = 500'000;
    auto wit = necessity_witness(heavy, index, eps_w, 10.0 * eps_w, zs, 1500,
                                 derive_seed(seed, "acc13-w"), wopts);

    r.pass = ks_halving <= 0.03 && conv.post_exit_pass && !wit.vacuous && wit.decaying;
    r.detail = "halving KS = " + csv_format(ks_halving) +
               ", post-exit KS = " + csv_format(conv.post_exit_ks) +
               ", witness " + csv_format(wit.probs.front()) + " -> " +
               csv_format(wit.probs.back());
    return r;
}

// 14. Conditioned sampler: weighted mass below -5 grows with the horizon.
inline CriterionResult conditioned_trend_check(std::uint64_t seed) {
    CriterionResult r{14, "conditioned ensemble drifts into the negative tail", true, ""};
    auto spec = fixtures::exp_oscillating();
    auto tr = conditioned_trend(spec, -1.0, 0, {1.0, 2.0, 4.0, 8.0}, 5.0, 6000,
                                derive_seed(seed, "acc14"));
    bool strict = true;
    for (std::size_t k = 1; k < tr.fraction_below.size(); ++k)
        if (!(tr.fraction_below[k] > tr.fraction_below[k - 1])) strict = false;
    r.pass = strict;
    std::string seq;
    for (double f : tr.fraction_below) seq += (seq.empty() ? "" : " -> ") + csv_format(f);
    r.detail = "fractions " + seq;
    return r;
}

// 15. Occupation formula with a single fitted constant, relative L1 <= 10%.
inline CriterionResult occupation_formula(std::uint64_t seed) {
    CriterionResult r{15, "occupation times factor through the ladder potentials", true, ""};
    auto spec = fixtures::exp_drift_down();
    std::vector<std::function<double(double)>> fs = {
        [](double) { return 1.0; },
        [](double y) { return y >= 0.0 && y <= 1.0 ? 1.0 : 0.0; },
        [](double y) { return std::exp(-std::abs(y)); },
    };
    auto rep = verify_occupation_formula(spec, {1.0, 2.0}, 0, 0, fs, 4000,
                                         derive_seed(seed, "acc15"));
    r.pass = rep.relative_l1_error <= 0.10;
    r.detail = "relative L1 = " + csv_format(rep.relative_l1_error) +
               ", fitted c = " + csv_format(rep.fitted_constant);
    return r;
}

// Criteria 1-15 in order; 16 (byte-identical reruns) is assembled by callers
// that own the output directories.
inline std::vector<CriterionResult> run_criteria(std::uint64_t seed) {
    return {matrix_exponent_at_zero(),
            characteristic_matrix(seed),
            increment_duality(seed),
            stationary_overshoot(seed),
            deterministic_lamperti(seed),
            exit_time_scaling(seed),
            exit_law_consistency(seed),
            self_similarity(seed),
            wiener_hopf(seed),
            markov_renewal(seed),
            harmonic_martingale(seed),
            condition_trichotomy(),
            entrance_stability(seed),
            conditioned_trend_check(seed),
            occupation_formula(seed)};
}

// Write the per-criterion summary file for a run.
inline void write_summary(const std::vector<CriterionResult>& results,
                          const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << "id,name,pass,detail\n";
    for (const auto& cr : results)
        out << cr.id << ",\"" << cr.name << "\"," << (cr.pass ? 1 : 0) << ",\"" << cr.detail
            << "\"\n";
}

inline bool files_identical(const std::string& a, const std::string& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) return false;
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    return sa.str() == sb.str();
}

// Full verify-all: criteria 1-15, artifacts written to out_dir, then the whole
// suite re-run into a sibling directory to check byte-identical determinism.
inline std::vector<CriterionResult> run_all(std::uint64_t seed, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    auto results = run_criteria(seed);
    write_summary(results, out_dir + "/acceptance.csv");

    std::string rerun_dir = out_dir + "/rerun";
    fs::create_directories(rerun_dir);
    auto again = run_criteria(seed);
    write_summary(again, rerun_dir + "/acceptance.csv");

    CriterionResult det{16, "verify-all is byte-identical under a fixed seed", true, ""};
    det.pass = files_identical(out_dir + "/acceptance.csv", rerun_dir + "/acceptance.csv");
    det.detail = det.pass ? "rerun file matches byte for byte" : "rerun file differs";
    results.push_back(det);
    write_summary(results, out_dir + "/acceptance.csv");
    return results;
}

}  // namespace acceptance
}  // namespace maplab
