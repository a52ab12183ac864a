#pragma once

#include "maplab/map_spec.hpp"

namespace maplab::fixtures {

// Unit positive drift, no noise, one state: the closed-form Lamperti case.
inline MapSpec deterministic_drift() {
    LevyComponent c;
    c.drift = 1.0;
    return MapSpec({{0.0}}, {c});
}

// Drift -1/2 with rate-1 Exp(1) up-jumps in both states: drifts to +infinity,
// crosses levels only by jumps, stationary overshoot Exp(1).
inline MapSpec exp_jump_drift() {
    LevyComponent c;
    c.drift = -0.5;
    c.jump_rate = 1.0;
    c.jump_law = JumpLaw::exponential(1.0);
    return MapSpec({{-1.0, 1.0}, {1.0, -1.0}}, {c, c});
}

// Standard Brownian motion in both states: oscillating, creeping, the
// self-similarity workhorse (alpha-stable-like scaling with sigma constant).
inline MapSpec brownian_two_state() {
    LevyComponent c;
    c.sigma2 = 1.0;
    return MapSpec({{-1.0, 1.0}, {1.0, -1.0}}, {c, c});
}

// Symmetric two-sided Exp(1) jumps at rate 1, no drift or noise: oscillating
// and non-creeping on both sides (discrete ladders everywhere).
inline MapSpec exp_oscillating() {
    LevyComponent c;
    c.jump_rate = 1.0;
    c.jump_law = JumpLaw::two_sided_exponential(1.0, 1.0, 0.5);
    return MapSpec({{-1.0, 1.0}, {1.0, -1.0}}, {c, c});
}

// Oscillating with a quadratic upper tail and bounded downward jumps: the
// tail-overshoot condition fails (overshoots escape).
inline MapSpec pareto_oscillating() {
    // upward Pareto(2) jumps at rate 1/2: mean contribution 0.5 * 2 = 1;
    // downward uniform(-1, 0) jumps at rate 2: mean contribution 2 * (-1/2) = -1
    LevyComponent c;
    c.jump_rate = 2.5;
    c.jump_law = JumpLaw::mixture({{0.5, 0.0, Pareto{2.0, 1.0, +1}},
                                   {2.0, 0.0, Uniform{-1.0, 0.0}}});
    return MapSpec({{-1.0, 1.0}, {1.0, -1.0}}, {c, c});
}

// Oscillating with a very heavy positive tail (index 1.3, mean 13/3): the
// overshoot escapes at a polynomial rate, so the escape is visible at
// moderate levels, unlike the borderline index-2 tail above.
// Mixture weights 3 and 26 make the mean exactly zero: 3*(13/3) - 26/2 = 0.
inline MapSpec pareto_heavy_oscillating() {
    LevyComponent c;
    c.jump_rate = 1.0;
    c.jump_law = JumpLaw::mixture({{3.0, 0.0, Pareto{1.3, 1.0, +1}},
                                   {26.0, 0.0, Uniform{-1.0, 0.0}}});
    return MapSpec({{-1.0, 1.0}, {1.0, -1.0}}, {c, c});
}

// Pure-jump two-sided exponential with downward bias: drifts to -infinity,
// non-creeping on both sides; the occupation-formula fixture.
inline MapSpec exp_drift_down() {
    LevyComponent c;
    c.jump_rate = 1.0;
    c.jump_law = JumpLaw::two_sided_exponential(1.0, 1.0, 0.3);
    return MapSpec({{-1.0, 1.0}, {1.0, -1.0}}, {c, c});
}

}  // namespace maplab::fixtures
