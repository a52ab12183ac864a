#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "maplab/map_spec.hpp"
#include "maplab/rng.hpp"

namespace maplab {

enum class EventCause : std::uint8_t {
    start,
    switch_state,  // modulator transition, transition jump applied
    local_jump,    // compound-Poisson jump of the current component
    horizon,       // deterministic or exponential time horizon reached
    killed
};

struct MapEvent {
    double time;
    EventCause cause;
    int state;               // modulator state right after the event
    double position;         // xi right after the event
    double position_before;  // xi just before any jump carried by this event
};

struct MapPath {
    std::vector<MapEvent> events;
    bool killed = false;
    bool truncated = false;  // event budget exhausted before the horizon

    double final_time() const { return events.back().time; }
    double final_position() const { return events.back().position; }
    int final_state() const { return events.back().state; }
};

struct SimulateOptions {
    std::size_t max_events = 10'000'000;
};

// Exact event-driven simulation of (xi, J) started from (0, state0) up to a
// deterministic horizon. Between events xi moves as a_i t + sigma_i B_t; the
// Gaussian increment over each inter-event gap is sampled exactly.
inline MapPath simulate_path(const MapSpec& spec, int state0, double horizon, RngStream& rng,
                             const SimulateOptions& opts = {}) {
    if (state0 < 0 || static_cast<std::size_t>(state0) >= spec.num_states())
        throw std::invalid_argument("start state out of range");
    if (horizon < 0.0) throw std::invalid_argument("negative horizon");
    MapPath path;
    path.events.push_back({0.0, EventCause::start, state0, 0.0, 0.0});
    double t = 0.0, x = 0.0;
    int s = state0;
    while (path.events.size() < opts.max_events) {
        const auto& c = spec.component(static_cast<std::size_t>(s));
        double lam_switch = spec.total_rate(static_cast<std::size_t>(s));
        double lam = lam_switch + c.jump_rate + c.kill_rate;
        double dt = lam > 0.0 ? rng.exponential(lam) : std::numeric_limits<double>::infinity();
        if (t + dt >= horizon) {
            double delta = horizon - t;
            double dx = c.drift * delta +
                        (c.sigma2 > 0.0 ? std::sqrt(c.sigma2 * delta) * rng.normal() : 0.0);
            path.events.push_back({horizon, EventCause::horizon, s, x + dx, x + dx});
            return path;
        }
        double dx = c.drift * dt + (c.sigma2 > 0.0 ? std::sqrt(c.sigma2 * dt) * rng.normal() : 0.0);
        t += dt;
        x += dx;
        double before = x;
        double u = rng.uniform() * lam;
        if (u < lam_switch) {
            // pick the destination state proportionally to q_sj
            double acc = 0.0;
            int j = s;
            for (std::size_t k = 0; k < spec.num_states(); ++k) {
                if (static_cast<int>(k) == s) continue;
                acc += spec.rate(static_cast<std::size_t>(s), k);
                if (u < acc) {
                    j = static_cast<int>(k);
                    break;
                }
            }
            const auto& d = spec.transition_jump(static_cast<std::size_t>(s),
                                                 static_cast<std::size_t>(j));
            if (!d.is_zero()) x += d.sample(rng);
            s = j;
            path.events.push_back({t, EventCause::switch_state, s, x, before});
        } else if (u < lam_switch + c.jump_rate) {
            x += c.jump_law.sample(rng);
            path.events.push_back({t, EventCause::local_jump, s, x, before});
        } else {
            path.events.push_back({t, EventCause::killed, s, x, before});
            path.killed = true;
            return path;
        }
    }
    path.truncated = true;
    return path;
}

namespace detail {

// First crossing time of level b by a Brownian bridge from (0, x0) to
// (delta, x1) with variance sigma2, conditioned on the crossing having
// happened; located by recursive midpoint bisection.
inline double bridge_crossing_time(double x0, double x1, double delta, double sigma2, double b,
                                   RngStream& rng, int depth = 40) {
    if (depth <= 0 || delta <= 1e-300) return 0.5 * delta;
    double h = 0.5 * delta;
    auto half_cross = [&](double a0, double a1) {
        if (a0 >= b || a1 >= b) return 1.0;
        return std::exp(-2.0 * (b - a0) * (b - a1) / (sigma2 * h));
    };
    // midpoint of the bridge conditioned on the crossing: rejection with
    // weight P(cross | midpoint), valid since the weight is bounded by one
    double xm = 0.0, p1 = 0.0, pc = 0.0;
    for (int it = 0; it < 100000; ++it) {
        xm = rng.normal(0.5 * (x0 + x1), std::sqrt(0.25 * sigma2 * delta));
        p1 = half_cross(x0, xm);
        pc = p1 + (1.0 - p1) * half_cross(xm, x1);
        if (rng.uniform() < pc) break;
    }
    if (pc <= 0.0) return 0.5 * delta;
    if (rng.uniform() * pc < p1)
        return bridge_crossing_time(x0, xm, h, sigma2, b, rng, depth - 1);
    return h + bridge_crossing_time(xm, x1, h, sigma2, b, rng, depth - 1);
}

// Maximum of the same bridge, by inversion of its known law.
inline double bridge_maximum(double x0, double x1, double delta, double sigma2, RngStream& rng) {
    if (sigma2 <= 0.0 || delta <= 0.0) return std::max(x0, x1);
    double u = rng.uniform();
    double d = x1 - x0;
    return 0.5 * (x0 + x1 + std::sqrt(d * d - 2.0 * sigma2 * delta * std::log(u)));
}

}  // namespace detail

struct PassageSample {
    double time = 0.0;
    double overshoot = 0.0;   // xi(tau) - level, zero when creeping
    int state = 0;            // modulator state at passage
    bool creeping = false;    // crossed continuously
    bool reached = false;     // false when killed/censored before crossing
    bool censored = false;    // budget or time cap hit
    double clock = 0.0;       // optional integral of e^{alpha xi} up to passage
};

struct PassageOptions {
    std::size_t max_events = 10'000'000;
    double time_cap = std::numeric_limits<double>::infinity();
    // when alpha is set, accumulate the exponential clock int_0^tau e^{alpha xi_s} ds
    std::optional<double> clock_alpha;
};

namespace detail {

// Exact clock increment for a deterministic drift segment; diffusive segments
// use piecewise-linear interpolation over nsub bridge subsamples.
inline double segment_clock(double alpha, double x0, double x1, double delta, double sigma2,
                            RngStream& rng) {
    auto linear_clock = [alpha](double a, double b, double dt) {
        if (dt <= 0.0) return 0.0;
        double slope = (b - a) / dt;
        if (std::abs(slope) < 1e-12 || std::abs(alpha * (b - a)) < 1e-10)
            return dt * std::exp(alpha * 0.5 * (a + b));
        return (std::exp(alpha * b) - std::exp(alpha * a)) / (alpha * slope);
    };
    if (sigma2 <= 0.0) return linear_clock(x0, x1, delta);
    const int nsub = 32;
    double clock = 0.0;
    double prev_t = 0.0, prev_x = x0;
    for (int k = 1; k <= nsub; ++k) {
        double tk = delta * k / nsub;
        double xk;
        if (k == nsub) {
            xk = x1;
        } else {
            // bridge from (prev_t, prev_x) to (delta, x1)
            double rem = delta - prev_t;
            double h = tk - prev_t;
            double mean = prev_x + (x1 - prev_x) * h / rem;
            double var = sigma2 * h * (rem - h) / rem;
            xk = rng.normal(mean, std::sqrt(std::max(var, 0.0)));
        }
        clock += linear_clock(prev_x, xk, tk - prev_t);
        prev_t = tk;
        prev_x = xk;
    }
    return clock;
}

}  // namespace detail

// First passage of xi above a positive level, with exact handling of jump
// overshoots and Brownian-bridge detection of continuous crossings inside
// inter-event gaps.
inline PassageSample first_passage_up(const MapSpec& spec, int state0, double level,
                                      RngStream& rng, const PassageOptions& opts = {}) {
    if (level <= 0.0) throw std::invalid_argument("level must be positive");
    PassageSample out;
    double t = 0.0, x = 0.0;
    int s = state0;
    double alpha = opts.clock_alpha.value_or(0.0);
    bool track_clock = opts.clock_alpha.has_value();

    auto finish_creep = [&](double t_cross, double x_before, double delta_used, double sigma2) {
        out.time = t_cross;
        out.overshoot = 0.0;
        out.state = s;
        out.creeping = true;
        out.reached = true;
        if (track_clock)
            out.clock += detail::segment_clock(alpha, x_before, level, delta_used, sigma2, rng);
    };

    for (std::size_t n = 0; n < opts.max_events; ++n) {
        const auto& c = spec.component(static_cast<std::size_t>(s));
        double lam_switch = spec.total_rate(static_cast<std::size_t>(s));
        double lam = lam_switch + c.jump_rate + c.kill_rate;
        double dt = lam > 0.0 ? rng.exponential(lam) : std::numeric_limits<double>::infinity();
        bool capped = t + dt >= opts.time_cap;
        double delta = capped ? opts.time_cap - t : dt;
        if (!std::isfinite(delta)) {
            // no events at all: pure drift/diffusion forever
            capped = std::isfinite(opts.time_cap);
            delta = capped ? opts.time_cap - t : 0.0;
            if (!capped && c.sigma2 <= 0.0 && c.drift <= 0.0) {
                out.censored = true;
                return out;
            }
            if (!capped) delta = std::max(1.0, 2.0 * (level - x) / std::max(c.drift, 0.5));
        }

        double x1 = x + c.drift * delta +
                    (c.sigma2 > 0.0 ? std::sqrt(c.sigma2 * delta) * rng.normal() : 0.0);

        // continuous crossing inside the gap
        if (c.sigma2 > 0.0) {
            bool crossed = x1 >= level;
            if (!crossed && x < level) {
                double p = std::exp(-2.0 * (level - x) * (level - x1) / (c.sigma2 * delta));
                crossed = rng.uniform() < p;
            }
            if (crossed) {
                double tc = detail::bridge_crossing_time(x, x1, delta, c.sigma2, level, rng);
                // conditioned location: clock integral approximated over [0, tc]
                finish_creep(t + tc, x, tc, c.sigma2);
                return out;
            }
        } else if (c.drift > 0.0 && x + c.drift * delta >= level) {
            double tc = (level - x) / c.drift;
            finish_creep(t + tc, x, tc, 0.0);
            return out;
        }

        if (track_clock) out.clock += detail::segment_clock(alpha, x, x1, delta, c.sigma2, rng);
        t += delta;
        x = x1;
        if (capped) {
            out.censored = true;
            out.time = t;
            out.state = s;
            return out;
        }

        double u = rng.uniform() * lam;
        if (u < lam_switch) {
            double acc = 0.0;
            int j = s;
            for (std::size_t k = 0; k < spec.num_states(); ++k) {
                if (static_cast<int>(k) == s) continue;
                acc += spec.rate(static_cast<std::size_t>(s), k);
                if (u < acc) {
                    j = static_cast<int>(k);
                    break;
                }
            }
            const auto& d = spec.transition_jump(static_cast<std::size_t>(s),
                                                 static_cast<std::size_t>(j));
            if (!d.is_zero()) x += d.sample(rng);
            s = j;
        } else if (u < lam_switch + c.jump_rate) {
            x += c.jump_law.sample(rng);
        } else {
            out.censored = false;
            out.reached = false;
            out.time = t;
            out.state = s;
            return out;  // killed before passage
        }
        if (x >= level) {
            out.time = t;
            out.overshoot = x - level;
            out.state = s;
            out.creeping = x == level;
            out.reached = true;
            return out;
        }
    }
    out.censored = true;
    out.time = t;
    out.state = s;
    return out;
}

// First passage below -level (level > 0), by reflecting the spec.
inline PassageSample first_passage_down(const MapSpec& spec, int state0, double level,
                                        RngStream& rng, const PassageOptions& opts = {}) {
    const std::size_t n = spec.num_states();
    std::vector<LevyComponent> comps;
    comps.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        LevyComponent c = spec.component(i);
        c.drift = -c.drift;
        c.jump_law = c.jump_law.reflected();
        comps.push_back(std::move(c));
    }
    std::vector<std::vector<JumpLaw>> d(n, std::vector<JumpLaw>(n, JumpLaw::point_mass(0.0)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) d[i][j] = spec.transition_jump(i, j).reflected();
    MapSpec reflected(spec.rate_matrix(), std::move(comps), std::move(d));
    PassageOptions o = opts;
    o.clock_alpha.reset();  // the exponential clock is not meaningful under reflection
    return first_passage_up(reflected, state0, level, rng, o);
}

struct SkeletonSample {
    std::vector<double> positions;
    std::vector<int> states;
};

// (xi_{k h}, J_{k h}) for k = 1..n, exact in law.
inline SkeletonSample skeleton_chain(const MapSpec& spec, int state0, double h, std::size_t n,
                                     RngStream& rng, const SimulateOptions& opts = {}) {
    MapPath p = simulate_path(spec, state0, h * static_cast<double>(n), rng, opts);
    SkeletonSample out;
    out.positions.reserve(n);
    out.states.reserve(n);
    std::size_t e = 0;
    // skeleton values inside event gaps follow the Brownian-bridge law of the
    // gap, sampled sequentially so consecutive skeleton points within one gap
    // carry the correct joint law; zero-variance gaps degenerate to linear
    // drift interpolation
    double anchor_t = 0.0, anchor_x = 0.0;
    std::size_t anchor_e = 0;
    for (std::size_t k = 1; k <= n; ++k) {
        double target = h * static_cast<double>(k);
        while (e + 1 < p.events.size() && p.events[e + 1].time <= target) ++e;
        if (e + 1 >= p.events.size()) {
            out.positions.push_back(p.events.back().position);
            out.states.push_back(p.events.back().state);
            continue;
        }
        const auto& ev = p.events[e];
        if (e != anchor_e) {
            anchor_t = ev.time;
            anchor_x = ev.position;
            anchor_e = e;
        }
        const auto& nxt = p.events[e + 1];
        double rem = nxt.time - anchor_t;
        double step = target - anchor_t;
        const auto& c = spec.component(static_cast<std::size_t>(ev.state));
        double x1 = nxt.position_before;
        double mean = anchor_x + (x1 - anchor_x) * (rem > 0.0 ? step / rem : 0.0);
        double var = rem > 0.0 ? c.sigma2 * step * (rem - step) / rem : 0.0;
        double val = var > 0.0 ? rng.normal(mean, std::sqrt(std::max(var, 0.0))) : mean;
        out.positions.push_back(val);
        out.states.push_back(ev.state);
        anchor_t = target;
        anchor_x = val;
    }
    return out;
}

struct SplittingSample {
    double max = 0.0;          // running maximum at the horizon
    int state_at_max = 0;      // modulator state when the maximum was attained
    double time_of_max = 0.0;  // event-resolution time of the maximum
    double final_position = 0.0;
    int final_state = 0;
    double horizon = 0.0;
    // Attribution variants for paths that sit at their maximum for a positive
    // amount of time (states with neither a diffusive nor a drift part). They
    // differ in whether the first or last attainment of the maximum is taken
    // and whether the state is read just before or just after that moment.
    int state_first_pre = 0;
    int state_first_post = 0;
    int state_last_pre = 0;
    int state_last_post = 0;
};

// Path functionals at an independent Exp(q) horizon: the overall maximum
// (with exact Brownian-bridge maxima inside gaps), the state in which it was
// attained, and the terminal pair.
inline SplittingSample sample_at_exponential_horizon(const MapSpec& spec, int state0, double q,
                                                     RngStream& rng,
                                                     const SimulateOptions& opts = {}) {
    if (q <= 0.0) throw std::invalid_argument("q must be positive");
    double eq = rng.exponential(q);
    MapPath p = simulate_path(spec, state0, eq, rng, opts);
    SplittingSample out;
    out.horizon = eq;

    // Decompose the path into "items": moments (or stretches) whose value
    // could be the overall maximum, in chronological order. Each item carries
    // the state just before and just after the moment the maximum would be
    // left if this item wins.
    struct Item {
        double value;
        double time;
        int pre, post;
    };
    std::vector<Item> items;
    items.reserve(2 * p.events.size());
    items.push_back({0.0, 0.0, state0, state0});
    for (std::size_t e = 0; e + 1 < p.events.size(); ++e) {
        const auto& a = p.events[e];
        const auto& b = p.events[e + 1];
        const auto& c = spec.component(static_cast<std::size_t>(a.state));
        double delta = b.time - a.time;
        if (c.sigma2 > 0.0) {
            double gm = detail::bridge_maximum(a.position, b.position_before, delta, c.sigma2, rng);
            items.push_back({gm, a.time + 0.5 * delta, a.state, a.state});
        } else if (c.drift > 0.0) {
            // maximum of the gap sits at its right end, left via event b
            items.push_back({b.position_before, b.time, a.state, b.state});
        } else if (c.drift == 0.0) {
            // flat stretch: holds its starting value until event b
            items.push_back({a.position, b.time, a.state, b.state});
        }
        // drift < 0: the gap supremum is the starting value, already itemised
        // by the endpoint of event e.
        items.push_back({b.position, b.time, a.state, b.state});
    }

    double mx = 0.0;
    for (const auto& it : items) mx = std::max(mx, it.value);
    std::size_t first = 0, last = 0;
    bool seen = false;
    for (std::size_t k = 0; k < items.size(); ++k) {
        if (items[k].value == mx) {
            if (!seen) first = k;
            last = k;
            seen = true;
        }
    }
    out.max = mx;
    out.time_of_max = items[first].time;
    out.state_first_pre = items[first].pre;
    out.state_first_post = items[first].post;
    out.state_last_pre = items[last].pre;
    out.state_last_post = items[last].post;
    out.state_at_max = out.state_first_post;
    out.final_position = p.final_position();
    out.final_state = p.final_state();
    return out;
}

}  // namespace maplab
