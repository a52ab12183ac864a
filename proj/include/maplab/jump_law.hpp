#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "maplab/rng.hpp"

namespace maplab {

// Parametric one-dimensional jump distributions. Each family supplies exact
// sampling, CDF, upper/lower tail functions, integrated lower tail, moments
// and the transform E[e^{zX}] on its analytic domain. Mixtures (with
// per-component shifts) are built from these.

struct PointMass {
    double value = 0.0;
};

// One-sided exponential; sign = +1 puts mass on (0, inf), -1 on (-inf, 0).
struct Exponential {
    double rate = 1.0;
    int sign = +1;
};

// Two-sided exponential: with probability prob_plus an Exp(rate_plus) jump
// up, otherwise an Exp(rate_minus) jump down.
struct TwoSidedExponential {
    double rate_plus = 1.0;
    double rate_minus = 1.0;
    double prob_plus = 0.5;
};

struct Uniform {
    double lo = 0.0;
    double hi = 1.0;
};

// Pure Pareto tail: |X| = cutoff * U^{-1/index}; sign selects the half-line.
struct Pareto {
    double index = 2.0;
    double cutoff = 1.0;
    int sign = +1;
};

inline bool operator==(const PointMass& a, const PointMass& b) { return a.value == b.value; }
inline bool operator==(const Exponential& a, const Exponential& b) {
    return a.rate == b.rate && a.sign == b.sign;
}
inline bool operator==(const TwoSidedExponential& a, const TwoSidedExponential& b) {
    return a.rate_plus == b.rate_plus && a.rate_minus == b.rate_minus && a.prob_plus == b.prob_plus;
}
inline bool operator==(const Uniform& a, const Uniform& b) { return a.lo == b.lo && a.hi == b.hi; }
inline bool operator==(const Pareto& a, const Pareto& b) {
    return a.index == b.index && a.cutoff == b.cutoff && a.sign == b.sign;
}

using JumpFamily = std::variant<PointMass, Exponential, TwoSidedExponential, Uniform, Pareto>;

namespace detail {

inline void validate_family(const JumpFamily& f) {
    if (const auto* e = std::get_if<Exponential>(&f)) {
        if (e->rate <= 0.0) throw std::invalid_argument("exponential rate must be positive");
        if (e->sign != 1 && e->sign != -1) throw std::invalid_argument("exponential sign must be +-1");
    } else if (const auto* t = std::get_if<TwoSidedExponential>(&f)) {
        if (t->rate_plus <= 0.0 || t->rate_minus <= 0.0)
            throw std::invalid_argument("two-sided exponential rates must be positive");
        if (t->prob_plus < 0.0 || t->prob_plus > 1.0)
            throw std::invalid_argument("two-sided exponential weight must be in [0,1]");
    } else if (const auto* u = std::get_if<Uniform>(&f)) {
        if (!(u->lo < u->hi)) throw std::invalid_argument("uniform needs lo < hi");
    } else if (const auto* p = std::get_if<Pareto>(&f)) {
        if (p->index <= 0.0 || p->cutoff <= 0.0)
            throw std::invalid_argument("pareto index and cutoff must be positive");
        if (p->sign != 1 && p->sign != -1) throw std::invalid_argument("pareto sign must be +-1");
    }
}

inline double family_sample(const JumpFamily& f, RngStream& rng) {
    if (const auto* pm = std::get_if<PointMass>(&f)) return pm->value;
    if (const auto* e = std::get_if<Exponential>(&f))
        return e->sign * rng.exponential(e->rate);
    if (const auto* t = std::get_if<TwoSidedExponential>(&f)) {
        if (rng.uniform() < t->prob_plus) return rng.exponential(t->rate_plus);
        return -rng.exponential(t->rate_minus);
    }
    if (const auto* u = std::get_if<Uniform>(&f))
        return u->lo + (u->hi - u->lo) * rng.uniform();
    const auto& p = std::get<Pareto>(f);
    return p.sign * p.cutoff * std::pow(rng.uniform(), -1.0 / p.index);
}

inline double family_cdf(const JumpFamily& f, double x) {
    if (const auto* pm = std::get_if<PointMass>(&f)) return x >= pm->value ? 1.0 : 0.0;
    if (const auto* e = std::get_if<Exponential>(&f)) {
        if (e->sign > 0) return x <= 0.0 ? 0.0 : 1.0 - std::exp(-e->rate * x);
        return x >= 0.0 ? 1.0 : std::exp(e->rate * x);
    }
    if (const auto* t = std::get_if<TwoSidedExponential>(&f)) {
        if (x >= 0.0)
            return (1.0 - t->prob_plus) + t->prob_plus * (1.0 - std::exp(-t->rate_plus * x));
        return (1.0 - t->prob_plus) * std::exp(t->rate_minus * x);
    }
    if (const auto* u = std::get_if<Uniform>(&f)) {
        if (x <= u->lo) return 0.0;
        if (x >= u->hi) return 1.0;
        return (x - u->lo) / (u->hi - u->lo);
    }
    const auto& p = std::get<Pareto>(f);
    if (p.sign > 0) {
        if (x < p.cutoff) return 0.0;
        return 1.0 - std::pow(p.cutoff / x, p.index);
    }
    if (x >= -p.cutoff) return 1.0;
    return std::pow(-p.cutoff / x, p.index);
}

// Integrated lower tail: I(y) = int_y^inf P(X <= -z) dz for y >= 0.
inline double family_integrated_lower_tail(const JumpFamily& f, double y) {
    if (const auto* pm = std::get_if<PointMass>(&f)) {
        if (pm->value >= 0.0) return 0.0;
        return std::max(0.0, -pm->value - y);
    }
    if (const auto* e = std::get_if<Exponential>(&f)) {
        if (e->sign > 0) return 0.0;
        return std::exp(-e->rate * y) / e->rate;
    }
    if (const auto* t = std::get_if<TwoSidedExponential>(&f))
        return (1.0 - t->prob_plus) * std::exp(-t->rate_minus * y) / t->rate_minus;
    if (const auto* u = std::get_if<Uniform>(&f)) {
        // contribution only from the negative part of [lo, hi]
        if (u->lo >= 0.0) return 0.0;
        double a = -std::min(u->hi, 0.0);  // |upper end| of negative support
        double b = -u->lo;                 // |lower end|
        if (y >= b) return 0.0;
        double width = u->hi - u->lo;
        // P(X <= -z) = (b - z)/width for z in [a, b], = (b - a)/width for z < a
        double lo_z = std::max(y, a);
        double tri = (b - lo_z) * (b - lo_z) / (2.0 * width);
        double flat = y < a ? (a - y) * (b - a) / width : 0.0;
        return tri + flat;
    }
    const auto& p = std::get<Pareto>(f);
    if (p.sign > 0) return 0.0;
    if (p.index <= 1.0) return std::numeric_limits<double>::infinity();
    if (y <= p.cutoff)
        return (p.cutoff - y) + p.cutoff / (p.index - 1.0);
    return std::pow(p.cutoff / y, p.index) * y / (p.index - 1.0);
}

inline std::optional<double> family_mean(const JumpFamily& f) {
    if (const auto* pm = std::get_if<PointMass>(&f)) return pm->value;
    if (const auto* e = std::get_if<Exponential>(&f)) return e->sign / e->rate;
    if (const auto* t = std::get_if<TwoSidedExponential>(&f))
        return t->prob_plus / t->rate_plus - (1.0 - t->prob_plus) / t->rate_minus;
    if (const auto* u = std::get_if<Uniform>(&f)) return 0.5 * (u->lo + u->hi);
    const auto& p = std::get<Pareto>(f);
    if (p.index <= 1.0) return std::nullopt;
    return p.sign * p.index * p.cutoff / (p.index - 1.0);
}

inline bool family_has_abs_moment(const JumpFamily& f, int order) {
    if (const auto* p = std::get_if<Pareto>(&f)) return p->index > order;
    (void)order;
    return true;
}

inline std::complex<double> family_transform(const JumpFamily& f, std::complex<double> z,
                                             const std::string& where) {
    using C = std::complex<double>;
    if (const auto* pm = std::get_if<PointMass>(&f)) return std::exp(z * pm->value);
    if (const auto* e = std::get_if<Exponential>(&f)) {
        double s = static_cast<double>(e->sign);
        if (s * z.real() >= e->rate)
            throw std::domain_error(where + ": exponential transform undefined at this z");
        return e->rate / (e->rate - s * z);
    }
    if (const auto* t = std::get_if<TwoSidedExponential>(&f)) {
        if (z.real() >= t->rate_plus || -z.real() >= t->rate_minus)
            throw std::domain_error(where + ": two-sided exponential transform undefined at this z");
        return t->prob_plus * t->rate_plus / (t->rate_plus - z) +
               (1.0 - t->prob_plus) * t->rate_minus / (t->rate_minus + z);
    }
    if (const auto* u = std::get_if<Uniform>(&f)) {
        if (std::abs(z) < 1e-8) {
            double m1 = 0.5 * (u->lo + u->hi);
            double m2 = (u->lo * u->lo + u->lo * u->hi + u->hi * u->hi) / 3.0;
            return 1.0 + z * m1 + z * z * (0.5 * m2);
        }
        return (std::exp(z * u->hi) - std::exp(z * u->lo)) / (z * (u->hi - u->lo));
    }
    const auto& p = std::get<Pareto>(f);
    double s = static_cast<double>(p.sign);
    if (s * z.real() > 0.0)
        throw std::domain_error(where + ": pareto transform undefined for this z");
    if (std::abs(z) < 1e-14) return 1.0;
    // E[e^{z s X}] with X = cutoff * U^{-1/index}: one-dimensional integral over u in (0,1].
    // Simpson on a graded grid; the integrand is bounded by 1 in modulus.
    const int n = 4096;
    C acc = 0.0;
    double prev_u = 0.0;
    auto g = [&](double u) -> C {
        if (u <= 0.0) return 0.0;  // |x| -> infinity, Re(z s x) <= 0 and oscillation averages out
        double x = p.cutoff * std::pow(u, -1.0 / p.index);
        return std::exp(z * (s * x));
    };
    // graded grid refines near u = 0 where the integrand oscillates
    for (int k = 1; k <= n; ++k) {
        double u = std::pow(static_cast<double>(k) / n, 3.0);
        double mid = 0.5 * (prev_u + u);
        acc += (u - prev_u) / 6.0 * (g(prev_u) + 4.0 * g(mid) + g(u));
        prev_u = u;
    }
    return acc;
}

}  // namespace detail

class JumpLaw {
public:
    struct Component {
        double weight;
        double shift;
        JumpFamily family;
    };

    JumpLaw() : JumpLaw(PointMass{0.0}) {}

    JumpLaw(JumpFamily family, double shift = 0.0) {
        detail::validate_family(family);
        components_.push_back({1.0, shift, family});
    }

    static JumpLaw mixture(std::vector<Component> components) {
        if (components.empty()) throw std::invalid_argument("empty mixture");
        double total = 0.0;
        for (auto& c : components) {
            if (c.weight <= 0.0) throw std::invalid_argument("mixture weights must be positive");
            detail::validate_family(c.family);
            total += c.weight;
        }
        JumpLaw law;
        law.components_ = std::move(components);
        for (auto& c : law.components_) c.weight /= total;
        return law;
    }

    static JumpLaw point_mass(double v) { return JumpLaw(PointMass{v}); }
    static JumpLaw exponential(double rate, int sign = +1) {
        return JumpLaw(Exponential{rate, sign});
    }
    static JumpLaw two_sided_exponential(double rate_plus, double rate_minus,
                                         double prob_plus = 0.5) {
        return JumpLaw(TwoSidedExponential{rate_plus, rate_minus, prob_plus});
    }
    static JumpLaw uniform(double lo, double hi) { return JumpLaw(Uniform{lo, hi}); }
    static JumpLaw pareto(double index, double cutoff, int sign = +1) {
        return JumpLaw(Pareto{index, cutoff, sign});
    }

    const std::vector<Component>& components() const { return components_; }

    bool is_zero() const {
        for (const auto& c : components_) {
            const auto* pm = std::get_if<PointMass>(&c.family);
            if (!pm || pm->value + c.shift != 0.0) return false;
        }
        return true;
    }

    double sample(RngStream& rng) const {
        std::size_t k = 0;
        if (components_.size() > 1) {
            std::vector<double> w;
            w.reserve(components_.size());
            for (const auto& c : components_) w.push_back(c.weight);
            k = rng.categorical(w);
        }
        const auto& c = components_[k];
        return c.shift + detail::family_sample(c.family, rng);
    }

    double cdf(double x) const {
        double v = 0.0;
        for (const auto& c : components_) v += c.weight * detail::family_cdf(c.family, x - c.shift);
        return v;
    }

    // T+(x) = P(X >= x), T-(x) = P(X <= -x).
    double tail_plus(double x) const {
        double v = 0.0;
        for (const auto& c : components_) {
            double y = x - c.shift;
            v += c.weight * (1.0 - detail::family_cdf(c.family, y) +
                             atom_at(c.family, y));
        }
        return v;
    }

    double tail_minus(double x) const {
        double v = 0.0;
        for (const auto& c : components_) v += c.weight * detail::family_cdf(c.family, -x - c.shift);
        return v;
    }

    // int_y^inf tail_minus(z) dz, exactly per family (shifts handled by
    // translating a shifted law into a point-mass convolution bound is not
    // needed: a shift by s moves the lower tail by -s).
    double integrated_lower_tail(double y) const {
        double v = 0.0;
        for (const auto& c : components_) {
            // P(X + s <= -z) = P(X <= -(z + s)); substitute u = z + s.
            double u = y + c.shift;
            if (u >= 0.0) {
                v += c.weight * detail::family_integrated_lower_tail(c.family, u);
            } else {
                double tail = detail::family_integrated_lower_tail(c.family, 0.0);
                if (std::isinf(tail)) return tail;
                // add int_u^0 P(X <= -z) dz = int_0^{-u} F(w) dw by Simpson
                const int m = 64;
                double h = -u / m, acc = 0.0;
                for (int k = 0; k < m; ++k) {
                    double a = k * h, b = a + h;
                    acc += h / 6.0 * (detail::family_cdf(c.family, a) +
                                      4.0 * detail::family_cdf(c.family, 0.5 * (a + b)) +
                                      detail::family_cdf(c.family, b));
                }
                v += c.weight * (tail + acc);
            }
        }
        return v;
    }

    std::optional<double> mean() const {
        double m = 0.0;
        for (const auto& c : components_) {
            auto cm = detail::family_mean(c.family);
            if (!cm) return std::nullopt;
            m += c.weight * (*cm + c.shift);
        }
        return m;
    }

    bool has_finite_abs_moment(int order = 1) const {
        for (const auto& c : components_)
            if (!detail::family_has_abs_moment(c.family, order)) return false;
        return true;
    }

    std::complex<double> transform(std::complex<double> z, const std::string& where) const {
        std::complex<double> v = 0.0;
        for (const auto& c : components_)
            v += c.weight * std::exp(z * c.shift) * detail::family_transform(c.family, z, where);
        return v;
    }

    // Law of -X.
    JumpLaw reflected() const {
        JumpLaw out;
        out.components_.clear();
        for (const auto& c : components_) {
            JumpFamily fam = c.family;
            if (auto* pm = std::get_if<PointMass>(&fam)) pm->value = -pm->value;
            else if (auto* e = std::get_if<Exponential>(&fam)) e->sign = -e->sign;
            else if (auto* t = std::get_if<TwoSidedExponential>(&fam))
                fam = TwoSidedExponential{t->rate_minus, t->rate_plus, 1.0 - t->prob_plus};
            else if (auto* u = std::get_if<Uniform>(&fam)) fam = Uniform{-u->hi, -u->lo};
            else if (auto* p = std::get_if<Pareto>(&fam)) fam = Pareto{p->index, p->cutoff, -p->sign};
            out.components_.push_back({c.weight, -c.shift, fam});
        }
        return out;
    }

    // Smallest Pareto tail index on the requested side; nullopt when the tail
    // is exponentially bounded there.
    std::optional<double> pareto_index(int side) const {
        std::optional<double> idx;
        for (const auto& c : components_) {
            const auto* p = std::get_if<Pareto>(&c.family);
            if (p && p->sign == side) idx = idx ? std::min(*idx, p->index) : p->index;
        }
        return idx;
    }

    bool operator==(const JumpLaw& other) const {
        if (components_.size() != other.components_.size()) return false;
        for (std::size_t k = 0; k < components_.size(); ++k) {
            const auto& a = components_[k];
            const auto& b = other.components_[k];
            if (a.weight != b.weight || a.shift != b.shift || a.family != b.family) return false;
        }
        return true;
    }

private:
    static double atom_at(const JumpFamily& f, double x) {
        const auto* pm = std::get_if<PointMass>(&f);
        return (pm && pm->value == x) ? 1.0 : 0.0;
    }

    std::vector<Component> components_;
};

}  // namespace maplab
