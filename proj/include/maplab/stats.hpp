#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace maplab {

// Mergeable mean/variance accumulator (Chan et al. pairwise update).
class SummaryStat {
public:
    void add(double x) {
        ++count_;
        double delta = x - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (x - mean_);
    }

    void merge(const SummaryStat& other) {
        if (other.count_ == 0) return;
        if (count_ == 0) {
            *this = other;
            return;
        }
        double na = static_cast<double>(count_);
        double nb = static_cast<double>(other.count_);
        double delta = other.mean_ - mean_;
        double n = na + nb;
        mean_ += delta * nb / n;
        m2_ += other.m2_ + delta * delta * na * nb / n;
        count_ += other.count_;
    }

    std::size_t count() const { return count_; }
    double mean() const { return mean_; }
    double variance() const {
        return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
    }
    double standard_error() const {
        return count_ > 1 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
    }

private:
    std::size_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// Weighted atoms on R, optionally tagged with a modulator state.
class EmpiricalMeasure {
public:
    struct Atom {
        double value;
        int state;
        double weight;
    };

    EmpiricalMeasure() = default;

    void add(double value, int state = 0, double weight = 1.0) {
        if (weight < 0.0) throw std::invalid_argument("negative atom weight");
        atoms_.push_back({value, state, weight});
        sorted_ = false;
    }

    std::size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }
    const std::vector<Atom>& atoms() const { return atoms_; }

    double total_weight() const {
        double w = 0.0;
        for (const auto& a : atoms_) w += a.weight;
        return w;
    }

    // Right-continuous normalized CDF.
    double cdf(double x) const {
        ensure_sorted();
        double total = total_weight();
        if (total <= 0.0) throw std::runtime_error("empty empirical measure");
        double below = 0.0;
        for (const auto& a : atoms_) {
            if (a.value > x) break;
            below += a.weight;
        }
        return below / total;
    }

    std::vector<double> values() const {
        std::vector<double> v;
        v.reserve(atoms_.size());
        for (const auto& a : atoms_) v.push_back(a.value);
        return v;
    }

    double quantile(double p) const {
        ensure_sorted();
        double total = total_weight();
        double target = p * total;
        double acc = 0.0;
        for (const auto& a : atoms_) {
            acc += a.weight;
            if (acc >= target) return a.value;
        }
        return atoms_.back().value;
    }

    double median() const { return quantile(0.5); }

    EmpiricalMeasure restricted_to_state(int state) const {
        EmpiricalMeasure m;
        for (const auto& a : atoms_)
            if (a.state == state) m.add(a.value, a.state, a.weight);
        return m;
    }

    EmpiricalMeasure mirrored() const {
        EmpiricalMeasure m;
        for (const auto& a : atoms_) m.add(-a.value, a.state, a.weight);
        return m;
    }

private:
    void ensure_sorted() const {
        if (sorted_) return;
        std::sort(atoms_.begin(), atoms_.end(),
                  [](const Atom& a, const Atom& b) { return a.value < b.value; });
        sorted_ = true;
    }

    mutable std::vector<Atom> atoms_;
    mutable bool sorted_ = false;
};

// Two-sample Kolmogorov-Smirnov distance: sup over pooled atoms of the
// absolute CDF gap. Symmetric in its arguments.
inline double ks_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance: empty input");
    auto build = [](const EmpiricalMeasure& m, std::vector<double>& vals,
                    std::vector<double>& cum) {
        double total = 0.0;
        std::vector<std::pair<double, double>> vw;
        vw.reserve(m.size());
        for (const auto& atom : m.atoms()) {
            vw.emplace_back(atom.value, atom.weight);
            total += atom.weight;
        }
        std::sort(vw.begin(), vw.end());
        double acc = 0.0;
        for (const auto& [v, w] : vw) {
            acc += w;
            vals.push_back(v);
            cum.push_back(acc / total);
        }
    };
    std::vector<double> va, ca, vb, cb;
    build(a, va, ca);
    build(b, vb, cb);

    auto cdf_at = [](const std::vector<double>& vals, const std::vector<double>& cum,
                     double x) {
        auto it = std::upper_bound(vals.begin(), vals.end(), x);
        if (it == vals.begin()) return 0.0;
        return cum[static_cast<std::size_t>(it - vals.begin()) - 1];
    };

    double d = 0.0;
    for (double x : va) d = std::max(d, std::abs(cdf_at(va, ca, x) - cdf_at(vb, cb, x)));
    for (double x : vb) d = std::max(d, std::abs(cdf_at(va, ca, x) - cdf_at(vb, cb, x)));
    return d;
}

// One-sample KS distance against an analytic CDF.
template <class Cdf>
inline double ks_distance_to(const EmpiricalMeasure& a, Cdf&& cdf) {
    if (a.empty()) throw std::invalid_argument("ks_distance_to: empty input");
    auto vals = a.values();
    std::sort(vals.begin(), vals.end());
    double n = static_cast<double>(vals.size());
    double d = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        double f = cdf(vals[i]);
        d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - f));
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    }
    return d;
}

// Wasserstein-1 distance between normalized empirical measures.
inline double wasserstein1(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein1: empty input");
    std::vector<std::pair<double, double>> pa, pb;
    double ta = a.total_weight(), tb = b.total_weight();
    for (const auto& atom : a.atoms()) pa.emplace_back(atom.value, atom.weight / ta);
    for (const auto& atom : b.atoms()) pb.emplace_back(atom.value, -atom.weight / tb);
    pa.insert(pa.end(), pb.begin(), pb.end());
    std::sort(pa.begin(), pa.end());
    double dist = 0.0, acc = 0.0;
    for (std::size_t i = 0; i + 1 < pa.size(); ++i) {
        acc += pa[i].second;
        dist += std::abs(acc) * (pa[i + 1].first - pa[i].first);
    }
    return dist;
}

}  // namespace maplab
