#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "maplab/jump_law.hpp"

namespace maplab {

// Lévy data attached to one modulating state: drift, Gaussian variance, a
// compound-Poisson jump part (rate, law) and an optional killing rate.
struct LevyComponent {
    double drift = 0.0;
    double sigma2 = 0.0;
    double jump_rate = 0.0;
    JumpLaw jump_law;
    double kill_rate = 0.0;
};

// A Markov additive process on states {0, ..., n-1}: a conservative rate
// matrix Q for the modulator, per-state Lévy components, and transition
// jump laws delta(i, j) applied when the modulator switches i -> j.
class MapSpec {
public:
    MapSpec(std::vector<std::vector<double>> q, std::vector<LevyComponent> components,
            std::vector<std::vector<JumpLaw>> transition_jumps)
        : q_(std::move(q)),
          components_(std::move(components)),
          transition_jumps_(std::move(transition_jumps)) {
        validate();
    }

    MapSpec(std::vector<std::vector<double>> q, std::vector<LevyComponent> components)
        : MapSpec(std::move(q), std::move(components), {}) {}

    std::size_t num_states() const { return components_.size(); }
    const std::vector<std::vector<double>>& rate_matrix() const { return q_; }
    double rate(std::size_t i, std::size_t j) const { return q_[i][j]; }
    double total_rate(std::size_t i) const { return -q_[i][i]; }
    const LevyComponent& component(std::size_t i) const { return components_[i]; }
    const JumpLaw& transition_jump(std::size_t i, std::size_t j) const {
        return transition_jumps_[i][j];
    }

    bool is_killed() const {
        for (const auto& c : components_)
            if (c.kill_rate > 0.0) return true;
        return false;
    }

    // Stationary distribution of the modulator: left null vector of Q,
    // normalized. Requires a kill-free chain.
    std::vector<double> stationary_distribution() const {
        const auto n = static_cast<Eigen::Index>(num_states());
        if (n == 1) return {1.0};
        Eigen::MatrixXd a(n + 1, n);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i) a(j, i) = q_[i][j];
        for (Eigen::Index i = 0; i < n; ++i) a(n, i) = 1.0;
        b(n) = 1.0;
        Eigen::VectorXd pi = a.colPivHouseholderQr().solve(b);
        std::vector<double> out(num_states());
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (pi(i) < -1e-10) throw std::runtime_error("stationary distribution not positive");
            out[static_cast<std::size_t>(i)] = std::max(pi(i), 0.0);
            total += out[static_cast<std::size_t>(i)];
        }
        for (auto& v : out) v /= total;
        return out;
    }

    bool is_irreducible() const {
        const std::size_t n = num_states();
        if (n == 1) return true;
        // reachability closure over the support of Q
        std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
        for (std::size_t i = 0; i < n; ++i) {
            reach[i][i] = true;
            for (std::size_t j = 0; j < n; ++j)
                if (i != j && q_[i][j] > 0.0) reach[i][j] = true;
        }
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (reach[i][k] && reach[k][j]) reach[i][j] = true;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (!reach[i][j]) return false;
        return true;
    }

private:
    static std::vector<std::vector<JumpLaw>> prepare_zero_jumps(std::size_t, std::size_t n) {
        return std::vector<std::vector<JumpLaw>>(n, std::vector<JumpLaw>(n, JumpLaw::point_mass(0.0)));
    }

    void validate() {
        const std::size_t n = components_.size();
        if (n == 0) throw std::invalid_argument("MapSpec needs at least one state");
        if (q_.size() != n) throw std::invalid_argument("rate matrix size mismatch");
        if (transition_jumps_.empty())
            transition_jumps_ = prepare_zero_jumps(n, n);
        if (transition_jumps_.size() != n)
            throw std::invalid_argument("transition jump matrix size mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            if (q_[i].size() != n) throw std::invalid_argument("rate matrix row size mismatch");
            if (transition_jumps_[i].size() != n)
                throw std::invalid_argument("transition jump row size mismatch");
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j && q_[i][j] < 0.0)
                    throw std::invalid_argument("off-diagonal rates must be nonnegative");
                row += q_[i][j];
            }
            if (std::abs(row) > 1e-9 * (1.0 + std::abs(q_[i][i])))
                throw std::invalid_argument("rate matrix rows must sum to zero");
            const auto& c = components_[i];
            if (c.sigma2 < 0.0) throw std::invalid_argument("sigma2 must be nonnegative");
            if (c.jump_rate < 0.0) throw std::invalid_argument("jump rate must be nonnegative");
            if (c.kill_rate < 0.0) throw std::invalid_argument("kill rate must be nonnegative");
        }
    }

    std::vector<std::vector<double>> q_;
    std::vector<LevyComponent> components_;
    std::vector<std::vector<JumpLaw>> transition_jumps_;
};

}  // namespace maplab
