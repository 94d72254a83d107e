#pragma once

#include <map>

#include "vtlab/netstate.hpp"

namespace vtlab {

/// Activity from the maximally loaded lightpath:
/// V_G = 1 / (1 + e^{50 (u_max - 0.5)}). Inputs outside [0,1] are clamped.
inline double compute_activity(double u_max) {
    const double u = clamp01(u_max);
    return 1.0 / (1.0 + std::exp(50.0 * (u - 0.5)));
}

/// FIFO store of good topologies driving a Hebbian auto-associative memory.
/// The weight operator W = sum_a (alpha/max(1,|a|)) a a^T is never
/// materialized: recall only needs per-attractor dot products. The 1/|a|
/// scaling keeps each recall input a.x/|a| in [0,1] whatever the topology
/// size, so one sigmoid (gain beta, threshold theta) fits every scale.
class AttractorMemory {
public:
    AttractorMemory(int capacity = 5, double alpha = 1.0, double beta = 10.0,
                    double theta = 0.5, bool zero_diagonal = false)
        : capacity_(capacity), alpha_(alpha), beta_(beta), theta_(theta),
          zero_diagonal_(zero_diagonal) {
        if (capacity <= 0) throw std::invalid_argument("AttractorMemory: capacity must be positive");
    }

    int capacity() const { return capacity_; }
    size_t stored() const { return slots_.size(); }
    int next_slot() const { return next_slot_; }
    const std::vector<uint8_t>& attractor(size_t slot) const { return slots_[slot].bits; }

    /// Hebbian store with FIFO replacement: the slot cursor advances modulo
    /// capacity, dropping the oldest attractor's contribution when full.
    void store(const std::vector<uint8_t>& attractor) {
        if (!slots_.empty() && attractor.size() != slots_[0].bits.size())
            throw std::invalid_argument("AttractorMemory: attractor length mismatch");
        Slot slot;
        slot.bits = attractor;
        for (size_t i = 0; i < attractor.size(); ++i)
            if (attractor[i]) slot.ones.push_back(static_cast<int>(i));
        if (static_cast<int>(slots_.size()) < capacity_) {
            slots_.push_back(std::move(slot));
        } else {
            slots_[next_slot_] = std::move(slot);
        }
        next_slot_ = (next_slot_ + 1) % capacity_;
    }

    /// Recall signal m_i = f(sum_j W_ij x_j), computed matrix-free.
    std::vector<double> signal(const std::vector<double>& x) const {
        std::vector<double> z(x.size(), 0.0);
        for (const Slot& slot : slots_) {
            double dot = 0.0;
            for (int i : slot.ones) dot += x[i];
            const double scale = alpha_ / std::max<size_t>(1, slot.ones.size());
            for (int i : slot.ones)
                z[i] += scale * (zero_diagonal_ ? dot - x[i] : dot);
        }
        std::vector<double> m(x.size());
        for (size_t i = 0; i < x.size(); ++i) m[i] = sigmoid(beta_ * (z[i] - theta_));
        return m;
    }

private:
    struct Slot {
        std::vector<uint8_t> bits;
        std::vector<int> ones;
    };
    int capacity_;
    double alpha_, beta_, theta_;
    bool zero_diagonal_;
    std::vector<Slot> slots_;
    int next_slot_ = 0;
};

struct ActivityTracker {
    double previous = 0.0;
    double current = 0.0;
};

/// Stores the current topology as an attractor iff activity crossed T_max
/// upward this round.
inline bool maybe_store_attractor(const ActivityTracker& tracker, double t_max,
                                  AttractorMemory& memory,
                                  const std::vector<uint8_t>& current_bits) {
    if (tracker.previous < t_max && tracker.current > t_max) {
        memory.store(current_bits);
        return true;
    }
    return false;
}

enum class UpdateMode { Replacement, Relaxation };

/// One stochastic expression step. Replacement mode (the default)
/// overwrites the state with the memory term plus noise,
///   x' = clamp( V_G m_i + eta_i ),  eta_i ~ N(mu_i, 1);
/// relaxation mode takes an Euler step toward the memory instead,
///   x' = clamp( x_i + (m_i - x_i) V_G + eta_i ).
/// `mu` holds one value per lightpath, or a single value applied to all.
inline std::vector<double> update_expressions(const std::vector<double>& x,
                                              const std::vector<double>& m, double v_g,
                                              const std::vector<double>& mu, Rng& rng,
                                              UpdateMode mode = UpdateMode::Replacement) {
    if (m.size() != x.size() || (mu.size() != 1 && mu.size() != x.size()))
        throw std::invalid_argument("update_expressions: vector lengths differ");
    std::vector<double> out(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        const double eta = (mu.size() == 1 ? mu[0] : mu[i]) + rng.next_normal();
        const double value = mode == UpdateMode::Replacement
                                 ? v_g * m[i] + eta
                                 : x[i] + (m[i] - x[i]) * v_g + eta;
        out[i] = clamp01(value);
    }
    return out;
}

/// Per-transition optimal noise mean. Exactly one of the four indicator
/// products fires; the two transitional branches carry the piecewise-linear
/// ramps 0.5 +- V_G gated by a steep switch f(0.5 - V_G) (gain 50) so the
/// value is 0.5 for every transition at V_G = 0 and the transitional
/// branches shut off once V_G clears 0.5.
inline double mu_opt(int prev_bit, int target_bit, double v_g) {
    const double p = prev_bit ? 1.0 : 0.0;
    const double t = target_bit ? 1.0 : 0.0;
    const double sw = sigmoid(50.0 * (0.5 - v_g));
    return 0.5 * (1.0 - p) * (1.0 - t) + 0.5 * p * t +
           (0.5 + v_g) * p * (1.0 - t) * sw +
           (0.5 - v_g) * (1.0 - p) * t * sw;
}

/// Row-stochastic 2x2 matrix of per-round lightpath transitions.
/// p[s][s'] = P(state s -> s').
struct TransitionMatrix {
    double p[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
};

/// Analytic transition probabilities of the replacement-mode update: a
/// lightpath ends the round established iff V_G m + eta >= 0.5, so
/// P(-> 1) = Phi(V_G m_repr + mu - 0.5) for both row states.
inline TransitionMatrix transition_matrix(double v_g, double m_repr, double mu) {
    const double p_on = norm_cdf(v_g * m_repr + mu - 0.5);
    TransitionMatrix t;
    for (int row = 0; row < 2; ++row) {
        t.p[row][1] = p_on;
        t.p[row][0] = 1.0 - p_on;
    }
    return t;
}

/// Inverts the transition formula: the mu for which P(0 -> 1) equals
/// p_target under (v_g, m_repr).
inline double solve_mu_for_probability(double p_target, double v_g, double m_repr) {
    if (!(p_target > 0.0 && p_target < 1.0))
        throw std::invalid_argument("solve_mu_for_probability: p_target must lie in (0,1)");
    return norm_quantile(p_target) + 0.5 - v_g * m_repr;
}

/// Streaming collector for sampled noise means: strided reservoir-free
/// subsampling, running sum/sumsq, and a width-0.05 histogram.
struct MuCollector {
    uint64_t stride = 1;
    uint64_t offered = 0;
    uint64_t samples = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
    std::map<int, uint64_t> histogram;  // bin k covers [k/20, (k+1)/20)

    void offer(double value) {
        if (offered++ % stride != 0) return;
        ++samples;
        sum += value;
        sum_sq += value * value;
        ++histogram[static_cast<int>(std::floor(value * 20.0))];
    }
    double mean() const { return samples ? sum / samples : 0.0; }
    double stddev() const {
        if (samples < 2) return 0.0;
        const double m = mean();
        return std::sqrt(std::max(0.0, sum_sq / samples - m * m));
    }
};

enum class MuMode { Fixed, MuOpt, ResourceAware };

struct AsbConfig {
    double t_max = 0.5;           // attractor-storage threshold on V_G
    MuMode mu_mode = MuMode::Fixed;
    double mu_value = 0.0;        // noise mean in Fixed mode
    UpdateMode update_mode = UpdateMode::Replacement;
    bool two_phase_apply = false; // removals first, then establishments
    int attractor_capacity = 5;
    double alpha = 1.0;           // Hebbian learning rate
    double beta = 10.0;           // recall sigmoid gain
    double theta = 0.5;           // recall sigmoid threshold
    bool zero_diagonal = false;
};

struct AsbRoundOutcome {
    double v_g = 0.0;        // activity that drove this round
    bool attractor_stored = false;
    int established = 0;
    int removed = 0;
    double mu_mean = 0.0;
};

/// The attractor-selection controller. Each round: activity from the
/// measured u_max, attractor storage on an upward T_max crossing, memory
/// recall, noise-mean selection, the stochastic expression update, then a
/// sweep applying the 0.5 threshold with resource gating.
class AsbController {
public:
    AsbController(int n, const AsbConfig& config)
        : config_(config), n_(n),
          memory_(config.attractor_capacity, config.alpha, config.beta, config.theta,
                  config.zero_diagonal),
          x_(pair_count(n), 0.0), prev_v_g_(compute_activity(1.0)) {
        if (!(config.t_max > 0.0 && config.t_max < 1.0))
            throw std::invalid_argument("AsbConfig: t_max must lie in (0,1)");
        if (!std::isfinite(config.mu_value))
            throw std::invalid_argument("AsbConfig: mu_value must be finite");
    }

    /// Random initial state: expressions uniform in [0,1), and the
    /// attractor list seeded with capacity random topologies whose per-bit
    /// density is resource-feasible in expectation.
    void seed_initial_state(Rng& rng, double initial_bit_probability) {
        for (double& v : x_) v = rng.next_unit();
        std::vector<uint8_t> bits(x_.size());
        for (int a = 0; a < memory_.capacity(); ++a) {
            for (auto& b : bits) b = rng.next_unit() < initial_bit_probability ? 1 : 0;
            memory_.store(bits);
        }
    }

    const AttractorMemory& memory() const { return memory_; }
    AttractorMemory& memory() { return memory_; }
    const std::vector<double>& expressions() const { return x_; }
    void set_expressions(std::vector<double> x) { x_ = std::move(x); }
    double previous_activity() const { return prev_v_g_; }

    AsbRoundOutcome round(NetworkState& state, double measured_u_max, Rng& noise_rng,
                          MuCollector* mu_sink = nullptr) {
        AsbRoundOutcome outcome;
        const double v_g = compute_activity(measured_u_max);
        outcome.v_g = v_g;

        ActivityTracker tracker{prev_v_g_, v_g};
        outcome.attractor_stored =
            maybe_store_attractor(tracker, config_.t_max, memory_, state.vt().bits());
        prev_v_g_ = v_g;

        const std::vector<double> m = memory_.signal(x_);

        std::vector<double> mu;
        switch (config_.mu_mode) {
            case MuMode::Fixed:
                mu.assign(1, config_.mu_value);
                if (mu_sink) mu_sink->offer(mu[0]);
                break;
            case MuMode::MuOpt: {
                // The mean must be chosen before noise is drawn: previous bit
                // from the last expression state, target bit from the
                // binarized memory recommendation.
                mu.resize(x_.size());
                for (size_t i = 0; i < x_.size(); ++i)
                    mu[i] = mu_opt(x_[i] >= 0.5 ? 1 : 0, m[i] >= 0.5 ? 1 : 0, v_g);
                if (mu_sink)
                    for (double v : mu) mu_sink->offer(v);
                break;
            }
            case MuMode::ResourceAware: {
                mu.assign(1, resource_aware_mu(state, v_g));
                if (mu_sink) mu_sink->offer(mu[0]);
                break;
            }
        }
        double mu_sum = 0.0;
        for (double v : mu) mu_sum += v;
        outcome.mu_mean = mu_sum / mu.size();

        x_ = update_expressions(x_, m, v_g, mu, noise_rng, config_.update_mode);

        if (config_.two_phase_apply) {
            for (int p = 0; p < pair_count(n_); ++p)
                if (x_[p] < 0.5 && state.apply_decision(p, false)) ++outcome.removed;
            for (int p = 0; p < pair_count(n_); ++p)
                if (x_[p] > 0.5 && state.apply_decision(p, true)) ++outcome.established;
        } else {
            // Single pass in pair-index order: establish above the
            // threshold when resources allow, remove below it.
            for (int p = 0; p < pair_count(n_); ++p) {
                if (x_[p] > 0.5) {
                    if (state.apply_decision(p, true)) ++outcome.established;
                } else if (x_[p] < 0.5) {
                    if (state.apply_decision(p, false)) ++outcome.removed;
                }
            }
        }
        return outcome;
    }

private:
    /// Resource-aware target: the maximal-search establishment probability
    /// 0.5 capped by the scarcer of free transmitters and free outbound
    /// wavelengths per node, spread over the n-1 potential destinations.
    double resource_aware_mu(const NetworkState& state, double v_g) const {
        const auto& pool = state.pool();
        double free_tx = 0.0;
        for (int v = 0; v < n_; ++v) free_tx += pool.tx_per_node - pool.tx_used[v];
        free_tx /= n_;
        const auto& topo = state.topology();
        double free_wl = 0.0;
        for (size_t f = 0; f < pool.wavelengths_used.size(); ++f)
            free_wl += topo.wavelengths_per_fiber - pool.wavelengths_used[f];
        free_wl /= n_;
        double p = std::min(free_tx, free_wl) / (n_ - 1);
        p = std::min(std::max(p, 1e-6), 0.5);
        return solve_mu_for_probability(p, v_g, 0.0);
    }

    AsbConfig config_;
    int n_;
    AttractorMemory memory_;
    std::vector<double> x_;
    double prev_v_g_;
};

}  // namespace vtlab
