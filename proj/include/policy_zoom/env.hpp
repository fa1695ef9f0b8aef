#pragma once

#include "policy_zoom/rng.hpp"

#include <array>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace pz {

using StateVec = std::vector<double>;
using ActionVec = std::vector<double>;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
};

/// Raised on invalid configuration (unknown environment, out-of-range parameter).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StepResult {
    StateVec next;      // full state, including hidden coordinates
    double reward;      // clipped to [0,1]
    double raw_reward;  // unclipped quantity used for reporting
};

/// A simulatable MDP. Immutable after construction; each run owns its
/// private RNG stream, so instances are shareable across threads.
///
/// The agent observes the first state_dim() coordinates of the full state;
/// coordinates past that (e.g. the scheduling channel state) are hidden.
class Env {
  public:
    virtual ~Env() = default;

    const std::string& name() const { return name_; }
    int state_dim() const { return static_cast<int>(state_bounds_.size()); }
    virtual int full_state_dim() const { return state_dim(); }
    int action_dim() const { return static_cast<int>(action_bounds_.size()); }
    const std::vector<Interval>& state_bounds() const { return state_bounds_; }
    const std::vector<Interval>& action_bounds() const { return action_bounds_; }

    double reward_lipschitz() const { return lip_reward_; }
    double kernel_lipschitz() const { return lip_kernel_; }
    double ergodic_prefactor() const { return ergodic_C_; }
    double ergodic_rate() const { return ergodic_alpha_; }

    StateVec observe(const StateVec& full) const {
        return StateVec(full.begin(), full.begin() + state_dim());
    }

    virtual StateVec initial_state(RngStream& rng) const = 0;
    virtual StepResult step(const StateVec& full, const ActionVec& a, RngStream& rng) const = 0;

    /// Pure reward map on observed states; always in [0,1].
    virtual double reward(const StateVec& obs, const ActionVec& a) const = 0;
    /// The unclipped reward used in reports; defaults to the clipped one.
    virtual double raw_reward(const StateVec& obs, const ActionVec& a) const {
        return reward(obs, a);
    }

  protected:
    std::string name_;
    std::vector<Interval> state_bounds_;
    std::vector<Interval> action_bounds_;
    double lip_reward_ = 1.0;
    double lip_kernel_ = 1.0;
    double ergodic_C_ = 1.0;
    double ergodic_alpha_ = 0.5;
};

using EnvPtr = std::shared_ptr<const Env>;

/// Belief recursion for the scheduling channel. When a transmission is
/// attempted (a=1) the acknowledgement reveals the channel state and the
/// next belief is the one-step prediction from it; otherwise the belief
/// is propagated through the channel chain.
double belief_update(double b, int a, int observed_c, double p01, double p11);

/// River position on [0,6], action in [-1,1].
class RiverswimEnv final : public Env {
  public:
    RiverswimEnv();
    StateVec initial_state(RngStream& rng) const override;
    StepResult step(const StateVec& s, const ActionVec& a, RngStream& rng) const override;
    double reward(const StateVec& s, const ActionVec& a) const override;

    /// (left, stay, right) move probabilities; sums to 1 for a in [-1,1].
    static std::array<double, 3> move_probs(double a);
};

/// Remote estimation over an unreliable channel. Observed state (e, b),
/// hidden channel state c in {0,1}; action a in {0,1} attempts transmission.
class SchedulingEnv final : public Env {
  public:
    SchedulingEnv(double beta, double lambda, double p01, double p11, double e_max);

    int full_state_dim() const override { return 3; }
    StateVec initial_state(RngStream& rng) const override;
    StepResult step(const StateVec& s, const ActionVec& a, RngStream& rng) const override;
    double reward(const StateVec& obs, const ActionVec& a) const override;
    double raw_reward(const StateVec& obs, const ActionVec& a) const override;

    double beta() const { return beta_; }
    double lambda() const { return lambda_; }
    double p01() const { return p01_; }
    double p11() const { return p11_; }
    double e_max() const { return e_max_; }
    double stationary_good_prob() const { return p01_ / (1.0 + p01_ - p11_); }

    /// Error recursion e' = (beta*e + w) - beta*c*a*e, clamped to [-e_max, e_max].
    double error_update(double e, double w, int c, int a) const;

  private:
    double beta_, lambda_, p01_, p11_, e_max_;
};

/// Synthetic test MDP on [0,1] with two half-interval behaviors and a
/// closed-form stationary distribution: the action is the probability of
/// jumping to a uniform draw from the right half, otherwise the left half.
class TwoArmChainEnv final : public Env {
  public:
    TwoArmChainEnv();
    StateVec initial_state(RngStream& rng) const override;
    StepResult step(const StateVec& s, const ActionVec& a, RngStream& rng) const override;
    double reward(const StateVec& s, const ActionVec& a) const override;

    /// Long-run average reward of the constant policy a(s) = w.
    static double gain_of_constant_policy(double w);
    /// Analytic maximizer and value of gain_of_constant_policy over [0,1].
    static std::pair<double, double> optimal_constant_policy();
    /// Stationary probability of the right half under region-mean actions.
    static double stationary_right_mass(double mean_action_left, double mean_action_right);
};

EnvPtr make_env(const std::string& name, const std::map<std::string, double>& params = {});

} // namespace pz
