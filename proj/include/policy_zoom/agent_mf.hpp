#pragma once

#include "policy_zoom/policy_space.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace pz {

/// Per-active-policy bookkeeping.
struct PolicyRecord {
    ParamPolicy policy;
    std::int64_t plays = 0;     // N: number of plays
    std::int64_t episodes = 0;  // K: number of episodes in which played
    double reward_sum = 0.0;    // sum of clipped rewards
    int id = 0;                 // activation ordinal
    double diameter = 0.0;      // ball radius, refreshed at episode boundaries
    double index = 0.0;
};

struct MfConstants {
    double ergodic_C = 1.0;
    double alpha = 0.5;
    double scale_log = 1.0;  // c_d^f * log(T / delta)
    double L_J = 0.0;
};

MfConstants make_mf_constants(double C, double alpha, double c_d_f, double horizon, double delta,
                              double L_J);

/// (C/(1-alpha)) * (sqrt(scale_log / (1 v N)) + (1 + K) / (1 v N)).
double mf_diameter(const PolicyRecord& rec, const MfConstants& c);

/// Empirical mean (0 when never played) plus (1 + L_J) * diameter.
double mf_index(const PolicyRecord& rec, double diameter, double L_J);

/// Argmax of the index; ties broken by the smallest activation ordinal.
std::size_t select_policy(const std::vector<PolicyRecord>& records);

struct ActivationEvent {
    std::int64_t t = 0;
    std::vector<double> w;
    double parent_diameter = 0.0;  // diameter of the nearest center at activation
};

/// Episode schedule, play accounting and policy selection shared by the
/// zooming agents and the uniform baseline. Single-threaded per run.
class EpisodicAgentBase {
  public:
    virtual ~EpisodicAgentBase() = default;

    /// One call per environment step; the previous step's reward is
    /// credited to the policy that played it.
    ActionVec step(const StateVec& s, std::optional<double> prev_reward);

    /// Credits the trailing reward once the run is over.
    void credit_final(double reward);

    const std::vector<PolicyRecord>& records() const { return records_; }
    std::int64_t total_steps() const { return total_steps_; }
    std::int64_t episode_count() const { return episode_ordinal_; }
    std::size_t current_policy() const { return current_; }
    const std::vector<std::int64_t>& episode_boundaries() const { return episode_boundaries_; }
    const std::vector<ActivationEvent>& activation_log() const { return activation_log_; }

    /// Invoked after each boundary has been fully processed.
    void set_boundary_hook(std::function<void(const EpisodicAgentBase&)> hook) {
        boundary_hook_ = std::move(hook);
    }

  protected:
    EpisodicAgentBase(FamilyPtr family, MetricSpec metric);

    /// Refresh diameters/indices and (for zooming agents) activate
    /// policies until the balls cover the parameter box again.
    virtual void at_boundary() = 0;

    /// Derived-class bookkeeping on the newly observed state, before any
    /// crediting or boundary handling.
    virtual void on_observation(const StateVec&) {}

    /// Activation loop: repeatedly scan for an uncovered point at the
    /// default oracle resolution and activate it. init_fresh fills in the
    /// fresh record's diameter and index and mirrors any per-record state.
    int activate_uncovered(const std::function<void(PolicyRecord&)>& init_fresh);

    FamilyPtr family_;
    MetricSpec metric_;
    std::vector<PolicyRecord> records_;
    std::size_t current_ = std::numeric_limits<std::size_t>::max();

  private:
    std::int64_t episode_ordinal_ = 0;  // k
    std::int64_t steps_in_episode_ = 0; // h
    std::int64_t episode_length_ = 0;   // H_k
    std::int64_t total_steps_ = 0;
    std::vector<std::int64_t> episode_boundaries_;
    std::vector<ActivationEvent> activation_log_;
    std::function<void(const EpisodicAgentBase&)> boundary_hook_;
};

/// Model-free policy-zooming agent: UCB indices from empirical means with
/// statistical diameters, covering-invariant activation, doubling episodes.
class MfAgent : public EpisodicAgentBase {
  public:
    MfAgent(FamilyPtr family, MetricSpec metric, MfConstants constants);

    const MfConstants& constants() const { return constants_; }

    /// Exposed for tests: refresh diameters and run the activation loop.
    int maybe_activate();

  protected:
    void at_boundary() override;

  private:
    MfConstants constants_;
    void refresh_all();
};

} // namespace pz
