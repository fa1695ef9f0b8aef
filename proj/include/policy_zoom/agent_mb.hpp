#pragma once

#include "policy_zoom/agent_mf.hpp"
#include "policy_zoom/env.hpp"
#include "policy_zoom/evi.hpp"
#include "policy_zoom/kernel_est.hpp"

#include <memory>

namespace pz {

/// Optimistic gain of a policy over its confidence ball: value iteration
/// on the fine grid with rows looked up through the containing leaf.
/// fine_rewards holds the bias-augmented reward per fine-grid state.
EviResult evi_gain_on_ball(const ConfidenceBall& ball, const PartitionTree& tree,
                           const std::vector<double>& fine_rewards, double tol, int max_iter,
                           double span_bound = 0.0);

/// Diameter iteration: the same optimistic recursion with cell diameters
/// as rewards, run over the leaf representatives; columns that are not
/// leaf representatives feed back zero.
EviResult diam_iteration_on_ball(const ConfidenceBall& ball, const PartitionTree& tree, double tol,
                                 int max_iter, double span_bound = 0.0);

/// Model-based policy-zooming agent. Each active policy owns an adaptive
/// partition, a transition log and a confidence ball, refreshed at episode
/// boundaries; the UCB index is the optimistic gain plus L_J times the
/// approximate diameter.
class MbAgent : public EpisodicAgentBase {
  public:
    MbAgent(EnvPtr env, FamilyPtr family, MetricSpec metric, Constants constants, double horizon,
            double delta, double evi_tol = 1e-6);

    struct MbState {
        std::unique_ptr<PartitionTree> tree;
        std::unique_ptr<TransitionLog> log;
        double gain = 0.0;
        double diam_approx = 1.0;
        bool dirty = true;
        bool span_tripped = false;
    };

    const Constants& constants() const { return constants_; }
    const MbState& mb_state(std::size_t i) const { return mb_[i]; }
    int span_trip_count() const { return span_trips_; }

  protected:
    void on_observation(const StateVec& s) override;
    void at_boundary() override;

  private:
    EnvPtr env_;
    Constants constants_;
    double horizon_;
    double delta_;
    double evi_tol_;
    std::vector<MbState> mb_;
    std::optional<StateVec> prev_state_;
    int span_trips_ = 0;

    void make_mb_state(MbState& st) const;
    void rebuild(std::size_t i, PolicyRecord& rec);
};

} // namespace pz
