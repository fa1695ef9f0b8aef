#pragma once

#include "policy_zoom/agent_mf.hpp"

namespace pz {

/// Fixed epsilon-net over the parameter box, built once at t = 0.
struct UniformNet {
    double epsilon = 0.0;
    std::vector<ParamPolicy> policies;  // lexicographic grid order
};

/// Endpoint-inclusive grid with per-dimension spacing epsilon * L_W, so
/// the net radius is at most epsilon in the parameter surrogate metric.
UniformNet build_net(const FamilyPtr& family, double epsilon,
                     std::size_t max_policies = 1000000);

/// Policy UCB with uniform discretization: the model-free machinery on a
/// fixed net, with index = empirical mean + diameter (no Lipschitz factor).
class PolicyUcbAgent : public EpisodicAgentBase {
  public:
    PolicyUcbAgent(FamilyPtr family, MetricSpec metric, MfConstants constants, double epsilon);

    const UniformNet& net() const { return net_; }

  protected:
    void at_boundary() override;

  private:
    MfConstants constants_;
    UniformNet net_;
};

} // namespace pz
