#pragma once

#include "policy_zoom/env.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pz {

enum class FamilyId {
    riverswim_const,
    riverswim_affine,
    riverswim_quad,
    scheduling_threshold,
    two_arm_const,
};

/// A finitely parameterized family of deterministic policies over a box
/// W of parameters. Immutable; operations are pure.
class PolicyFamily {
  public:
    PolicyFamily(FamilyId id, std::vector<Interval> w_bounds, std::vector<Interval> action_bounds,
                 double policy_lipschitz, double param_metric_scale);

    FamilyId id() const { return id_; }
    const std::string& name() const { return name_; }
    int param_dim() const { return static_cast<int>(w_bounds_.size()); }
    const std::vector<Interval>& param_bounds() const { return w_bounds_; }
    const std::vector<Interval>& action_bounds() const { return action_bounds_; }
    /// Lipschitz constant of each member policy (state -> action).
    double policy_lipschitz() const { return policy_lipschitz_; }
    /// Scale L_W relating the parameter metric to the policy metric:
    /// ||w - w'||_2 <= L_W * rho_Phi(w, w').
    double param_metric_scale() const { return param_metric_scale_; }

    ActionVec evaluate(const std::vector<double>& w, const StateVec& s) const;

    bool same_as(const PolicyFamily& other) const;

  private:
    FamilyId id_;
    std::string name_;
    std::vector<Interval> w_bounds_;
    std::vector<Interval> action_bounds_;
    double policy_lipschitz_;
    double param_metric_scale_;
};

using FamilyPtr = std::shared_ptr<const PolicyFamily>;

/// Families are a closed set with documented parameter boxes and constants.
FamilyPtr make_family(const std::string& name);
FamilyPtr make_family(FamilyId id);

struct ParamPolicy {
    FamilyPtr family;
    std::vector<double> w;

    ActionVec evaluate(const StateVec& s) const { return family->evaluate(w, s); }
};

struct PolicyBall {
    ParamPolicy center;
    double radius = 0.0;
};

enum class MetricMode {
    param_euclid,  // ||w - w'||_2 / L_W, the operative surrogate
    sup_grid,      // sup over a fixed state grid of the action distance
};

struct MetricSpec {
    MetricMode mode = MetricMode::param_euclid;
    /// Grid spacing for sup_grid mode (per state dimension).
    double grid_resolution = 0.01;
    /// State box the sup is taken over (sup_grid mode).
    std::vector<Interval> state_bounds;
};

double policy_distance(const ParamPolicy& a, const ParamPolicy& b, const MetricSpec& m);

/// Covering oracle: scans the lexicographic parameter grid at the given
/// spacing and returns the first point not covered by any ball, or nullopt
/// if every grid point is covered.
std::optional<ParamPolicy> find_uncovered(const std::vector<PolicyBall>& balls,
                                          const FamilyPtr& family, double resolution,
                                          const MetricSpec& m);

/// Lipschitz constant of the average reward over the policy space:
/// L_r + L_p/(2(1-alpha)) * (ceil(log_{1/alpha}(C)) + 1).
double lipschitz_L_J(double L_r, double L_p, double C, double alpha);

/// Smallest nonnegative k with (1/alpha)^k >= C; 0 when C <= 1.
int ceil_log_inv_alpha(double C, double alpha);

} // namespace pz
