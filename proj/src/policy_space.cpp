#include "policy_zoom/policy_space.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace pz {

namespace {
double clamp(double x, const Interval& iv) { return std::min(std::max(x, iv.lo), iv.hi); }

std::string family_name(FamilyId id) {
    switch (id) {
    case FamilyId::riverswim_const: return "riverswim_const";
    case FamilyId::riverswim_affine: return "riverswim_affine";
    case FamilyId::riverswim_quad: return "riverswim_quad";
    case FamilyId::scheduling_threshold: return "scheduling_threshold";
    case FamilyId::two_arm_const: return "two_arm_const";
    }
    return "?";
}

/// State box the sup-norm policy metric is taken over.
std::vector<Interval> family_state_box(FamilyId id) {
    switch (id) {
    case FamilyId::riverswim_const:
    case FamilyId::riverswim_affine:
    case FamilyId::riverswim_quad: return {{0.0, 6.0}};
    case FamilyId::scheduling_threshold: return {{-10.0, 10.0}, {0.0, 1.0}};
    case FamilyId::two_arm_const: return {{0.0, 1.0}};
    }
    return {};
}

/// Grid points lo, lo+step, ..., with the upper endpoint always included.
std::vector<double> axis_grid(const Interval& iv, double step) {
    std::vector<double> pts;
    if (iv.length() <= 0.0) {
        pts.push_back(iv.lo);
        return pts;
    }
    long n = static_cast<long>(std::floor(iv.length() / step + 1e-9));
    pts.reserve(n + 2);
    for (long i = 0; i <= n; ++i) pts.push_back(iv.lo + static_cast<double>(i) * step);
    if (pts.back() < iv.hi - 1e-12 * std::max(1.0, std::abs(iv.hi))) pts.push_back(iv.hi);
    return pts;
}
} // namespace

PolicyFamily::PolicyFamily(FamilyId id, std::vector<Interval> w_bounds,
                           std::vector<Interval> action_bounds, double policy_lipschitz,
                           double param_metric_scale)
    : id_(id), name_(family_name(id)), w_bounds_(std::move(w_bounds)),
      action_bounds_(std::move(action_bounds)), policy_lipschitz_(policy_lipschitz),
      param_metric_scale_(param_metric_scale) {}

ActionVec PolicyFamily::evaluate(const std::vector<double>& w, const StateVec& s) const {
    double a = 0.0;
    switch (id_) {
    case FamilyId::riverswim_const:
    case FamilyId::two_arm_const: a = w[0]; break;
    case FamilyId::riverswim_affine: a = w[0] + w[1] * s[0]; break;
    case FamilyId::riverswim_quad: a = w[0] + w[1] * s[0] + w[2] * s[0] * s[0]; break;
    case FamilyId::scheduling_threshold: {
        double e = s[0], b = s[1];
        a = (w[0] + w[1] * e < b) ? 1.0 : 0.0;
        break;
    }
    }
    return {clamp(a, action_bounds_[0])};
}

bool PolicyFamily::same_as(const PolicyFamily& other) const { return id_ == other.id_; }

FamilyPtr make_family(FamilyId id) {
    switch (id) {
    case FamilyId::riverswim_const:
        return std::make_shared<PolicyFamily>(id, std::vector<Interval>{{-1.0, 1.0}},
                                              std::vector<Interval>{{-1.0, 1.0}}, 0.0, 1.0);
    case FamilyId::riverswim_affine:
        // sup-norm distance is max(|dw1|, |dw1 + 6 dw2|); the worst ratio
        // ||dw||_2 / sup is attained at dw1 = -3 dw2, giving sqrt(10)/3.
        return std::make_shared<PolicyFamily>(
            id, std::vector<Interval>{{-1.0, 1.0}, {-0.5, 0.5}},
            std::vector<Interval>{{-1.0, 1.0}}, 0.5, std::sqrt(10.0) / 3.0);
    case FamilyId::riverswim_quad:
        // Worst direction is the Chebyshev polynomial on [0,6] (numeric
        // min-sup 0.5947); 1.69 rounds the ratio up so the parameter metric
        // stays an over-approximation of policy closeness.
        return std::make_shared<PolicyFamily>(
            id, std::vector<Interval>{{-1.0, 1.0}, {-0.5, 0.5}, {-0.5, 0.5}},
            std::vector<Interval>{{-1.0, 1.0}}, 6.5, 1.69);
    case FamilyId::scheduling_threshold:
        // Indicator policies are piecewise constant (slope 0 away from the
        // threshold curve); the sup metric is degenerate for them, so the
        // parameter metric with unit scale is the operative one.
        return std::make_shared<PolicyFamily>(
            id, std::vector<Interval>{{1.0, 3.0}, {-1.0, -0.01}},
            std::vector<Interval>{{0.0, 1.0}}, 0.0, 1.0);
    case FamilyId::two_arm_const:
        return std::make_shared<PolicyFamily>(id, std::vector<Interval>{{0.0, 1.0}},
                                              std::vector<Interval>{{0.0, 1.0}}, 0.0, 1.0);
    }
    throw ConfigError("unknown policy family id");
}

FamilyPtr make_family(const std::string& name) {
    if (name == "riverswim_const") return make_family(FamilyId::riverswim_const);
    if (name == "riverswim_affine") return make_family(FamilyId::riverswim_affine);
    if (name == "riverswim_quad") return make_family(FamilyId::riverswim_quad);
    if (name == "scheduling_threshold") return make_family(FamilyId::scheduling_threshold);
    if (name == "two_arm_const") return make_family(FamilyId::two_arm_const);
    throw ConfigError("unknown policy family: " + name);
}

namespace {
double sup_grid_distance(const ParamPolicy& a, const ParamPolicy& b, const MetricSpec& m) {
    std::vector<Interval> box = m.state_bounds.empty() ? family_state_box(a.family->id())
                                                       : m.state_bounds;
    std::vector<std::vector<double>> axes;
    for (const auto& iv : box) axes.push_back(axis_grid(iv, m.grid_resolution));

    std::vector<std::size_t> idx(axes.size(), 0);
    StateVec s(axes.size());
    double sup = 0.0;
    while (true) {
        for (std::size_t d = 0; d < axes.size(); ++d) s[d] = axes[d][idx[d]];
        ActionVec ua = a.evaluate(s);
        ActionVec ub = b.evaluate(s);
        double dist2 = 0.0;
        for (std::size_t j = 0; j < ua.size(); ++j) dist2 += (ua[j] - ub[j]) * (ua[j] - ub[j]);
        sup = std::max(sup, std::sqrt(dist2));
        std::size_t d = 0;
        while (d < axes.size() && ++idx[d] == axes[d].size()) idx[d++] = 0;
        if (d == axes.size()) break;
    }
    return sup;
}
} // namespace

double policy_distance(const ParamPolicy& a, const ParamPolicy& b, const MetricSpec& m) {
    if (!a.family->same_as(*b.family))
        throw std::invalid_argument("policy_distance: policies from different families");
    if (m.mode == MetricMode::param_euclid) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < a.w.size(); ++i) d2 += (a.w[i] - b.w[i]) * (a.w[i] - b.w[i]);
        return std::sqrt(d2) / a.family->param_metric_scale();
    }
    return sup_grid_distance(a, b, m);
}

std::optional<ParamPolicy> find_uncovered(const std::vector<PolicyBall>& balls,
                                          const FamilyPtr& family, double resolution,
                                          const MetricSpec& m) {
    if (resolution <= 0.0) throw std::invalid_argument("find_uncovered: resolution must be > 0");
    const auto& box = family->param_bounds();
    if (box.empty()) throw std::invalid_argument("find_uncovered: empty parameter box");
    for (const auto& iv : box)
        if (iv.hi < iv.lo) throw std::invalid_argument("find_uncovered: empty parameter box");

    std::vector<std::vector<double>> axes;
    for (const auto& iv : box) axes.push_back(axis_grid(iv, resolution));

    std::vector<std::size_t> idx(box.size(), 0);
    ParamPolicy probe{family, std::vector<double>(box.size(), 0.0)};
    std::size_t hint = 0; // consecutive grid points tend to share a covering ball
    while (true) {
        for (std::size_t d = 0; d < box.size(); ++d) probe.w[d] = axes[d][idx[d]];
        bool covered = false;
        for (std::size_t j = 0; j < balls.size() && !covered; ++j) {
            std::size_t b = (hint + j) % balls.size();
            if (policy_distance(probe, balls[b].center, m) <= balls[b].radius) {
                covered = true;
                hint = b;
            }
        }
        if (!covered) return probe;
        // lexicographic order: the last dimension varies fastest
        std::size_t d = box.size();
        while (d > 0 && ++idx[d - 1] == axes[d - 1].size()) idx[--d] = 0;
        if (d == 0) return std::nullopt;
    }
}

int ceil_log_inv_alpha(double C, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0,1)");
    int k = 0;
    double x = 1.0;
    while (x < C * (1.0 - 1e-12)) {
        x /= alpha;
        ++k;
    }
    return k;
}

double lipschitz_L_J(double L_r, double L_p, double C, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0,1)");
    if (!(C > 0.0)) throw std::domain_error("C must be > 0");
    return L_r + L_p / (2.0 * (1.0 - alpha)) * (ceil_log_inv_alpha(C, alpha) + 1);
}

} // namespace pz
