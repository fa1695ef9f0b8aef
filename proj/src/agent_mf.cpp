#include "policy_zoom/agent_mf.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace pz {

MfConstants make_mf_constants(double C, double alpha, double c_d_f, double horizon, double delta,
                              double L_J) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0,1)");
    MfConstants c;
    c.ergodic_C = C;
    c.alpha = alpha;
    c.scale_log = c_d_f * std::log(horizon / delta);
    c.L_J = L_J;
    return c;
}

double mf_diameter(const PolicyRecord& rec, const MfConstants& c) {
    double n = static_cast<double>(std::max<std::int64_t>(rec.plays, 1));
    double k = static_cast<double>(rec.episodes);
    return c.ergodic_C / (1.0 - c.alpha) * (std::sqrt(c.scale_log / n) + (1.0 + k) / n);
}

double mf_index(const PolicyRecord& rec, double diameter, double L_J) {
    double n = static_cast<double>(std::max<std::int64_t>(rec.plays, 1));
    return rec.reward_sum / n + (1.0 + L_J) * diameter;
}

std::size_t select_policy(const std::vector<PolicyRecord>& records) {
    if (records.empty()) throw std::invalid_argument("select_policy: no active policies");
    std::size_t best = 0;
    for (std::size_t i = 1; i < records.size(); ++i)
        if (records[i].index > records[best].index) best = i;
    return best;
}

EpisodicAgentBase::EpisodicAgentBase(FamilyPtr family, MetricSpec metric)
    : family_(std::move(family)), metric_(std::move(metric)) {}

void EpisodicAgentBase::credit_final(double reward) {
    assert(current_ < records_.size());
    records_[current_].reward_sum += reward;
}

ActionVec EpisodicAgentBase::step(const StateVec& s, std::optional<double> prev_reward) {
    on_observation(s);
    if (prev_reward.has_value()) {
        assert(current_ < records_.size());
        records_[current_].reward_sum += *prev_reward;
    }
    if (episode_ordinal_ == 0 || steps_in_episode_ >= episode_length_) {
        ++episode_ordinal_;
        steps_in_episode_ = 0;
        episode_boundaries_.push_back(total_steps_);
        at_boundary();
        current_ = select_policy(records_);
        episode_length_ = std::max<std::int64_t>(1, records_[current_].plays);
        ++records_[current_].episodes;
        if (boundary_hook_) boundary_hook_(*this);
    }
    ++steps_in_episode_;
    ++records_[current_].plays;
    ++total_steps_;
    return records_[current_].policy.evaluate(s);
}

int EpisodicAgentBase::activate_uncovered(const std::function<void(PolicyRecord&)>& init_fresh) {
    int activated = 0;
    while (true) {
        std::vector<PolicyBall> balls;
        balls.reserve(records_.size());
        double min_radius = std::numeric_limits<double>::infinity();
        for (const PolicyRecord& rec : records_) {
            balls.push_back({rec.policy, rec.diameter});
            min_radius = std::min(min_radius, rec.diameter);
        }
        double resolution;
        if (balls.empty()) {
            double side = 0.0;
            for (const Interval& iv : family_->param_bounds()) side = std::max(side, iv.length());
            resolution = std::max(side, 1e-3);
        } else {
            resolution = std::max(min_radius / 4.0, 1e-3);
        }
        std::optional<ParamPolicy> point = find_uncovered(balls, family_, resolution, metric_);
        if (!point.has_value()) break;

        ActivationEvent ev;
        ev.t = total_steps_;
        ev.w = point->w;
        if (!records_.empty()) {
            double best = std::numeric_limits<double>::infinity();
            for (const PolicyRecord& rec : records_) {
                double d = policy_distance(*point, rec.policy, metric_);
                if (d < best) {
                    best = d;
                    ev.parent_diameter = rec.diameter;
                }
            }
        }
        activation_log_.push_back(ev);

        PolicyRecord fresh;
        fresh.policy = std::move(*point);
        fresh.id = static_cast<int>(records_.size());
        init_fresh(fresh);
        records_.push_back(std::move(fresh));
        ++activated;
    }
    return activated;
}

MfAgent::MfAgent(FamilyPtr family, MetricSpec metric, MfConstants constants)
    : EpisodicAgentBase(std::move(family), std::move(metric)), constants_(constants) {}

void MfAgent::refresh_all() {
    for (PolicyRecord& rec : records_) {
        rec.diameter = mf_diameter(rec, constants_);
        rec.index = mf_index(rec, rec.diameter, constants_.L_J);
    }
}

int MfAgent::maybe_activate() {
    refresh_all();
    return activate_uncovered([&](PolicyRecord& fresh) {
        fresh.diameter = mf_diameter(fresh, constants_);
        fresh.index = mf_index(fresh, fresh.diameter, constants_.L_J);
    });
}

void MfAgent::at_boundary() {
    maybe_activate();
#ifndef NDEBUG
    {
        std::vector<PolicyBall> balls;
        for (const PolicyRecord& rec : records_) balls.push_back({rec.policy, rec.diameter});
        double min_radius = std::numeric_limits<double>::infinity();
        for (const PolicyBall& b : balls) min_radius = std::min(min_radius, b.radius);
        assert(!find_uncovered(balls, family_, std::max(min_radius / 4.0, 1e-3), metric_)
                    .has_value());
    }
#endif
}

} // namespace pz
