#include "policy_zoom/env.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>

namespace pz {

namespace {
double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

double pow4(double x) {
    double x2 = x * x;
    return x2 * x2;
}
} // namespace

double belief_update(double b, int a, int observed_c, double p01, double p11) {
    if (a == 1) {
        return observed_c == 1 ? p11 : p01;
    }
    return b * p11 + (1.0 - b) * p01;
}

// ---------------------------------------------------------------- riverswim

RiverswimEnv::RiverswimEnv() {
    name_ = "riverswim";
    state_bounds_ = {{0.0, 6.0}};
    // The displayed dynamics use (1 +- a)/..., consistent with actions in
    // [-1,1]; all parameterizations range over that interval.
    action_bounds_ = {{-1.0, 1.0}};
    lip_reward_ = 1.0;
    lip_kernel_ = 1.0;
    ergodic_C_ = 1.0;
    ergodic_alpha_ = 0.5;
}

std::array<double, 3> RiverswimEnv::move_probs(double a) {
    return {2.0 * (1.0 - a) / 5.0, 0.2, 2.0 * (1.0 + a) / 5.0};
}

StateVec RiverswimEnv::initial_state(RngStream&) const { return {0.0}; }

double RiverswimEnv::reward(const StateVec& s, const ActionVec& a) const {
    double x = s[0], u = a[0];
    return 0.005 * (pow4((x - 6.0) / 6.0) + pow4((u - 1.0) / 2.0)) +
           0.5 * (pow4(x / 6.0) + pow4((u + 1.0) / 2.0));
}

StepResult RiverswimEnv::step(const StateVec& s, const ActionVec& a, RngStream& rng) const {
    double x = s[0];
    double u = clamp(a[0], -1.0, 1.0);
    auto probs = move_probs(u);
    double r = reward(s, a);

    // Noise is drawn untruncated (variance 0.5); the position clamp bounds
    // the state.
    double draw = rng.uniform();
    double w = rng.normal(0.0, std::sqrt(0.5));
    double next;
    if (draw < probs[0]) {
        next = clamp(x - 0.5 * (1.0 + 0.5 * w), 0.0, 6.0);
    } else if (draw < probs[0] + probs[1]) {
        next = x;
    } else {
        next = clamp(x + 0.5 * (1.0 + 0.5 * w), 0.0, 6.0);
    }
    return {{next}, r, r};
}

// --------------------------------------------------------------- scheduling

SchedulingEnv::SchedulingEnv(double beta, double lambda, double p01, double p11, double e_max)
    : beta_(beta), lambda_(lambda), p01_(p01), p11_(p11), e_max_(e_max) {
    if (std::abs(beta) >= 1.0) throw ConfigError("scheduling: |beta| must be < 1");
    if (lambda <= 0.0) throw ConfigError("scheduling: lambda must be > 0");
    if (p01 <= 0.0 || p01 >= 1.0 || p11 <= 0.0 || p11 >= 1.0)
        throw ConfigError("scheduling: channel probabilities must lie in (0,1)");
    if (e_max <= 0.0) throw ConfigError("scheduling: e_max must be > 0");
    name_ = "scheduling";
    state_bounds_ = {{-e_max, e_max}, {0.0, 1.0}};
    action_bounds_ = {{0.0, 1.0}};
    lip_reward_ = 1.0;
    lip_kernel_ = 1.0;
    ergodic_C_ = 1.0;
    ergodic_alpha_ = 0.5;
}

StateVec SchedulingEnv::initial_state(RngStream& rng) const {
    // x_0 = xhat_0 = 0, channel starts at its stationary distribution.
    double pi1 = stationary_good_prob();
    double c0 = rng.bernoulli(pi1) ? 1.0 : 0.0;
    return {0.0, pi1, c0};
}

double SchedulingEnv::raw_reward(const StateVec& obs, const ActionVec& a) const {
    double e = obs[0];
    double u = a[0] >= 0.5 ? 1.0 : 0.0;
    return -e * e - lambda_ * u;
}

double SchedulingEnv::reward(const StateVec& obs, const ActionVec& a) const {
    // Affine rescaling of the raw reward into [0,1]; preserves the ordering
    // of policies since e is already clamped to [-e_max, e_max].
    return 1.0 + raw_reward(obs, a) / (e_max_ * e_max_ + lambda_);
}

double SchedulingEnv::error_update(double e, double w, int c, int a) const {
    double next = (beta_ * e + w) - beta_ * static_cast<double>(c * a) * e;
    return clamp(next, -e_max_, e_max_);
}

StepResult SchedulingEnv::step(const StateVec& s, const ActionVec& a, RngStream& rng) const {
    double e = s[0], b = s[1];
    int c = s[2] >= 0.5 ? 1 : 0;
    int u = a[0] >= 0.5 ? 1 : 0;

    double r = reward(s, a);
    double raw = raw_reward(s, a);

    double w = rng.normal(0.0, 1.0);
    double e_next = error_update(e, w, c, u);
    double b_next = belief_update(b, u, c, p01_, p11_);
    double p_good = c == 1 ? p11_ : p01_;
    double c_next = rng.bernoulli(p_good) ? 1.0 : 0.0;
    return {{e_next, b_next, c_next}, r, raw};
}

// ------------------------------------------------------------ two_arm_chain

namespace {
// Reward shape: increasing in the state, concave in the action with an
// interior maximum, normalized into [0,1].
constexpr double kActionPeak = 0.6;

double two_arm_reward(double s, double a) {
    double d = a - kActionPeak;
    return (s + 2.0 * (1.0 - d * d)) / 3.0;
}
} // namespace

TwoArmChainEnv::TwoArmChainEnv() {
    name_ = "two_arm_chain";
    state_bounds_ = {{0.0, 1.0}};
    action_bounds_ = {{0.0, 1.0}};
    lip_reward_ = 1.0;
    lip_kernel_ = 1.0;
    // The next-state distribution does not depend on the current state, so
    // the chain is stationary from t = 1 on.
    ergodic_C_ = 1.0;
    ergodic_alpha_ = 0.5;
}

StateVec TwoArmChainEnv::initial_state(RngStream&) const { return {0.25}; }

double TwoArmChainEnv::reward(const StateVec& s, const ActionVec& a) const {
    return two_arm_reward(s[0], clamp(a[0], 0.0, 1.0));
}

StepResult TwoArmChainEnv::step(const StateVec& s, const ActionVec& a, RngStream& rng) const {
    double u = clamp(a[0], 0.0, 1.0);
    double r = reward(s, a);
    double next = rng.bernoulli(u) ? rng.uniform(0.5, 1.0) : rng.uniform(0.0, 0.5);
    return {{next}, r, r};
}

double TwoArmChainEnv::stationary_right_mass(double mean_action_left, double mean_action_right) {
    return mean_action_left / (1.0 + mean_action_left - mean_action_right);
}

double TwoArmChainEnv::gain_of_constant_policy(double w) {
    // The reward is affine in s, so the stationary average is the reward at
    // the stationary state mean (1-w)*0.25 + w*0.75.
    double mean_state = 0.25 + 0.5 * w;
    return two_arm_reward(mean_state, w);
}

std::pair<double, double> TwoArmChainEnv::optimal_constant_policy() {
    // d/dw [0.25 + 0.5w + 2(1 - (w-0.6)^2)]/3 = 0  =>  w = 0.6 + 1/8.
    double w_star = kActionPeak + 0.125;
    return {w_star, gain_of_constant_policy(w_star)};
}

// ------------------------------------------------------------------ factory

namespace {
double param_or(const std::map<std::string, double>& params, const std::string& key, double dflt) {
    auto it = params.find(key);
    return it == params.end() ? dflt : it->second;
}
} // namespace

EnvPtr make_env(const std::string& name, const std::map<std::string, double>& params) {
    for (const auto& [key, value] : params) {
        (void)value;
        static const std::vector<std::string> known = {"beta", "lambda", "p01", "p11", "e_max"};
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown env parameter: " + key);
    }
    if (name == "riverswim") {
        if (!params.empty()) throw ConfigError("riverswim takes no parameters");
        return std::make_shared<RiverswimEnv>();
    }
    if (name == "scheduling") {
        return std::make_shared<SchedulingEnv>(
            param_or(params, "beta", 0.9), param_or(params, "lambda", 2.0),
            param_or(params, "p01", 0.2), param_or(params, "p11", 0.8),
            param_or(params, "e_max", 10.0));
    }
    if (name == "two_arm_chain") {
        if (!params.empty()) throw ConfigError("two_arm_chain takes no parameters");
        return std::make_shared<TwoArmChainEnv>();
    }
    throw ConfigError("unknown environment: " + name);
}

} // namespace pz
