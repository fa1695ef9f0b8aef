#include "policy_zoom/agent_mb.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <numeric>

namespace pz {

namespace {
/// Row index of each fine-grid cell's containing leaf.
std::vector<int> fine_to_leaf_rows(const ConfidenceBall& ball, const PartitionTree& tree) {
    std::map<Cell, int> row_of;
    for (std::size_t i = 0; i < ball.sources.size(); ++i)
        row_of.emplace(ball.sources[i], static_cast<int>(i));
    std::vector<int> rows;
    std::vector<Cell> fine = tree.level_tiling(ball.fine_level);
    rows.reserve(fine.size());
    for (const Cell& c : fine) {
        Cell leaf = tree.locate(tree.representative(c));
        rows.push_back(row_of.at(leaf));
    }
    return rows;
}
} // namespace

EviResult evi_gain_on_ball(const ConfidenceBall& ball, const PartitionTree& tree,
                           const std::vector<double>& fine_rewards, double tol, int max_iter,
                           double span_bound) {
    EviSpec spec;
    spec.rows = &ball.center;
    spec.radii = &ball.radii;
    spec.row_of_unit = fine_to_leaf_rows(ball, tree);
    spec.col_unit.resize(fine_rewards.size());
    std::iota(spec.col_unit.begin(), spec.col_unit.end(), 0);
    spec.rewards = fine_rewards;
    return evi_iterate(spec, tol, max_iter, span_bound);
}

EviResult diam_iteration_on_ball(const ConfidenceBall& ball, const PartitionTree& tree, double tol,
                                 int max_iter, double span_bound) {
    EviSpec spec;
    spec.rows = &ball.center;
    spec.radii = &ball.radii;
    spec.row_of_unit.resize(ball.sources.size());
    std::iota(spec.row_of_unit.begin(), spec.row_of_unit.end(), 0);

    // a fine column feeds back the leaf value only when it is itself an
    // active leaf (its representative then coincides with the leaf's)
    std::map<Cell, int> row_of;
    for (std::size_t i = 0; i < ball.sources.size(); ++i)
        row_of.emplace(ball.sources[i], static_cast<int>(i));
    std::vector<Cell> fine = tree.level_tiling(ball.fine_level);
    spec.col_unit.assign(fine.size(), -1);
    for (std::size_t j = 0; j < fine.size(); ++j) {
        auto it = row_of.find(fine[j]);
        if (it != row_of.end()) spec.col_unit[j] = it->second;
    }

    spec.rewards.reserve(ball.sources.size());
    for (const Cell& leaf : ball.sources) spec.rewards.push_back(tree.cell_diameter(leaf));
    return evi_iterate(spec, tol, max_iter, span_bound);
}

MbAgent::MbAgent(EnvPtr env, FamilyPtr family, MetricSpec metric, Constants constants,
                 double horizon, double delta, double evi_tol)
    : EpisodicAgentBase(std::move(family), std::move(metric)), env_(std::move(env)),
      constants_(derive_constants(constants)), horizon_(horizon), delta_(delta),
      evi_tol_(evi_tol) {}

void MbAgent::make_mb_state(MbState& st) const {
    PartitionConstants pc;
    pc.conc_scale = constants_.c_d_b;
    pc.horizon = horizon_;
    pc.delta = delta_;
    st.tree = std::make_unique<PartitionTree>(env_->state_bounds(), pc);
    st.log = std::make_unique<TransitionLog>(*st.tree);
    st.dirty = true;
}

void MbAgent::on_observation(const StateVec& s) {
    if (prev_state_.has_value()) {
        assert(current_ < mb_.size());
        MbState& st = mb_[current_];
        Cell leaf = st.tree->locate(*prev_state_);
        st.log->record(leaf, s);
        if (auto split = st.tree->record_visit(*prev_state_)) st.log->on_split(*split);
        st.dirty = true;
    }
    prev_state_ = s;
}

void MbAgent::rebuild(std::size_t i, PolicyRecord& rec) {
    MbState& st = mb_[i];
    ConfidenceBall ball = build_ball(*st.log, *st.tree, family_->policy_lipschitz(),
                                     constants_.L_p, constants_.C_p);

    std::vector<Cell> fine = st.tree->level_tiling(ball.fine_level);
    std::vector<double> rewards;
    rewards.reserve(fine.size());
    double bias_scale = (1.0 + family_->policy_lipschitz()) * constants_.L_r;
    for (const Cell& c : fine) {
        StateVec rep = st.tree->representative(c);
        Cell leaf = st.tree->locate(rep);
        rewards.push_back(env_->reward(rep, rec.policy.evaluate(rep)) +
                          bias_scale * st.tree->cell_diameter(leaf));
    }

    int max_iter = default_evi_max_iter(fine.size(), constants_.alpha);
    double span_bound = 10.0 * constants_.C_vbar;

    EviResult gain = evi_gain_on_ball(ball, *st.tree, rewards, evi_tol_, max_iter, span_bound);
    st.gain = gain.gain;
    if (gain.span_tripped && !st.span_tripped) {
        st.span_tripped = true;
        ++span_trips_;
    }

    if (rec.plays == 0) {
        st.diam_approx = 1.0;  // never played
    } else {
        EviResult raw = diam_iteration_on_ball(ball, *st.tree, evi_tol_, max_iter, span_bound);
        st.diam_approx = raw.gain / constants_.c_diam;
    }
    rec.diameter = st.diam_approx;
    rec.index = st.gain + constants_.L_J * st.diam_approx;
    st.dirty = false;
}

void MbAgent::at_boundary() {
    for (std::size_t i = 0; i < records_.size(); ++i)
        if (mb_[i].dirty) rebuild(i, records_[i]);

    activate_uncovered([&](PolicyRecord& fresh) {
        mb_.emplace_back();
        make_mb_state(mb_.back());
        rebuild(mb_.size() - 1, fresh);
    });
}

} // namespace pz
