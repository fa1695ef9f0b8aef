#include "policy_zoom/kernel_est.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace pz {

TransitionLog::TransitionLog(const PartitionTree& tree) {
    for (const Cell& c : tree.leaves()) records_.emplace(c, std::make_shared<Node>());
}

const TransitionLog::Node* TransitionLog::node(const Cell& leaf) const {
    auto it = records_.find(leaf);
    if (it == records_.end()) throw std::invalid_argument("transition log: not an active leaf");
    return it->second.get();
}

void TransitionLog::record(const Cell& source_leaf, StateVec successor) {
    auto it = records_.find(source_leaf);
    if (it == records_.end()) throw std::invalid_argument("transition log: not an active leaf");
    it->second->successors.push_back(std::move(successor));
}

void TransitionLog::on_split(const PartitionTree::SplitEvent& ev) {
    auto it = records_.find(ev.parent);
    if (it == records_.end()) throw std::invalid_argument("transition log: unknown split parent");
    std::shared_ptr<const Node> parent = it->second;
    records_.erase(it);
    for (const Cell& child : ev.children) {
        auto node = std::make_shared<Node>();
        node->parent = parent;
        records_.emplace(child, std::move(node));
    }
}

std::int64_t TransitionLog::lineage_count(const Cell& leaf) const {
    std::int64_t n = 0;
    for (const Node* p = node(leaf); p != nullptr; p = p->parent.get())
        n += static_cast<std::int64_t>(p->successors.size());
    return n;
}

DiscreteKernel empirical_kernel(const TransitionLog& log, const PartitionTree& tree) {
    DiscreteKernel dk;
    dk.sources = tree.leaves();
    dk.rows.reserve(dk.sources.size());
    for (const Cell& leaf : dk.sources) {
        KernelRow row;
        row.level = leaf.level;
        row.probs.assign(tree.tiling_size(leaf.level), 0.0);
        std::int64_t n = 0;
        log.for_each_successor(leaf, [&](const StateVec& s) {
            row.probs[tree.tiling_index(tree.cell_at(s, leaf.level))] += 1.0;
            ++n;
        });
        if (n == 0) {
            // no information: uniform over the row's bins
            std::fill(row.probs.begin(), row.probs.end(), 1.0 / row.probs.size());
        } else {
            for (double& p : row.probs) p /= static_cast<double>(n);
        }
        dk.rows.push_back(std::move(row));
    }
    return dk;
}

ContinuousKernel::ContinuousKernel(DiscreteKernel dk, const PartitionTree& tree)
    : dk_(std::move(dk)), tree_(&tree) {}

ContinuousKernel continuous_extension(DiscreteKernel dk, const PartitionTree& tree) {
    return ContinuousKernel(std::move(dk), tree);
}

double ContinuousKernel::prob(std::size_t row, const std::vector<Interval>& box) const {
    const KernelRow& r = dk_.rows[row];
    double side = std::ldexp(1.0, -r.level);
    double total = 0.0;
    std::size_t i = 0;
    for (const Cell& bin : tree_->level_tiling(r.level)) {
        double p = r.probs[i++];
        if (p == 0.0) continue;
        double overlap = 1.0;
        double vol = tree_->cell_volume(bin);
        for (std::size_t d = 0; d < box.size() && overlap > 0.0; ++d) {
            double lo = std::max({static_cast<double>(bin.anchor[d]) * side, box[d].lo,
                                  tree_->state_bounds()[d].lo});
            double hi = std::min({static_cast<double>(bin.anchor[d] + 1) * side, box[d].hi,
                                  tree_->state_bounds()[d].hi});
            overlap *= std::max(hi - lo, 0.0);
        }
        if (vol > 0.0) total += p * overlap / vol;
    }
    return total;
}

double ContinuousKernel::prob(std::size_t row, const Cell& cell) const {
    const KernelRow& r = dk_.rows[row];
    if (cell.level >= r.level) {
        // dyadic nesting: the cell lies inside exactly one bin
        int shift = cell.level - r.level;
        Cell bin;
        bin.level = r.level;
        bin.anchor.resize(cell.anchor.size());
        for (std::size_t d = 0; d < cell.anchor.size(); ++d)
            bin.anchor[d] = cell.anchor[d] >> shift;
        double p = r.probs[tree_->tiling_index(bin)];
        if (p == 0.0) return 0.0;
        double bin_vol = tree_->cell_volume(bin);
        return bin_vol > 0.0 ? p * tree_->cell_volume(cell) / bin_vol : 0.0;
    }
    std::vector<Interval> box(cell.anchor.size());
    double side = std::ldexp(1.0, -cell.level);
    for (std::size_t d = 0; d < box.size(); ++d)
        box[d] = {static_cast<double>(cell.anchor[d]) * side,
                  static_cast<double>(cell.anchor[d] + 1) * side};
    return prob(row, box);
}

DiscreteKernel rediscretize(const ContinuousKernel& kernel, int target_level) {
    const DiscreteKernel& src = kernel.discrete();
    for (const KernelRow& row : src.rows)
        if (row.level > target_level)
            throw std::invalid_argument("rediscretize: target level coarser than a source row");

    std::vector<Cell> fine = kernel.tree().level_tiling(target_level);
    DiscreteKernel out;
    out.sources = src.sources;
    out.rows.resize(src.rows.size());
    for (std::size_t i = 0; i < src.rows.size(); ++i) {
        out.rows[i].level = target_level;
        out.rows[i].probs.resize(fine.size());
        for (std::size_t j = 0; j < fine.size(); ++j)
            out.rows[i].probs[j] = kernel.prob(i, fine[j]);
    }
    return out;
}

double confidence_radius(const PartitionTree& tree, const Cell& cell, std::int64_t visits,
                         double policy_lipschitz, double kernel_lipschitz, double density_bound) {
    double n = static_cast<double>(std::max<std::int64_t>(visits, 1));
    double exponent = 1.0 / (static_cast<double>(tree.state_dim()) + 2.0);
    double statistical = 3.0 * std::pow(tree.constants().scale_log() / n, exponent);
    double discretization =
        (3.0 * (1.0 + policy_lipschitz) * kernel_lipschitz + density_bound) *
        tree.cell_diameter(cell);
    return std::min(statistical + discretization, 2.0);
}

ConfidenceBall build_ball(const TransitionLog& log, const PartitionTree& tree,
                          double policy_lipschitz, double kernel_lipschitz, double density_bound) {
    ConfidenceBall ball;
    ball.sources = tree.leaves();
    ball.fine_level = tree.max_level();

    ContinuousKernel extended = continuous_extension(empirical_kernel(log, tree), tree);
    std::vector<Cell> fine = tree.min_level_cells();
    ball.center.resize(ball.sources.size());
    for (std::size_t i = 0; i < ball.sources.size(); ++i) {
        ball.center[i].resize(fine.size());
        for (std::size_t j = 0; j < fine.size(); ++j)
            ball.center[i][j] = extended.prob(i, fine[j]);
    }
    ball.radii.reserve(ball.sources.size());
    for (const Cell& leaf : ball.sources)
        ball.radii.push_back(confidence_radius(tree, leaf, log.lineage_count(leaf),
                                               policy_lipschitz, kernel_lipschitz, density_bound));
    return ball;
}

} // namespace pz
