#pragma once

#include "policy_zoom/partition.hpp"

#include <memory>
#include <vector>

namespace pz {

/// One row of a discretized kernel: a distribution over the full
/// level-`level` tiling of the state box, in tiling order.
struct KernelRow {
    int level = 0;
    std::vector<double> probs;
};

/// Row-stochastic discretization of a transition kernel. Rows correspond
/// to source cells; each row bins destinations at its own level.
struct DiscreteKernel {
    std::vector<Cell> sources;
    std::vector<KernelRow> rows;
};

/// Successor log per source cell. A split chains the children to the
/// parent record, so a cell's lineage successors realize the same
/// ancestor-inclusive counting as the partition's visit counters.
class TransitionLog {
  public:
    explicit TransitionLog(const PartitionTree& tree);

    void record(const Cell& source_leaf, StateVec successor);
    void on_split(const PartitionTree::SplitEvent& ev);

    std::int64_t lineage_count(const Cell& leaf) const;
    /// Applies fn to every successor recorded against the leaf's lineage.
    template <class Fn> void for_each_successor(const Cell& leaf, Fn&& fn) const {
        for (const Node* n = node(leaf); n != nullptr; n = n->parent.get())
            for (const StateVec& s : n->successors) fn(s);
    }

  private:
    struct Node {
        std::vector<StateVec> successors;
        std::shared_ptr<const Node> parent;
    };
    std::map<Cell, std::shared_ptr<Node>> records_;
    const Node* node(const Cell& leaf) const;
    friend class ContinuousKernel;
};

DiscreteKernel empirical_kernel(const TransitionLog& log, const PartitionTree& tree);

/// Piecewise-constant continuous extension of a discretized kernel:
/// within each destination cell the mass is spread uniformly.
class ContinuousKernel {
  public:
    ContinuousKernel(DiscreteKernel dk, const PartitionTree& tree);

    const DiscreteKernel& discrete() const { return dk_; }
    const PartitionTree& tree() const { return *tree_; }

    /// p(row, B) for an axis-aligned box B.
    double prob(std::size_t row, const std::vector<Interval>& box) const;
    /// p(row, cell) via exact dyadic nesting when cell.level >= row level.
    double prob(std::size_t row, const Cell& cell) const;

  private:
    DiscreteKernel dk_;
    const PartitionTree* tree_;
};

ContinuousKernel continuous_extension(DiscreteKernel dk, const PartitionTree& tree);

/// Re-discretizes onto the full tiling at target_level; all rows share
/// that destination level afterwards.
DiscreteKernel rediscretize(const ContinuousKernel& kernel, int target_level);

/// L1 confidence radius of an estimated kernel row, capped at 2 (the L1
/// diameter of the simplex).
double confidence_radius(const PartitionTree& tree, const Cell& cell, std::int64_t visits,
                         double policy_lipschitz, double kernel_lipschitz, double density_bound);

/// The set of plausible kernels: the re-discretized center plus per-row
/// L1 radii. Rows follow tree.leaves() order; columns are the fine tiling.
struct ConfidenceBall {
    std::vector<Cell> sources;
    int fine_level = 0;
    std::vector<std::vector<double>> center;
    std::vector<double> radii;
};

ConfidenceBall build_ball(const TransitionLog& log, const PartitionTree& tree,
                          double policy_lipschitz, double kernel_lipschitz, double density_bound);

} // namespace pz
