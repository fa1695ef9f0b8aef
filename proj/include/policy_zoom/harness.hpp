#pragma once

#include "policy_zoom/agent_mb.hpp"
#include "policy_zoom/agent_mf.hpp"
#include "policy_zoom/baseline.hpp"
#include "policy_zoom/config.hpp"

#include <functional>
#include <memory>
#include <string>

namespace pz {

struct RunResult {
    std::uint64_t seed = 0;
    std::vector<double> reward_clipped;
    std::vector<double> reward_raw;
    std::vector<int> policy_id;            // per step
    std::vector<std::int64_t> episode_id;  // per step
    std::vector<std::int64_t> episode_boundaries;
    std::vector<ActivationEvent> activations;

    struct PolicySnapshot {
        int id = 0;
        std::vector<double> w;
        std::int64_t plays = 0;
        std::int64_t episodes = 0;
        double reward_sum = 0.0;
        double diameter = 0.0;
    };
    std::vector<PolicySnapshot> final_active;
};

struct GainEstimate {
    double J_star = 0.0;
    double half_width = 0.0;  // 95% CI half width
    std::string method;
};

struct OracleResult {
    GainEstimate estimate;
    std::vector<std::vector<double>> grid_w;  // lexicographic parameter grid
    std::vector<double> gains;                // estimated gain per grid point
    std::size_t best_index = 0;
    std::uint64_t seed = 0;
};

/// Construction helpers shared by runs, the oracle and the diagnostics.
EnvPtr env_from_config(const ExperimentConfig& cfg);
Constants constants_from_config(const ExperimentConfig& cfg, const Env& env,
                                const PolicyFamily& family);
MetricSpec metric_from_config(const ExperimentConfig& cfg, const Env& env);
std::unique_ptr<EpisodicAgentBase> agent_from_config(const ExperimentConfig& cfg, const EnvPtr& env,
                                                     const FamilyPtr& family);

/// One seeded trajectory of the configured agent; deterministic per
/// (config, seed).
RunResult run_experiment(const ExperimentConfig& cfg, std::uint64_t seed);

/// Rollout of a fixed action rule; returns (clipped, raw) per step.
std::pair<std::vector<double>, std::vector<double>>
simulate_policy(const EnvPtr& env, const std::function<ActionVec(const StateVec&)>& act,
                std::int64_t horizon, std::uint64_t seed);

/// Grid-search Monte Carlo estimate of the best attainable gain. Results
/// are cached on disk keyed by (env, family, budget, seed); the cache dir
/// is POLICY_ZOOM_CACHE when set, else <out_dir>/oracle_cache.
OracleResult estimate_optimal_gain(const ExperimentConfig& cfg, const OracleBudget& budget,
                                   std::uint64_t oracle_seed = 9000);

/// Gain of the oracle grid point nearest to w.
double nearest_oracle_gain(const OracleResult& oracle, const std::vector<double>& w);

/// R(t) = t * J_star - sum_{i<t} clipped rewards, t = 1..T (compensated sum).
std::vector<double> regret_curve(const RunResult& run, const GainEstimate& J);

struct AggregateResult {
    std::vector<double> mean;
    std::vector<double> stderr_;
};
/// Pointwise mean and standard error across aligned curves (>= 2 runs).
AggregateResult aggregate(const std::vector<std::vector<double>>& curves);

/// Suboptimality-gap histogram of activated policies against the oracle
/// gains; the last bucket is (edges.back(), inf).
struct ActivationTable {
    std::vector<double> edges = {0.05, 0.1, 0.25};
    std::vector<std::int64_t> counts;  // edges.size() + 1 buckets
    std::int64_t total = 0;
    double share_above(double edge) const;
};
ActivationTable activation_quality(const std::vector<RunResult>& runs, const OracleResult& oracle);
ActivationTable activation_quality_of_net(const UniformNet& net, const OracleResult& oracle);

struct ZoomDiagnosticRow {
    double gamma = 0.0;
    std::int64_t cover_band = 0;   // greedy cover count of the (gamma, 2*gamma] band
    std::int64_t cover_below = 0;  // greedy cover count of the <= gamma set
};
struct ZoomDiagnostic {
    std::vector<ZoomDiagnosticRow> rows;
    double d_z_hat = 0.0;  // log-log regression slope
};
ZoomDiagnostic zooming_diagnostic(const ExperimentConfig& cfg, const OracleResult& oracle,
                                  const std::vector<double>& gammas);

// ------------------------------------------------------------------ export

void export_run_csv(const RunResult& run, const std::string& path);
void export_aggregate_csv(const AggregateResult& agg, const std::string& path);
void export_summary_json(const ExperimentConfig& cfg, const OracleResult& oracle,
                         const std::vector<RunResult>& runs, const ActivationTable& table,
                         const ZoomDiagnostic* zoom, const std::string& path);
RunResult import_run_csv(const std::string& path, std::uint64_t seed);

/// Runs each index task through a small thread pool and blocks until all
/// complete; each task writes only its own output slot.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task);

double kahan_sum(const std::vector<double>& xs, std::size_t count);

} // namespace pz
