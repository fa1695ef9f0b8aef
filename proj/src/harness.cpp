#include "policy_zoom/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace pz {

using nlohmann::json;

EnvPtr env_from_config(const ExperimentConfig& cfg) {
    return make_env(cfg.env_name, cfg.env_params);
}

Constants constants_from_config(const ExperimentConfig& cfg, const Env& env,
                                const PolicyFamily& family) {
    Constants c;
    c.alpha = cfg.alpha.value_or(env.ergodic_rate());
    c.C = cfg.C.value_or(env.ergodic_prefactor());
    c.L_r = cfg.L_r.value_or(env.reward_lipschitz());
    c.L_p = cfg.L_p.value_or(env.kernel_lipschitz());
    c.L_phi = family.policy_lipschitz();
    c.C_p = cfg.C_p;
    c.c_d_f = cfg.c_d_f;
    c.c_d_b = cfg.c_d_b;
    c.kappa = cfg.kappa;
    c.kappa_prime = cfg.kappa_prime;
    c.state_dim = env.state_dim();
    return derive_constants(c);
}

MetricSpec metric_from_config(const ExperimentConfig& cfg, const Env& env) {
    MetricSpec m;
    m.mode = cfg.metric_mode;
    m.grid_resolution = cfg.metric_grid_resolution;
    m.state_bounds = env.state_bounds();
    return m;
}

std::unique_ptr<EpisodicAgentBase> agent_from_config(const ExperimentConfig& cfg, const EnvPtr& env,
                                                     const FamilyPtr& family) {
    Constants c = constants_from_config(cfg, *env, *family);
    MetricSpec metric = metric_from_config(cfg, *env);
    if (cfg.agent == "pzrl_mf") {
        MfConstants mfc = make_mf_constants(c.C, c.alpha, c.c_d_f,
                                            static_cast<double>(cfg.horizon), cfg.delta, c.L_J);
        return std::make_unique<MfAgent>(family, metric, mfc);
    }
    if (cfg.agent == "pzrl_mb") {
        return std::make_unique<MbAgent>(env, family, metric, c,
                                         static_cast<double>(cfg.horizon), cfg.delta, cfg.evi_tol);
    }
    if (cfg.agent == "policy_ucb") {
        MfConstants mfc = make_mf_constants(c.C, c.alpha, c.c_d_f,
                                            static_cast<double>(cfg.horizon), cfg.delta, c.L_J);
        return std::make_unique<PolicyUcbAgent>(family, metric, mfc, cfg.epsilon);
    }
    throw ConfigError("unknown agent kind: " + cfg.agent);
}

RunResult run_experiment(const ExperimentConfig& cfg, std::uint64_t seed) {
    EnvPtr env = env_from_config(cfg);
    FamilyPtr family = make_family(cfg.family_name);
    std::unique_ptr<EpisodicAgentBase> agent = agent_from_config(cfg, env, family);

    RunResult out;
    out.seed = seed;
    out.reward_clipped.reserve(cfg.horizon);
    out.reward_raw.reserve(cfg.horizon);
    out.policy_id.reserve(cfg.horizon);
    out.episode_id.reserve(cfg.horizon);

    RngStream env_rng = make_stream(seed, "env");
    StateVec full = env->initial_state(env_rng);
    std::optional<double> prev_reward;
    for (std::int64_t t = 0; t < cfg.horizon; ++t) {
        StateVec obs = env->observe(full);
        ActionVec a = agent->step(obs, prev_reward);
        StepResult sr = env->step(full, a, env_rng);
        out.reward_clipped.push_back(sr.reward);
        out.reward_raw.push_back(sr.raw_reward);
        out.policy_id.push_back(agent->records()[agent->current_policy()].id);
        out.episode_id.push_back(agent->episode_count());
        prev_reward = sr.reward;
        full = std::move(sr.next);
    }
    if (prev_reward.has_value()) agent->credit_final(*prev_reward);

    out.episode_boundaries = agent->episode_boundaries();
    out.activations = agent->activation_log();
    for (const PolicyRecord& rec : agent->records())
        out.final_active.push_back({rec.id, rec.policy.w, rec.plays, rec.episodes, rec.reward_sum,
                                    rec.diameter});
    return out;
}

std::pair<std::vector<double>, std::vector<double>>
simulate_policy(const EnvPtr& env, const std::function<ActionVec(const StateVec&)>& act,
                std::int64_t horizon, std::uint64_t seed) {
    std::vector<double> clipped, raw;
    clipped.reserve(horizon);
    raw.reserve(horizon);
    RngStream rng = make_stream(seed, "env");
    StateVec full = env->initial_state(rng);
    for (std::int64_t t = 0; t < horizon; ++t) {
        StateVec obs = env->observe(full);
        StepResult sr = env->step(full, act(obs), rng);
        clipped.push_back(sr.reward);
        raw.push_back(sr.raw_reward);
        full = std::move(sr.next);
    }
    return {std::move(clipped), std::move(raw)};
}

// ------------------------------------------------------------------- oracle

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::vector<double>> parameter_grid(const PolicyFamily& family, double resolution) {
    std::vector<std::vector<double>> axes;
    for (const Interval& iv : family.param_bounds()) {
        std::vector<double> pts;
        if (iv.length() <= 0.0) {
            pts.push_back(iv.lo);
        } else {
            long n = static_cast<long>(std::floor(iv.length() / resolution + 1e-9));
            for (long i = 0; i <= n; ++i)
                pts.push_back(iv.lo + static_cast<double>(i) * resolution);
            if (pts.back() < iv.hi - 1e-12) pts.push_back(iv.hi);
        }
        axes.push_back(std::move(pts));
    }
    std::vector<std::vector<double>> grid;
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true) {
        std::vector<double> w(axes.size());
        for (std::size_t d = 0; d < axes.size(); ++d) w[d] = axes[d][idx[d]];
        grid.push_back(std::move(w));
        std::size_t d = axes.size();
        while (d > 0 && ++idx[d - 1] == axes[d - 1].size()) idx[--d] = 0;
        if (d == 0) break;
    }
    return grid;
}

std::string oracle_cache_dir(const ExperimentConfig& cfg) {
    if (const char* env = std::getenv("POLICY_ZOOM_CACHE"); env != nullptr && *env != '\0')
        return env;
    return cfg.out_dir + "/oracle_cache";
}

std::string oracle_cache_key(const ExperimentConfig& cfg, const OracleBudget& budget,
                             std::uint64_t seed, int burn_in) {
    std::ostringstream ss;
    ss << cfg.env_name;
    for (const auto& [k, v] : cfg.env_params) ss << ';' << k << '=' << format_double(v);
    ss << '|' << cfg.family_name << '|' << format_double(budget.grid_resolution) << '|'
       << budget.rollout_length << '|' << budget.replications << '|' << seed << '|' << burn_in;
    std::uint64_t h = detail::fnv1a(ss.str());
    std::ostringstream hex;
    hex << std::hex << h;
    return hex.str();
}

} // namespace

OracleResult estimate_optimal_gain(const ExperimentConfig& cfg, const OracleBudget& budget,
                                   std::uint64_t oracle_seed) {
    EnvPtr env = env_from_config(cfg);
    FamilyPtr family = make_family(cfg.family_name);
    Constants cons = constants_from_config(cfg, *env, *family);
    int burn_in = 10 * cons.m_star;

    std::string dir = oracle_cache_dir(cfg);
    std::string key = oracle_cache_key(cfg, budget, oracle_seed, burn_in);
    std::filesystem::path cache_path = std::filesystem::path(dir) / ("oracle_" + key + ".json");
    if (std::filesystem::exists(cache_path)) {
        std::ifstream in(cache_path);
        json j = json::parse(in);
        if (j.at("key") == key) {
            OracleResult res;
            res.estimate.J_star = j.at("J_star");
            res.estimate.half_width = j.at("half_width");
            res.estimate.method = j.at("method");
            res.grid_w = j.at("grid_w").get<std::vector<std::vector<double>>>();
            res.gains = j.at("gains").get<std::vector<double>>();
            res.best_index = j.at("best_index");
            res.seed = oracle_seed;
            return res;
        }
    }

    OracleResult res;
    res.seed = oracle_seed;
    res.grid_w = parameter_grid(*family, budget.grid_resolution);
    res.gains.assign(res.grid_w.size(), 0.0);
    std::vector<double> rep_sd(res.grid_w.size(), 0.0);

    std::int64_t length = budget.rollout_length + burn_in;
    parallel_for(res.grid_w.size(), [&](std::size_t i) {
        ParamPolicy policy{family, res.grid_w[i]};
        std::vector<double> means(budget.replications);
        for (int rep = 0; rep < budget.replications; ++rep) {
            std::uint64_t s = make_stream(oracle_seed, "oracle",
                                          i * static_cast<std::uint64_t>(budget.replications) +
                                              static_cast<std::uint64_t>(rep))
                                  .raw();
            auto [clipped, raw] = simulate_policy(
                env, [&](const StateVec& obs) { return policy.evaluate(obs); }, length, s);
            (void)raw;
            double sum = 0.0;
            for (std::int64_t t = burn_in; t < length; ++t) sum += clipped[t];
            means[rep] = sum / static_cast<double>(budget.rollout_length);
        }
        double mean = 0.0;
        for (double m : means) mean += m;
        mean /= means.size();
        double var = 0.0;
        for (double m : means) var += (m - mean) * (m - mean);
        res.gains[i] = mean;
        rep_sd[i] = means.size() > 1 ? std::sqrt(var / (means.size() - 1)) : 0.0;
    });

    res.best_index = 0;
    for (std::size_t i = 1; i < res.gains.size(); ++i)
        if (res.gains[i] > res.gains[res.best_index]) res.best_index = i;
    res.estimate.J_star = res.gains[res.best_index];
    res.estimate.half_width =
        1.96 * rep_sd[res.best_index] / std::sqrt(static_cast<double>(budget.replications));
    {
        std::ostringstream m;
        m << "grid_rollout(res=" << budget.grid_resolution << ",len=" << budget.rollout_length
          << ",reps=" << budget.replications << ",burn_in=" << burn_in << ")";
        res.estimate.method = m.str();
    }

    std::filesystem::create_directories(dir);
    json j;
    j["key"] = key;
    j["J_star"] = res.estimate.J_star;
    j["half_width"] = res.estimate.half_width;
    j["method"] = res.estimate.method;
    j["grid_w"] = res.grid_w;
    j["gains"] = res.gains;
    j["best_index"] = res.best_index;
    std::ofstream out(cache_path);
    out << j.dump(2) << "\n";
    return res;
}

double nearest_oracle_gain(const OracleResult& oracle, const std::vector<double>& w) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < oracle.grid_w.size(); ++i) {
        double d = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k)
            d += (oracle.grid_w[i][k] - w[k]) * (oracle.grid_w[i][k] - w[k]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return oracle.gains[best];
}

// ------------------------------------------------------------------- regret

double kahan_sum(const std::vector<double>& xs, std::size_t count) {
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        double y = xs[i] - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

std::vector<double> regret_curve(const RunResult& run, const GainEstimate& J) {
    std::vector<double> regret(run.reward_clipped.size());
    double sum = 0.0, comp = 0.0;
    for (std::size_t t = 0; t < run.reward_clipped.size(); ++t) {
        double y = run.reward_clipped[t] - comp;
        double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        regret[t] = static_cast<double>(t + 1) * J.J_star - sum;
    }
    return regret;
}

AggregateResult aggregate(const std::vector<std::vector<double>>& curves) {
    if (curves.size() < 2) throw std::invalid_argument("aggregate: need at least 2 runs");
    std::size_t T = curves.front().size();
    for (const auto& c : curves)
        if (c.size() != T) throw std::invalid_argument("aggregate: mismatched horizons");

    AggregateResult agg;
    agg.mean.assign(T, 0.0);
    agg.stderr_.assign(T, 0.0);
    double n = static_cast<double>(curves.size());
    for (std::size_t t = 0; t < T; ++t) {
        double mean = 0.0;
        for (const auto& c : curves) mean += c[t];
        mean /= n;
        double var = 0.0;
        for (const auto& c : curves) var += (c[t] - mean) * (c[t] - mean);
        agg.mean[t] = mean;
        agg.stderr_[t] = std::sqrt(var / (n - 1)) / std::sqrt(n);
    }
    return agg;
}

double ActivationTable::share_above(double edge) const {
    if (total == 0) return 0.0;
    std::int64_t above = 0;
    for (std::size_t b = 0; b < counts.size(); ++b) {
        double lo = b == 0 ? 0.0 : edges[b - 1];
        if (lo >= edge - 1e-12) above += counts[b];
    }
    return static_cast<double>(above) / static_cast<double>(total);
}

namespace {
ActivationTable bucketize(const std::vector<std::vector<double>>& ws, const OracleResult& oracle) {
    ActivationTable table;
    table.counts.assign(table.edges.size() + 1, 0);
    for (const auto& w : ws) {
        double gap = oracle.estimate.J_star - nearest_oracle_gain(oracle, w);
        std::size_t b = 0;
        while (b < table.edges.size() && gap >= table.edges[b]) ++b;
        ++table.counts[b];
        ++table.total;
    }
    return table;
}
} // namespace

ActivationTable activation_quality(const std::vector<RunResult>& runs, const OracleResult& oracle) {
    std::vector<std::vector<double>> ws;
    for (const RunResult& run : runs)
        for (const ActivationEvent& ev : run.activations) ws.push_back(ev.w);
    return bucketize(ws, oracle);
}

ActivationTable activation_quality_of_net(const UniformNet& net, const OracleResult& oracle) {
    std::vector<std::vector<double>> ws;
    for (const ParamPolicy& p : net.policies) ws.push_back(p.w);
    return bucketize(ws, oracle);
}

// -------------------------------------------------------------- diagnostics

ZoomDiagnostic zooming_diagnostic(const ExperimentConfig& cfg, const OracleResult& oracle,
                                  const std::vector<double>& gammas) {
    EnvPtr env = env_from_config(cfg);
    FamilyPtr family = make_family(cfg.family_name);
    Constants cons = constants_from_config(cfg, *env, *family);
    MetricSpec metric;
    metric.mode = MetricMode::param_euclid;

    std::vector<double> gaps(oracle.gains.size());
    for (std::size_t i = 0; i < oracle.gains.size(); ++i)
        gaps[i] = oracle.estimate.J_star - oracle.gains[i];

    auto greedy_cover = [&](const std::vector<std::size_t>& member, double radius) {
        std::vector<std::size_t> centers;
        for (std::size_t i : member) {
            bool covered = false;
            ParamPolicy pi{family, oracle.grid_w[i]};
            for (std::size_t c : centers) {
                ParamPolicy pc{family, oracle.grid_w[c]};
                if (policy_distance(pi, pc, metric) <= radius) {
                    covered = true;
                    break;
                }
            }
            if (!covered) centers.push_back(i);
        }
        return static_cast<std::int64_t>(centers.size());
    };

    ZoomDiagnostic diag;
    std::vector<double> log_inv_gamma, log_count;
    for (double gamma : gammas) {
        std::vector<std::size_t> band, below;
        for (std::size_t i = 0; i < gaps.size(); ++i) {
            if (gaps[i] > gamma && gaps[i] <= 2.0 * gamma) band.push_back(i);
            if (gaps[i] <= gamma) below.push_back(i);
        }
        double radius = gamma / cons.c_z;
        ZoomDiagnosticRow row;
        row.gamma = gamma;
        row.cover_band = greedy_cover(band, radius);
        row.cover_below = greedy_cover(below, radius);
        diag.rows.push_back(row);
        std::int64_t n = std::max(row.cover_band, row.cover_below);
        if (n > 0 && gamma > 0.0) {
            log_inv_gamma.push_back(std::log(1.0 / gamma));
            log_count.push_back(std::log(static_cast<double>(n)));
        }
    }
    if (log_inv_gamma.size() >= 2) {
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < log_inv_gamma.size(); ++i) {
            mx += log_inv_gamma[i];
            my += log_count[i];
        }
        mx /= log_inv_gamma.size();
        my /= log_inv_gamma.size();
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < log_inv_gamma.size(); ++i) {
            num += (log_inv_gamma[i] - mx) * (log_count[i] - my);
            den += (log_inv_gamma[i] - mx) * (log_inv_gamma[i] - mx);
        }
        diag.d_z_hat = den > 0.0 ? num / den : 0.0;
    }
    return diag;
}

// ------------------------------------------------------------------- export

void export_run_csv(const RunResult& run, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "t,reward_clipped,reward_raw,policy_id,episode_id\n";
    for (std::size_t t = 0; t < run.reward_clipped.size(); ++t) {
        out << t << ',' << format_double(run.reward_clipped[t]) << ','
            << format_double(run.reward_raw[t]) << ',' << run.policy_id[t] << ','
            << run.episode_id[t] << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

void export_aggregate_csv(const AggregateResult& agg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "t,mean_regret,stderr\n";
    for (std::size_t t = 0; t < agg.mean.size(); ++t)
        out << (t + 1) << ',' << format_double(agg.mean[t]) << ','
            << format_double(agg.stderr_[t]) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

RunResult import_run_csv(const std::string& path, std::uint64_t seed) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    RunResult run;
    run.seed = seed;
    std::string line;
    if (!std::getline(in, line) || line != "t,reward_clipped,reward_raw,policy_id,episode_id")
        throw std::runtime_error("unexpected header in " + path);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> cols;
        while (std::getline(ss, tok, ',')) cols.push_back(tok);
        if (cols.size() != 5) throw std::runtime_error("bad row in " + path);
        run.reward_clipped.push_back(std::stod(cols[1]));
        run.reward_raw.push_back(std::stod(cols[2]));
        run.policy_id.push_back(std::stoi(cols[3]));
        run.episode_id.push_back(std::stoll(cols[4]));
    }
    return run;
}

namespace {
json config_echo(const ExperimentConfig& cfg) {
    json j;
    j["env"]["name"] = cfg.env_name;
    for (const auto& [k, v] : cfg.env_params) j["env"][k] = v;
    j["agent"]["kind"] = cfg.agent;
    if (cfg.agent == "policy_ucb") j["agent"]["epsilon"] = cfg.epsilon;
    j["policy"]["family"] = cfg.family_name;
    j["policy"]["metric"] =
        cfg.metric_mode == MetricMode::param_euclid ? "param_euclid" : "sup_grid";
    j["policy"]["grid_resolution"] = cfg.metric_grid_resolution;
    j["run"]["horizon"] = cfg.horizon;
    j["run"]["delta"] = cfg.delta;
    j["run"]["seeds"] = cfg.seeds;
    json cons;
    if (cfg.C) cons["C"] = *cfg.C;
    if (cfg.alpha) cons["alpha"] = *cfg.alpha;
    if (cfg.L_r) cons["L_r"] = *cfg.L_r;
    if (cfg.L_p) cons["L_p"] = *cfg.L_p;
    cons["c_d_f"] = cfg.c_d_f;
    cons["c_d_b"] = cfg.c_d_b;
    cons["C_p"] = cfg.C_p;
    cons["kappa"] = cfg.kappa;
    cons["kappa_prime"] = cfg.kappa_prime;
    cons["evi_tol"] = cfg.evi_tol;
    j["constants"] = cons;
    j["oracle"]["grid_resolution"] = cfg.oracle.grid_resolution;
    j["oracle"]["rollout_length"] = cfg.oracle.rollout_length;
    j["oracle"]["replications"] = cfg.oracle.replications;
    j["output"]["dir"] = cfg.out_dir;
    return j;
}
} // namespace

void export_summary_json(const ExperimentConfig& cfg, const OracleResult& oracle,
                         const std::vector<RunResult>& runs, const ActivationTable& table,
                         const ZoomDiagnostic* zoom, const std::string& path) {
    json j;
    j["config"] = config_echo(cfg);
    j["J_star"] = oracle.estimate.J_star;
    j["J_star_half_width"] = oracle.estimate.half_width;
    j["oracle_method"] = oracle.estimate.method;

    json tbl;
    tbl["edges"] = table.edges;
    tbl["counts"] = table.counts;
    tbl["total"] = table.total;
    j["activation_table"] = tbl;

    if (zoom != nullptr) {
        json z;
        z["d_z_hat"] = zoom->d_z_hat;
        json rows = json::array();
        for (const auto& row : zoom->rows) {
            rows.push_back({{"gamma", row.gamma},
                            {"cover_band", row.cover_band},
                            {"cover_below", row.cover_below}});
        }
        z["rows"] = rows;
        j["zooming"] = z;
    }

    json runs_json = json::array();
    for (const RunResult& run : runs) {
        json r;
        r["seed"] = run.seed;
        r["episodes"] = run.episode_boundaries.size();
        r["activations"] = run.activations.size();
        r["active_policies"] = run.final_active.size();
        r["total_reward_clipped"] = kahan_sum(run.reward_clipped, run.reward_clipped.size());
        r["total_reward_raw"] = kahan_sum(run.reward_raw, run.reward_raw.size());
        runs_json.push_back(r);
    }
    j["runs"] = runs_json;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task) {
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (unsigned w = 0; w < std::min<std::size_t>(workers, n); ++w) {
        pool.emplace_back([&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace pz
