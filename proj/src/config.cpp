#include "policy_zoom/config.hpp"

#include "policy_zoom/env.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pz {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
    throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& tok, int line) {
    try {
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) fail(line, "bad number '" + tok + "'");
        return v;
    } catch (const std::invalid_argument&) {
        fail(line, "bad number '" + tok + "'");
    } catch (const std::out_of_range&) {
        fail(line, "number out of range '" + tok + "'");
    }
}

TomlValue parse_value(const std::string& raw, int line) {
    TomlValue v;
    if (raw.empty()) fail(line, "missing value");
    if (raw.front() == '"') {
        if (raw.size() < 2 || raw.back() != '"') fail(line, "unterminated string");
        v.kind = TomlValue::Kind::string;
        v.str = raw.substr(1, raw.size() - 2);
        return v;
    }
    if (raw == "true" || raw == "false") {
        v.kind = TomlValue::Kind::boolean;
        v.boolean = raw == "true";
        return v;
    }
    if (raw.front() == '[') {
        if (raw.back() != ']') fail(line, "unterminated array");
        v.kind = TomlValue::Kind::number_array;
        std::string body = raw.substr(1, raw.size() - 2);
        std::stringstream ss(body);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (!tok.empty()) v.nums.push_back(parse_number(tok, line));
        }
        return v;
    }
    v.kind = TomlValue::Kind::number;
    v.num = parse_number(raw, line);
    return v;
}

} // namespace

TomlDoc parse_toml(const std::string& text) {
    TomlDoc doc;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        // keep # inside quoted strings
        if (hash != std::string::npos) {
            bool in_str = false;
            for (std::size_t i = 0; i < line.size(); ++i) {
                if (line[i] == '"') in_str = !in_str;
                if (line[i] == '#' && !in_str) {
                    line = line.substr(0, i);
                    break;
                }
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) fail(lineno, "empty section name");
            doc.sections[section];
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail(lineno, "expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string raw = trim(line.substr(eq + 1));
        if (key.empty()) fail(lineno, "empty key");
        doc.sections[section][key] = parse_value(raw, lineno);
    }
    return doc;
}

TomlDoc parse_toml_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_toml(ss.str());
}

namespace {

class SectionReader {
  public:
    SectionReader(const TomlDoc& doc, const std::string& name) : name_(name) {
        auto it = doc.sections.find(name);
        if (it != doc.sections.end()) table_ = &it->second;
    }

    std::optional<double> number(const std::string& key) {
        const TomlValue* v = take(key);
        if (!v) return std::nullopt;
        if (v->kind != TomlValue::Kind::number)
            throw ConfigError("[" + name_ + "]." + key + ": expected a number");
        return v->num;
    }

    std::optional<std::string> string(const std::string& key) {
        const TomlValue* v = take(key);
        if (!v) return std::nullopt;
        if (v->kind != TomlValue::Kind::string)
            throw ConfigError("[" + name_ + "]." + key + ": expected a string");
        return v->str;
    }

    std::optional<std::vector<double>> numbers(const std::string& key) {
        const TomlValue* v = take(key);
        if (!v) return std::nullopt;
        if (v->kind != TomlValue::Kind::number_array)
            throw ConfigError("[" + name_ + "]." + key + ": expected an array of numbers");
        return v->nums;
    }

    /// Every remaining (unconsumed) key is unknown.
    void finish() const {
        if (!table_) return;
        for (const auto& [key, value] : *table_) {
            (void)value;
            if (!consumed_.count(key))
                throw ConfigError("[" + name_ + "]: unknown key '" + key + "'");
        }
    }

    /// Remaining keys interpreted as a free-form numeric map (env params).
    std::map<std::string, double> remaining_numbers() {
        std::map<std::string, double> out;
        if (!table_) return out;
        for (const auto& [key, value] : *table_) {
            if (consumed_.count(key)) continue;
            if (value.kind != TomlValue::Kind::number)
                throw ConfigError("[" + name_ + "]." + key + ": expected a number");
            out[key] = value.num;
            consumed_.insert(key);
        }
        return out;
    }

  private:
    const TomlValue* take(const std::string& key) {
        if (!table_) return nullptr;
        auto it = table_->find(key);
        if (it == table_->end()) return nullptr;
        consumed_.insert(key);
        return &it->second;
    }

    std::string name_;
    const TomlTable* table_ = nullptr;
    std::set<std::string> consumed_;
};

} // namespace

ExperimentConfig config_from_toml(const TomlDoc& doc) {
    for (const auto& [name, table] : doc.sections) {
        (void)table;
        static const std::vector<std::string> known = {"env",       "agent",  "policy", "run",
                                                       "constants", "oracle", "output"};
        if (std::find(known.begin(), known.end(), name) == known.end())
            throw ConfigError("unknown config section [" + name + "]");
    }

    ExperimentConfig cfg;

    SectionReader env(doc, "env");
    if (auto v = env.string("name")) cfg.env_name = *v;
    cfg.env_params = env.remaining_numbers();
    env.finish();

    SectionReader agent(doc, "agent");
    if (auto v = agent.string("kind")) cfg.agent = *v;
    if (auto v = agent.number("epsilon")) cfg.epsilon = *v;
    agent.finish();

    SectionReader policy(doc, "policy");
    if (auto v = policy.string("family")) cfg.family_name = *v;
    if (auto v = policy.string("metric")) {
        if (*v == "param_euclid") cfg.metric_mode = MetricMode::param_euclid;
        else if (*v == "sup_grid") cfg.metric_mode = MetricMode::sup_grid;
        else throw ConfigError("unknown metric mode: " + *v);
    }
    if (auto v = policy.number("grid_resolution")) cfg.metric_grid_resolution = *v;
    policy.finish();

    SectionReader run(doc, "run");
    if (auto v = run.number("horizon")) cfg.horizon = static_cast<std::int64_t>(*v);
    if (auto v = run.number("delta")) cfg.delta = *v;
    if (auto v = run.numbers("seeds")) {
        cfg.seeds.clear();
        for (double s : *v) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    run.finish();

    SectionReader con(doc, "constants");
    cfg.C = con.number("C");
    cfg.alpha = con.number("alpha");
    cfg.L_r = con.number("L_r");
    cfg.L_p = con.number("L_p");
    if (auto v = con.number("c_d_f")) cfg.c_d_f = *v;
    if (auto v = con.number("c_d_b")) cfg.c_d_b = *v;
    if (auto v = con.number("C_p")) cfg.C_p = *v;
    if (auto v = con.number("kappa")) cfg.kappa = *v;
    if (auto v = con.number("kappa_prime")) cfg.kappa_prime = *v;
    if (auto v = con.number("evi_tol")) cfg.evi_tol = *v;
    con.finish();

    SectionReader oracle(doc, "oracle");
    if (auto v = oracle.number("grid_resolution")) cfg.oracle.grid_resolution = *v;
    if (auto v = oracle.number("rollout_length"))
        cfg.oracle.rollout_length = static_cast<std::int64_t>(*v);
    if (auto v = oracle.number("replications")) cfg.oracle.replications = static_cast<int>(*v);
    oracle.finish();

    SectionReader output(doc, "output");
    if (auto v = output.string("dir")) cfg.out_dir = *v;
    output.finish();

    validate_config(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    return config_from_toml(parse_toml_file(path));
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.horizon < 1) throw ConfigError("run.horizon must be >= 1");
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ConfigError("run.delta must lie in (0,1)");
    if (cfg.seeds.empty()) throw ConfigError("run.seeds must be nonempty");
    if (cfg.agent != "pzrl_mf" && cfg.agent != "pzrl_mb" && cfg.agent != "policy_ucb")
        throw ConfigError("unknown agent kind: " + cfg.agent);
    if (cfg.alpha && !(*cfg.alpha > 0.0 && *cfg.alpha < 1.0))
        throw ConfigError("constants.alpha must lie in (0,1)");
    if (cfg.oracle.grid_resolution <= 0.0)
        throw ConfigError("oracle.grid_resolution must be > 0");
    if (cfg.oracle.rollout_length < 1) throw ConfigError("oracle.rollout_length must be >= 1");
    if (cfg.oracle.replications < 1) throw ConfigError("oracle.replications must be >= 1");
    make_family(cfg.family_name); // rejects unknown names
}

} // namespace pz
