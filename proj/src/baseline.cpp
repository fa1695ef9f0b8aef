#include "policy_zoom/baseline.hpp"

#include <cmath>
#include <stdexcept>

namespace pz {

UniformNet build_net(const FamilyPtr& family, double epsilon, std::size_t max_policies) {
    if (epsilon <= 0.0) throw ConfigError("build_net: epsilon must be > 0");
    double spacing = epsilon * family->param_metric_scale();

    std::vector<std::vector<double>> axes;
    std::size_t cardinality = 1;
    for (const Interval& iv : family->param_bounds()) {
        std::vector<double> pts;
        if (iv.length() <= 0.0) {
            pts.push_back(iv.lo);
        } else {
            long n = static_cast<long>(std::floor(iv.length() / spacing + 1e-9));
            for (long i = 0; i <= n; ++i) pts.push_back(iv.lo + static_cast<double>(i) * spacing);
            if (pts.back() < iv.hi - 1e-12) pts.push_back(iv.hi); // net includes box endpoints
        }
        cardinality *= pts.size();
        if (cardinality > max_policies)
            throw ConfigError("build_net: epsilon produces more policies than the configured cap");
        axes.push_back(std::move(pts));
    }

    UniformNet net;
    net.epsilon = epsilon;
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true) {
        ParamPolicy p{family, std::vector<double>(axes.size())};
        for (std::size_t d = 0; d < axes.size(); ++d) p.w[d] = axes[d][idx[d]];
        net.policies.push_back(std::move(p));
        std::size_t d = axes.size();
        while (d > 0 && ++idx[d - 1] == axes[d - 1].size()) idx[--d] = 0;
        if (d == 0) break;
    }
    return net;
}

PolicyUcbAgent::PolicyUcbAgent(FamilyPtr family, MetricSpec metric, MfConstants constants,
                               double epsilon)
    : EpisodicAgentBase(std::move(family), std::move(metric)), constants_(constants),
      net_(build_net(family_, epsilon)) {
    records_.reserve(net_.policies.size());
    for (const ParamPolicy& p : net_.policies) {
        PolicyRecord rec;
        rec.policy = p;
        rec.id = static_cast<int>(records_.size());
        records_.push_back(std::move(rec));
    }
}

void PolicyUcbAgent::at_boundary() {
    // fixed active set; the bonus carries no (1 + L_J) factor
    for (PolicyRecord& rec : records_) {
        rec.diameter = mf_diameter(rec, constants_);
        double n = static_cast<double>(std::max<std::int64_t>(rec.plays, 1));
        rec.index = rec.reward_sum / n + rec.diameter;
    }
}

} // namespace pz
