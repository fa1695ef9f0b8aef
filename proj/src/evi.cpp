#include "policy_zoom/evi.hpp"

#include "policy_zoom/policy_space.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

namespace pz {

Constants derive_constants(Constants in) {
    if (!(in.alpha > 0.0 && in.alpha < 1.0)) throw std::domain_error("alpha must lie in (0,1)");
    if (!(in.C > 0.0)) throw std::domain_error("C must be > 0");
    if (!(in.kappa_prime > 0.0)) throw std::domain_error("kappa_prime must be > 0");

    Constants c = in;
    c.m_star = ceil_log_inv_alpha(c.C, c.alpha) + 1;
    c.C_eta = 3.0 * (1.0 + (1.0 + c.L_phi) * c.L_p);
    c.L_J = lipschitz_L_J(c.L_r, c.L_p, c.C, c.alpha);

    double d = static_cast<double>(c.state_dim);
    double sqrt_d = std::sqrt(d);
    double reach = c.C_eta * (c.m_star + 1) * sqrt_d / (1.0 - c.alpha);
    double m_bar =
        static_cast<double>(ceil_log_inv_alpha(2.0 * c.C / c.kappa_prime * std::pow(reach, d),
                                               c.alpha));
    double hitting = m_bar * (m_bar + 5.0) / 2.0 + 6.0 / c.kappa_prime * std::pow(reach, d) +
                     2.0 * (c.m_star + 1) / (1.0 - c.alpha);
    double contraction =
        (1.0 + c.L_r * (1.0 - c.alpha) / ((c.m_star + 1) * c.C_eta)) /
        ((1.0 - c.alpha) * (1.0 - std::pow(c.alpha, 1.0 / c.m_star)));
    c.C_vbar = std::max(hitting, contraction);
    c.C_ub = c.C_eta * c.C_vbar / 2.0 + 2.0 * (1.0 + c.L_phi) * c.L_r;
    c.c_diam = c.C_eta * c.C_vbar / 2.0 + 2.0 * (1.0 + c.L_phi) * c.L_r;
    c.c_z = 2.0 * (std::max(2.0, c.C_ub) + c.L_J);
    return c;
}

namespace {

void check_simplex(const std::vector<double>& center) {
    double sum = 0.0;
    for (double p : center) {
        if (p < -1e-12) throw std::invalid_argument("inner_max: center has a negative entry");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("inner_max: center does not sum to 1");
}

/// Ascending (value, index) order shared by all rows of one sweep.
std::vector<std::size_t> ascending_order(const std::vector<double>& values) {
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] < values[b];
        return a < b;
    });
    return idx;
}

double shifted_row_value(const std::vector<double>& values, const std::vector<std::size_t>& asc,
                         const std::vector<double>& center, double eta,
                         std::vector<double>* out_row) {
    std::size_t best = asc.back();
    // argmax with the lowest index on ties
    for (std::size_t k = asc.size(); k-- > 0 && values[asc[k]] == values[best];) best = asc[k];

    double bump = std::min(eta / 2.0, 1.0 - center[best]);
    double value = 0.0;
    if (out_row) *out_row = center;
    if (out_row) (*out_row)[best] += bump;

    double removed = 0.0;
    double dot_delta = bump * values[best];
    for (std::size_t k = 0; k < asc.size() && removed < bump; ++k) {
        std::size_t j = asc[k];
        if (j == best) continue;
        double take = std::min(center[j], bump - removed);
        if (take <= 0.0) continue;
        removed += take;
        dot_delta -= take * values[j];
        if (out_row) (*out_row)[j] -= take;
    }
    value = std::inner_product(center.begin(), center.end(), values.begin(), 0.0) + dot_delta;
    return value;
}

} // namespace

std::pair<std::vector<double>, double> inner_max(const std::vector<double>& values,
                                                 const std::vector<double>& center, double eta) {
    if (values.size() != center.size())
        throw std::invalid_argument("inner_max: size mismatch");
    check_simplex(center);
    eta = std::clamp(eta, 0.0, 2.0);
    std::vector<std::size_t> asc = ascending_order(values);
    std::vector<double> row;
    double value = shifted_row_value(values, asc, center, eta, &row);
    return {std::move(row), value};
}

EviResult evi_iterate(const EviSpec& spec, double tol, int max_iter, double span_bound) {
    const auto& rows = *spec.rows;
    const auto& radii = *spec.radii;
    const std::size_t n_units = spec.rewards.size();
    const std::size_t n_cols = spec.col_unit.size();
    assert(spec.row_of_unit.size() == n_units);

    std::vector<double> value(n_units, 0.0);
    std::vector<double> colvals(n_cols, 0.0);
    std::vector<double> row_value(rows.size(), 0.0);
    std::vector<double> next(n_units, 0.0);

    EviResult res;
    for (int iter = 1; iter <= max_iter; ++iter) {
        for (std::size_t j = 0; j < n_cols; ++j)
            colvals[j] = spec.col_unit[j] >= 0 ? value[spec.col_unit[j]] : 0.0;
        std::vector<std::size_t> asc = ascending_order(colvals);
        for (std::size_t r = 0; r < rows.size(); ++r)
            row_value[r] = shifted_row_value(colvals, asc, rows[r], radii[r], nullptr);

        double dmin = 0.0, dmax = 0.0;
        for (std::size_t u = 0; u < n_units; ++u) {
            next[u] = spec.rewards[u] + row_value[spec.row_of_unit[u]];
            double diff = next[u] - value[u];
            if (u == 0) {
                dmin = dmax = diff;
            } else {
                dmin = std::min(dmin, diff);
                dmax = std::max(dmax, diff);
            }
        }
        res.iterations = iter;
        res.final_span_delta = dmax - dmin;
        res.gain = 0.5 * (dmax + dmin);
        if (res.final_span_delta <= tol) return res;

        double vmin = *std::min_element(next.begin(), next.end());
        for (std::size_t u = 0; u < n_units; ++u) value[u] = next[u] - vmin;
        if (span_bound > 0.0) {
            double vmax = *std::max_element(value.begin(), value.end());
            if (vmax > span_bound) res.span_tripped = true;
        }
    }
    throw EviNonConvergence(res);
}

EviResult evi_gain(const std::vector<std::vector<double>>& rows, const std::vector<double>& radii,
                   const std::vector<int>& row_of_state, const std::vector<double>& rewards,
                   double tol, int max_iter, double span_bound) {
    EviSpec spec;
    spec.rows = &rows;
    spec.radii = &radii;
    spec.row_of_unit = row_of_state;
    spec.col_unit.resize(rewards.size());
    std::iota(spec.col_unit.begin(), spec.col_unit.end(), 0);
    spec.rewards = rewards;
    return evi_iterate(spec, tol, max_iter, span_bound);
}

int default_evi_max_iter(std::size_t n_states, double alpha) {
    double inv_gap = std::ceil(1.0 / (1.0 - alpha));
    return static_cast<int>(10.0 * (static_cast<double>(n_states) + inv_gap) * 100.0);
}

} // namespace pz
