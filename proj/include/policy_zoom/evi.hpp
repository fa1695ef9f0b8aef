#pragma once

#include <stdexcept>
#include <vector>

namespace pz {

/// Problem constants and the values derived from them. Derived values are
/// direct transcriptions of the corresponding closed-form expressions.
struct Constants {
    // inputs
    double alpha = 0.5;           // ergodic rate
    double C = 1.0;               // ergodic prefactor
    double L_r = 1.0;             // reward Lipschitz constant
    double L_p = 1.0;             // kernel Lipschitz constant
    double L_phi = 0.0;           // policy Lipschitz constant
    double C_p = 0.0;             // density derivative bound
    double c_d_f = 1.0;           // model-free concentration scale
    double c_d_b = 1.0;           // model-based concentration scale
    double kappa = 1.0;           // stationary upper-density constant (documentation)
    double kappa_prime = 1.0;     // stationary lower-density constant
    int state_dim = 1;

    // derived
    int m_star = 1;               // mixing horizon
    double C_eta = 0.0;           // confidence-radius-to-diameter factor
    double C_vbar = 0.0;          // span bound of the optimistic iterates
    double C_ub = 0.0;            // index overshoot factor
    double c_diam = 0.0;          // approximate-diameter normalizer
    double L_J = 0.0;             // gain Lipschitz constant
    double c_z = 0.0;             // zooming covering radius factor
};

/// Recomputes every derived field from the inputs.
Constants derive_constants(Constants in);

/// Argmax of theta . values over the simplex ball {||theta - center||_1 <= eta}:
/// raise mass on the best-value coordinate by min(eta/2, 1 - center[best]),
/// strip the same mass from the worst-value coordinates in ascending order.
std::pair<std::vector<double>, double> inner_max(const std::vector<double>& values,
                                                 const std::vector<double>& center, double eta);

struct EviResult {
    double gain = 0.0;
    int iterations = 0;
    double final_span_delta = 0.0;  // span of the one-step difference at exit
    bool span_tripped = false;      // renormalized iterate span exceeded the tripwire
};

struct EviNonConvergence : std::runtime_error {
    explicit EviNonConvergence(EviResult r)
        : std::runtime_error("value iteration did not converge"), partial(r) {}
    EviResult partial;
};

/// Optimistic relative value iteration over a row-constrained kernel set.
///
/// Units carry the value vector; rows are distributions over columns. A
/// column feeds back the value of its mapped unit (or 0 when unmapped,
/// for the leaf-indexed diameter iteration).
struct EviSpec {
    const std::vector<std::vector<double>>* rows = nullptr;  // n_rows x n_cols
    const std::vector<double>* radii = nullptr;              // per row
    std::vector<int> row_of_unit;                            // unit -> row
    std::vector<int> col_unit;                               // column -> unit, or -1
    std::vector<double> rewards;                             // per unit
};

EviResult evi_iterate(const EviSpec& spec, double tol, int max_iter, double span_bound = 0.0);

/// Common case: columns and units coincide (square kernel over one grid).
EviResult evi_gain(const std::vector<std::vector<double>>& rows, const std::vector<double>& radii,
                   const std::vector<int>& row_of_state, const std::vector<double>& rewards,
                   double tol, int max_iter, double span_bound = 0.0);

int default_evi_max_iter(std::size_t n_states, double alpha);

} // namespace pz
