#pragma once

#include <optional>
#include <span>
#include <vector>

#include "garchlab/innovations.hpp"
#include "garchlab/rng.hpp"

namespace garchlab {

// theta = (alpha_0, ..., alpha_p, beta_1, ..., beta_q).
struct GarchParams {
    std::vector<double> alpha;  // size p+1, alpha[0] = alpha_0 > 0
    std::vector<double> beta;   // size q

    int p() const { return static_cast<int>(alpha.size()) - 1; }
    int q() const { return static_cast<int>(beta.size()); }
    int dim() const { return p() + q() + 1; }

    double beta_sum() const;
    void validate() const;  // alpha_0 > 0, all coefficients >= 0, p >= 1

    bool operator==(const GarchParams&) const = default;
};

struct GarchPath {
    std::vector<double> x;       // observations X_t, t = 1..n
    std::vector<double> sigma2;  // true squared volatilities
    std::vector<double> z;       // innovations
    GarchParams params_used;
    long burn_in = 0;

    // Full trajectory including the burn-in segment; stationary_filter uses
    // it to warm up the gradient recursion at the true parameter.
    std::vector<double> full_x;
    std::vector<double> full_sigma2;
    std::vector<double> full_z;
};

struct LyapunovEstimate {
    double rho_hat = 0.0;
    double std_err = 0.0;
    long horizon = 0;
    int reps = 0;
    std::optional<double> s_tilde;  // filled by the moment-decay search
};

// Eq-(4.1)-style necessary condition: beta_1 + ... + beta_q < 1.
bool necessary_stationarity(const GarchParams& params);

// Simulates X_t = sigma_t Z_t with sigma_t^2 = alpha_0 + sum alpha_i X_{t-i}^2
// + sum beta_j sigma_{t-j}^2, initialized at the deterministic fixed point
// alpha_0/(1 - sum beta) with zero presample X. The first burn_in values are
// discarded from x/sigma2/z but kept in full_*.
GarchPath simulate(const GarchParams& params, const InnovationModel& model, long n,
                   long burn_in, const SeedSpec& seed);

// Top Lyapunov coefficient of the companion-form GARCH matrices M1(Z_t),
// estimated by renormalized matrix products across independent runs.
LyapunovEstimate lyapunov_stationarity(const GarchParams& params, const InnovationModel& model,
                                       long horizon, int reps, const SeedSpec& seed);

constexpr long kDefaultBurnIn = 2000;

}  // namespace garchlab
