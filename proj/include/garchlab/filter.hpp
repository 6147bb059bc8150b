#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "garchlab/garch.hpp"

namespace garchlab {

// Filtered squared volatility and its parameter gradient.
// grad is n x (p+q+1), component order (d/d alpha_0 .. d/d alpha_p,
// d/d beta_1 .. d/d beta_q).
struct FilterOutput {
    std::vector<double> h;
    Eigen::MatrixXd grad;
};

// Observable volatility filter: h_hat_t = alpha_0/(1 - sum beta) for t <= 0,
// zero presample X, then
//   h_hat_t = alpha_0 + sum_i alpha_i X_{t-i}^2 + sum_j beta_j h_hat_{t-j}.
// Rejects sum(beta) >= 1 (initialization undefined).
std::vector<double> filter_h(std::span<const double> x, const GarchParams& params);

// psi_j from the power series alpha(z)/beta(z) = sum_j psi_j z^j, computed by
// the division recursion psi_j = alpha_j [j <= p] + sum_i beta_i psi_{j-i}.
std::vector<double> psi_coefficients(const GarchParams& params, int J);

// Series form h_hat_t = alpha_0/beta(1) + sum_{j<t} psi_j X_{t-j}^2 (t is
// 1-based). Equivalent to filter_h; kept as an independent cross-check route.
double h_hat_via_psi(std::span<const double> x, const GarchParams& params, long t);

// Filter plus exact gradient recursion. Presample gradients are the exact
// derivatives of the constant initialization: d/d alpha_0 = 1/(1-sum beta),
// d/d beta_k = alpha_0/(1-sum beta)^2, d/d alpha_i = 0.
FilterOutput filter_gradient(std::span<const double> x, const GarchParams& params);

// Volatility and gradient at the true parameter, seeded with the simulated
// presample and warmed up over the burn-in segment; h equals path.sigma2.
FilterOutput stationary_filter(const GarchPath& path, const GarchParams& params_true);

}  // namespace garchlab
