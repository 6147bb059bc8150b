#pragma once

#include <Eigen/Dense>
#include <span>

#include "garchlab/filter.hpp"

namespace garchlab {

// Compact parameter set K: m <= alpha_i, beta_j <= M componentwise and
// sum(beta) <= beta_bar, with q*m < beta_bar.
struct CompactSetK {
    double m = 0.01;
    double M = 5.0;
    double beta_bar = 0.95;
    int p = 1;
    int q = 1;

    void validate() const;
    bool contains(const GarchParams& theta, double tol = 1e-12) const;
};

struct FitOptions {
    double tol_scale = 1e-6;  // convergence when ||projected gradient|| < tol_scale * n
    int max_iter = 500;       // per start
};

struct FitResult {
    GarchParams theta_hat;
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
    double gradient_norm = 0.0;
    int starts_used = 0;
    bool degenerate_data = false;  // near-constant input, alphas pushed to the box bound
};

// Quasi log-likelihood -1/2 sum (X_t^2/h_hat_t + log h_hat_t); the
// -(n/2) log 2pi constant is omitted.
double log_likelihood(std::span<const double> x, const GarchParams& params);

// Analytic gradient 1/2 sum (h_hat'_t/h_hat_t)(X_t^2/h_hat_t - 1).
Eigen::VectorXd likelihood_gradient(std::span<const double> x, const GarchParams& params);

// Multi-start projected-gradient maximization of the quasi likelihood over K.
// Starts: box corners shrunk 10% toward the centroid, plus the centroid, all
// projected into K; deterministic. Ties on the final value break toward the
// lexicographically smallest theta.
FitResult fit(std::span<const double> x, const CompactSetK& K, const FitOptions& opts,
              const SeedSpec& seed);

// Projection onto K: componentwise box clamp, then multiplicative rescaling
// of beta when sum(beta) > beta_bar (with a clamp fix-up loop).
Eigen::VectorXd project_to_k(Eigen::VectorXd theta, const CompactSetK& K);

GarchParams unpack_theta(const Eigen::VectorXd& v, int p, int q);
Eigen::VectorXd pack_theta(const GarchParams& params);

}  // namespace garchlab
