#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "garchlab/garch.hpp"

namespace garchlab {

// Block-structured random matrix map of the polynomial linear SRE
//   Ytilde_t = P(Z_t) Ytilde_{t-1} + Q
// that embeds (sigma^2, X^2) together with all gradient lags of h_t at the
// true parameter. Orders are padded to p, q >= 3 with zero coefficients so a
// single block layout covers every model order.
//
// State layout (dim = p+q-1 + q(p+q+1)):
//   [0 .. q-1]        sigma^2_{t+1} .. sigma^2_{t-q+2}
//   [q .. p+q-2]      X^2_t .. X^2_{t-p+2}
//   then p+1 blocks of length q: (d h_{t+1}/d alpha_i .. d h_{t-q+2}/d alpha_i)
//   then q   blocks of length q: (d h_{t+1}/d beta_j .. d h_{t-q+2}/d beta_j)
//
// P(z) is affine in z^2: P(z) = p_const + z^2 * p_z2.
struct SreSystem {
    int p = 3;  // padded orders
    int q = 3;
    int dim = 0;
    GarchParams theta0;  // padded parameter vector

    Eigen::MatrixXd p_const;
    Eigen::MatrixXd p_z2;
    Eigen::VectorXd q_vec;

    Eigen::MatrixXd p_of(double z) const { return p_const + (z * z) * p_z2; }
    Eigen::MatrixXd m1(double z) const {
        const int d1 = p + q - 1;
        return p_const.topLeftCorner(d1, d1) + (z * z) * p_z2.topLeftCorner(d1, d1);
    }
};

SreSystem build_sre(const GarchParams& theta0);

// Companion matrix of (beta_1, ..., beta_q).
Eigen::MatrixXd companion_matrix(std::span<const double> beta);

// Exact affine iteration Y_t = P(z_t) Y_{t-1} + Q; throws on overflow naming
// the first bad index.
std::vector<Eigen::VectorXd> iterate_sre(const SreSystem& sys, std::span<const double> z,
                                         const Eigen::VectorXd& y0);

// Largest eigenvalue modulus; power iteration, falling back to the
// Hessenberg-QR eigensolver when the dominant eigenvalue is complex or
// convergence stalls.
double spectral_radius(const Eigen::MatrixXd& a, double tol = 1e-8, int max_iter = 10000);

using MatrixSampler = std::function<Eigen::MatrixXd(double)>;

// Renormalized-product estimator of the top Lyapunov coefficient
// rho = lim t^-1 E log ||P_t ... P_1|| for the matrix map z -> sampler(z)
// driven by i.i.d. innovations from `model`.
LyapunovEstimate top_lyapunov(const MatrixSampler& sampler, const InnovationModel& model,
                              long horizon, int reps, const SeedSpec& seed);

struct MomentDecayResult {
    double s_tilde = 0.0;
    double lambda = 0.0;
    double c = 0.0;
    double r_squared = 0.0;
};

// Searches s_tilde for which E||P_t...P_1||^s_tilde fits c * lambda^t with
// lambda < 1 (log-linear regression over t_grid, R^2 >= 0.95); empty when no
// exponent in the grid passes.
std::optional<MomentDecayResult> moment_decay_check(const MatrixSampler& sampler,
                                                    const InnovationModel& model,
                                                    std::span<const double> s_grid,
                                                    std::span<const long> t_grid, int reps,
                                                    const SeedSpec& seed);

// Operator 2-norm estimate via a few power-iteration steps on A^T A.
double op_norm_estimate(const Eigen::MatrixXd& a, int iters = 12);

}  // namespace garchlab
