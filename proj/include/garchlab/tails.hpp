#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

namespace garchlab {

struct TailReport {
    double alpha_hat = 0.0;
    long k_used = 0;
    double ci_low = 0.0;   // asymptotic 95% band alpha_hat * (1 -+ 1.96/sqrt(k))
    double ci_high = 0.0;
};

// Hill estimator on the k largest order statistics:
// alpha_hat = k / sum_{i=1..k} log(X_(i)/X_(k+1)).
TailReport hill(std::span<const double> sample, long k);

// Default k = floor(n^0.6) capped at n/10.
long default_hill_k(long n);

// k-sweep for stability plots.
std::vector<std::pair<long, double>> hill_sweep(std::span<const double> sample,
                                                std::span<const long> ks);

struct BreimanResult {
    std::vector<double> ratios;       // P(xi*eta > x) / P(xi > x) per threshold
    std::vector<bool> defined;        // false when the threshold exceeds the sample range
    double e_eta_alpha = 0.0;         // sample estimate of E eta^alpha
};

// Empirical check of Breiman's lemma P(xi*eta > x) ~ E[eta^alpha] P(xi > x)
// for paired samples of independent xi (regularly varying, index alpha) and
// eta (finite moment of order > alpha).
BreimanResult breiman_ratio(std::span<const double> xi, std::span<const double> eta,
                            double alpha, std::span<const double> x_grid);

// Fraction of large vectors (norm above the given empirical quantile) whose
// direction falls in each partition set; classify must map every direction
// to a set index in [0, n_sets).
std::vector<double> empirical_spectral_measure(
    const std::vector<Eigen::VectorXd>& vectors, double radius_quantile,
    const std::function<int(const Eigen::VectorXd&)>& classify, int n_sets);

// Blocks estimator of the extremal index:
// gamma_hat = (#blocks with >= 1 exceedance) / (total exceedances),
// threshold at the given empirical quantile, full blocks only.
double extremal_index_blocks(std::span<const double> series, long block_len,
                             double threshold_quantile);

}  // namespace garchlab
