#include "garchlab/tails.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace garchlab {

TailReport hill(std::span<const double> sample, long k) {
    const long n = static_cast<long>(sample.size());
    if (k < 1 || k + 1 > n) throw std::invalid_argument("hill: need 1 <= k <= n-1");
    std::vector<double> pos;
    pos.reserve(sample.size());
    for (double v : sample)
        if (v > 0.0 && std::isfinite(v)) pos.push_back(v);
    if (static_cast<long>(pos.size()) < k + 1)
        throw std::invalid_argument("hill: need at least k+1 positive values");
    std::partial_sort(pos.begin(), pos.begin() + (k + 1), pos.end(), std::greater<double>());
    const double xk1 = pos[k];
    double s = 0.0;
    for (long i = 0; i < k; ++i) s += std::log(pos[i] / xk1);
    if (s <= 0.0) throw std::runtime_error("hill: degenerate (tied) order statistics");
    TailReport r;
    r.alpha_hat = static_cast<double>(k) / s;
    r.k_used = k;
    const double half = 1.96 / std::sqrt(static_cast<double>(k));
    r.ci_low = r.alpha_hat * (1.0 - half);
    r.ci_high = r.alpha_hat * (1.0 + half);
    return r;
}

long default_hill_k(long n) {
    const long k = static_cast<long>(std::floor(std::pow(static_cast<double>(n), 0.6)));
    return std::max<long>(1, std::min(k, n / 10));
}

std::vector<std::pair<long, double>> hill_sweep(std::span<const double> sample,
                                                std::span<const long> ks) {
    std::vector<std::pair<long, double>> out;
    out.reserve(ks.size());
    for (long k : ks) out.emplace_back(k, hill(sample, k).alpha_hat);
    return out;
}

BreimanResult breiman_ratio(std::span<const double> xi, std::span<const double> eta,
                            double alpha, std::span<const double> x_grid) {
    if (xi.size() != eta.size() || xi.empty())
        throw std::invalid_argument("breiman_ratio: paired nonempty samples required");
    BreimanResult res;
    const double n = static_cast<double>(xi.size());
    double e = 0.0;
    for (double v : eta) e += std::pow(v, alpha);
    res.e_eta_alpha = e / n;

    for (double x : x_grid) {
        long num = 0, den = 0;
        for (std::size_t i = 0; i < xi.size(); ++i) {
            if (xi[i] * eta[i] > x) ++num;
            if (xi[i] > x) ++den;
        }
        if (den == 0) {
            res.ratios.push_back(std::numeric_limits<double>::quiet_NaN());
            res.defined.push_back(false);
        } else {
            res.ratios.push_back(static_cast<double>(num) / static_cast<double>(den));
            res.defined.push_back(true);
        }
    }
    return res;
}

std::vector<double> empirical_spectral_measure(
    const std::vector<Eigen::VectorXd>& vectors, double radius_quantile,
    const std::function<int(const Eigen::VectorXd&)>& classify, int n_sets) {
    if (!(radius_quantile >= 0.9 && radius_quantile < 1.0))
        throw std::invalid_argument("empirical_spectral_measure: quantile in [0.9, 1)");
    if (vectors.empty()) throw std::invalid_argument("empirical_spectral_measure: empty sample");
    std::vector<double> norms(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) norms[i] = vectors[i].norm();
    std::vector<double> sorted = norms;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t idx =
        static_cast<std::size_t>(radius_quantile * static_cast<double>(sorted.size() - 1));
    const double threshold = sorted[idx];

    std::vector<long> counts(n_sets, 0);
    long total = 0;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (norms[i] <= threshold || norms[i] <= 0.0) continue;
        const int set = classify(vectors[i] / norms[i]);
        if (set < 0 || set >= n_sets)
            throw std::invalid_argument("empirical_spectral_measure: classify must be total");
        ++counts[set];
        ++total;
    }
    if (total == 0) throw std::runtime_error("empirical_spectral_measure: empty exceedance set");
    std::vector<double> weights(n_sets);
    for (int s = 0; s < n_sets; ++s)
        weights[s] = static_cast<double>(counts[s]) / static_cast<double>(total);
    return weights;
}

double extremal_index_blocks(std::span<const double> series, long block_len,
                             double threshold_quantile) {
    const long n = static_cast<long>(series.size());
    if (block_len < 2) throw std::invalid_argument("extremal_index_blocks: block_len >= 2");
    if (n < 50 * block_len)
        throw std::invalid_argument("extremal_index_blocks: series length >= 50*block_len");
    std::vector<double> sorted(series.begin(), series.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t idx =
        static_cast<std::size_t>(threshold_quantile * static_cast<double>(n - 1));
    const double u = sorted[idx];

    const long n_blocks = n / block_len;
    long exceedances = 0, hit_blocks = 0;
    for (long bidx = 0; bidx < n_blocks; ++bidx) {
        bool hit = false;
        for (long t = bidx * block_len; t < (bidx + 1) * block_len; ++t) {
            if (series[t] > u) {
                ++exceedances;
                hit = true;
            }
        }
        if (hit) ++hit_blocks;
    }
    if (exceedances == 0) throw std::runtime_error("extremal_index_blocks: zero exceedances");
    return static_cast<double>(hit_blocks) / static_cast<double>(exceedances);
}

}  // namespace garchlab
