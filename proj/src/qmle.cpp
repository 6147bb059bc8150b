#include "garchlab/qmle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace garchlab {

void CompactSetK::validate() const {
    if (!(m > 0.0) || !(M > m)) throw std::invalid_argument("CompactSetK: 0 < m < M required");
    if (!(beta_bar > 0.0 && beta_bar < 1.0))
        throw std::invalid_argument("CompactSetK: beta_bar in (0,1) required");
    if (!(q * m < beta_bar)) throw std::invalid_argument("CompactSetK: q*m < beta_bar required");
    if (p < 1 || q < 0) throw std::invalid_argument("CompactSetK: p >= 1, q >= 0 required");
}

bool CompactSetK::contains(const GarchParams& theta, double tol) const {
    for (double v : theta.alpha)
        if (v < m - tol || v > M + tol) return false;
    for (double v : theta.beta)
        if (v < m - tol || v > M + tol) return false;
    return theta.beta_sum() <= beta_bar + tol;
}

GarchParams unpack_theta(const Eigen::VectorXd& v, int p, int q) {
    GarchParams params;
    params.alpha.assign(v.data(), v.data() + p + 1);
    params.beta.assign(v.data() + p + 1, v.data() + p + 1 + q);
    return params;
}

Eigen::VectorXd pack_theta(const GarchParams& params) {
    Eigen::VectorXd v(params.dim());
    for (int i = 0; i <= params.p(); ++i) v(i) = params.alpha[i];
    for (int j = 0; j < params.q(); ++j) v(params.p() + 1 + j) = params.beta[j];
    return v;
}

Eigen::VectorXd project_to_k(Eigen::VectorXd theta, const CompactSetK& K) {
    const int d = K.p + 1 + K.q;
    for (int i = 0; i < d; ++i) theta(i) = std::clamp(theta(i), K.m, K.M);
    auto beta = theta.segment(K.p + 1, K.q);
    double s = beta.sum();
    if (s > K.beta_bar) beta *= K.beta_bar / s;
    // Rescaling can push small components below m; lift them back and
    // rescale the rest until feasible.
    for (int pass = 0; pass <= K.q; ++pass) {
        double fixed = 0.0, free_sum = 0.0;
        for (int j = 0; j < K.q; ++j) {
            if (beta(j) <= K.m)
                fixed += K.m;
            else
                free_sum += beta(j);
        }
        if (fixed + free_sum <= K.beta_bar + 1e-15) {
            for (int j = 0; j < K.q; ++j) beta(j) = std::max(beta(j), K.m);
            break;
        }
        const double scale = (K.beta_bar - fixed) / free_sum;
        for (int j = 0; j < K.q; ++j) beta(j) = (beta(j) <= K.m) ? K.m : beta(j) * scale;
    }
    return theta;
}

namespace {

// One pass over the series: quasi log-likelihood and, when grad != nullptr,
// its analytic gradient via the filter gradient recursion. Hot path for the
// optimizer; ring buffers, no heap traffic in the loop.
double eval_loglik(const std::vector<double>& x2, const GarchParams& params,
                   Eigen::VectorXd* grad) {
    const int p = params.p();
    const int q = params.q();
    const int d = p + q + 1;
    const long n = static_cast<long>(x2.size());
    const double* a = params.alpha.data();
    const double* b = params.beta.data();
    const double bsum = params.beta_sum();
    const double h0 = a[0] / (1.0 - bsum);

    // Ring buffers over the last max(p,q) steps plus presample.
    std::vector<double> h_hist(static_cast<std::size_t>(q), h0);
    std::vector<double> g_hist;  // q rows of d gradient entries
    Eigen::RowVectorXd g_pre;
    if (grad) {
        g_pre = Eigen::RowVectorXd::Zero(d);
        g_pre(0) = 1.0 / (1.0 - bsum);
        for (int k = 1; k <= q; ++k) g_pre(p + k) = a[0] / ((1.0 - bsum) * (1.0 - bsum));
        g_hist.assign(static_cast<std::size_t>(q) * d, 0.0);
        for (int j = 0; j < q; ++j)
            for (int c = 0; c < d; ++c) g_hist[static_cast<std::size_t>(j) * d + c] = g_pre(c);
        grad->setZero(d);
    }
    std::vector<double> g_new(static_cast<std::size_t>(d), 0.0);

    double ll = 0.0;
    long ring = 0;  // position of h_{t-1} in the ring (most recent)
    for (long t = 0; t < n; ++t) {
        double h = a[0];
        for (int i = 1; i <= p; ++i)
            if (t - i >= 0) h += a[i] * x2[t - i];
        for (int j = 1; j <= q; ++j) {
            const long idx = (ring - j + 1 + 2 * q) % std::max(q, 1);
            h += b[j - 1] * h_hist[idx];
        }
        if (!std::isfinite(h)) throw std::overflow_error("log_likelihood: non-finite h");
        const double r = x2[t] / h;
        ll -= 0.5 * (r + std::log(h));

        if (grad) {
            for (int c = 0; c < d; ++c) g_new[c] = 0.0;
            g_new[0] = 1.0;
            for (int i = 1; i <= p; ++i)
                if (t - i >= 0) g_new[i] = x2[t - i];
            for (int k = 1; k <= q; ++k) {
                const long idx = (ring - k + 1 + 2 * q) % std::max(q, 1);
                g_new[p + k] = h_hist[idx];
            }
            for (int j = 1; j <= q; ++j) {
                const long idx = (ring - j + 1 + 2 * q) % std::max(q, 1);
                const double bj = b[j - 1];
                const double* row = g_hist.data() + idx * d;
                for (int c = 0; c < d; ++c) g_new[c] += bj * row[c];
            }
            const double w = 0.5 * (r - 1.0) / h;
            for (int c = 0; c < d; ++c) (*grad)(c) += w * g_new[c];
        }

        if (q > 0) {
            ring = (ring + 1) % q;
            h_hist[ring] = h;
            if (grad) {
                double* row = g_hist.data() + ring * d;
                for (int c = 0; c < d; ++c) row[c] = g_new[c];
            }
        }
    }
    return ll;
}

std::vector<double> to_squares(std::span<const double> x) {
    std::vector<double> x2(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) throw std::invalid_argument("non-finite observation in series");
        x2[i] = x[i] * x[i];
    }
    return x2;
}

// Gradient with components pointing out of active constraints removed.
Eigen::VectorXd active_set_projected_gradient(const Eigen::VectorXd& g,
                                              const Eigen::VectorXd& theta,
                                              const CompactSetK& K) {
    const double eps = 1e-9 * (1.0 + K.M);
    Eigen::VectorXd pg = g;
    const int d = static_cast<int>(theta.size());
    for (int i = 0; i < d; ++i) {
        if (theta(i) <= K.m + eps && pg(i) < 0.0) pg(i) = 0.0;
        if (theta(i) >= K.M - eps && pg(i) > 0.0) pg(i) = 0.0;
    }
    if (K.q > 0) {
        const auto beta = theta.segment(K.p + 1, K.q);
        if (beta.sum() >= K.beta_bar - eps) {
            // On the simplex face: remove the outward normal component over
            // the beta coordinates that are still free in the box.
            double sum_g = 0.0;
            int n_free = 0;
            for (int j = 0; j < K.q; ++j) {
                const int i = K.p + 1 + j;
                if (theta(i) > K.m + eps && theta(i) < K.M - eps) {
                    sum_g += pg(i);
                    ++n_free;
                }
            }
            if (n_free > 0 && sum_g > 0.0) {
                const double mean_g = sum_g / n_free;
                for (int j = 0; j < K.q; ++j) {
                    const int i = K.p + 1 + j;
                    if (theta(i) > K.m + eps && theta(i) < K.M - eps) pg(i) -= mean_g;
                }
            }
        }
    }
    return pg;
}

struct StartResult {
    Eigen::VectorXd theta;
    double loglik = -std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    bool improved = false;
    double pg_norm = 0.0;
};

StartResult run_start(const std::vector<double>& x2, Eigen::VectorXd theta,
                      const CompactSetK& K, const FitOptions& opts, double tol) {
    StartResult res;
    const int p = K.p, q = K.q;
    Eigen::VectorXd grad(p + q + 1);
    double f = eval_loglik(x2, unpack_theta(theta, p, q), &grad);
    const double f_init = f;
    double step = 1.0 / (1.0 + grad.norm());

    int iter = 0;
    for (; iter < opts.max_iter; ++iter) {
        const Eigen::VectorXd pg = active_set_projected_gradient(grad, theta, K);
        res.pg_norm = pg.norm();
        if (res.pg_norm < tol) {
            res.converged = true;
            break;
        }
        // Backtracking ascent along the projection arc.
        bool accepted = false;
        Eigen::VectorXd theta_new;
        double f_new = f;
        for (int bt = 0; bt < 60; ++bt) {
            theta_new = project_to_k(theta + step * grad, K);
            const Eigen::VectorXd delta = theta_new - theta;
            if (delta.norm() == 0.0) break;
            f_new = eval_loglik(x2, unpack_theta(theta_new, p, q), nullptr);
            const double gain = grad.dot(delta);
            if (f_new >= f + 1e-4 * std::max(gain, 0.0) && f_new >= f) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // stalled

        Eigen::VectorXd grad_new(p + q + 1);
        const double check = eval_loglik(x2, unpack_theta(theta_new, p, q), &grad_new);
        (void)check;
        // Barzilai-Borwein step for the next iteration (curvature along the
        // accepted step), safeguarded.
        const Eigen::VectorXd s = theta_new - theta;
        const Eigen::VectorXd y = grad - grad_new;  // positive curvature if concave
        const double sy = s.dot(y);
        if (sy > 1e-16)
            step = std::clamp(s.squaredNorm() / sy, 1e-12, 1e6);
        else
            step *= 2.0;
        theta = theta_new;
        f = f_new;
        grad = grad_new;
    }
    res.theta = theta;
    res.loglik = f;
    res.iterations = iter;
    res.improved = f > f_init;
    return res;
}

bool lexicographically_smaller(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (int i = 0; i < a.size(); ++i) {
        if (a(i) < b(i)) return true;
        if (a(i) > b(i)) return false;
    }
    return false;
}

}  // namespace

double log_likelihood(std::span<const double> x, const GarchParams& params) {
    params.validate();
    if (params.beta_sum() >= 1.0)
        throw std::invalid_argument("log_likelihood: sum(beta) >= 1");
    return eval_loglik(to_squares(x), params, nullptr);
}

Eigen::VectorXd likelihood_gradient(std::span<const double> x, const GarchParams& params) {
    params.validate();
    if (params.beta_sum() >= 1.0)
        throw std::invalid_argument("likelihood_gradient: sum(beta) >= 1");
    Eigen::VectorXd grad(params.dim());
    eval_loglik(to_squares(x), params, &grad);
    return grad;
}

FitResult fit(std::span<const double> x, const CompactSetK& K, const FitOptions& opts,
              const SeedSpec& seed) {
    (void)seed;  // the start grid is deterministic; kept for interface stability
    K.validate();
    const int d = K.p + 1 + K.q;
    if (static_cast<long>(x.size()) < 50L * d)
        throw std::invalid_argument("fit: series length must be >= 50*(p+q+1)");
    const std::vector<double> x2 = to_squares(x);

    // Degenerate-data detection: near-constant input drives alphas to the box
    // bound; flagged, not an error.
    double mean2 = 0.0;
    for (double v : x2) mean2 += v;
    mean2 /= static_cast<double>(x2.size());
    double var2 = 0.0;
    for (double v : x2) var2 += (v - mean2) * (v - mean2);
    const bool degenerate = var2 / static_cast<double>(x2.size()) < 1e-12;

    // Deterministic start grid: box corners shrunk 10% toward the centroid,
    // plus the centroid, all projected into K.
    const double mid = 0.5 * (K.m + K.M);
    Eigen::VectorXd centroid = project_to_k(Eigen::VectorXd::Constant(d, mid), K);
    std::vector<Eigen::VectorXd> starts;
    starts.push_back(centroid);
    std::vector<Eigen::VectorXd> corners;
    if (d <= 5) {
        for (int mask = 0; mask < (1 << d); ++mask) {
            Eigen::VectorXd c(d);
            for (int i = 0; i < d; ++i) c(i) = (mask >> i) & 1 ? K.M : K.m;
            corners.push_back(c);
        }
    } else {
        corners.push_back(Eigen::VectorXd::Constant(d, K.m));
        corners.push_back(Eigen::VectorXd::Constant(d, K.M));
        for (int i = 0; i < d; ++i) {
            Eigen::VectorXd lo = Eigen::VectorXd::Constant(d, K.m);
            lo(i) = K.M;
            corners.push_back(lo);
            Eigen::VectorXd hi = Eigen::VectorXd::Constant(d, K.M);
            hi(i) = K.m;
            corners.push_back(hi);
        }
    }
    for (const auto& c : corners)
        starts.push_back(project_to_k(c + 0.1 * (centroid - c), K));

    const double tol = opts.tol_scale * static_cast<double>(x.size());
    StartResult best;
    bool have_best = false;
    bool any_improved = false;
    int best_iters = 0;
    for (const auto& s : starts) {
        StartResult r = run_start(x2, s, K, opts, tol);
        any_improved = any_improved || r.improved || r.converged;
        const bool better =
            !have_best || r.loglik > best.loglik ||
            (r.loglik == best.loglik && lexicographically_smaller(r.theta, best.theta));
        if (better) {
            best = r;
            best_iters = r.iterations;
            have_best = true;
        }
    }

    FitResult out;
    out.theta_hat = unpack_theta(best.theta, K.p, K.q);
    out.loglik = best.loglik;
    out.iterations = best_iters;
    out.converged = best.converged && any_improved;
    out.gradient_norm = best.pg_norm;
    out.starts_used = static_cast<int>(starts.size());
    out.degenerate_data = degenerate;
    if (!any_improved) out.converged = false;
    return out;
}

}  // namespace garchlab
