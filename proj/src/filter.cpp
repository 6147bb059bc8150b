#include "garchlab/filter.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace garchlab {

namespace {

void check_filter_domain(const GarchParams& params) {
    params.validate();
    if (params.beta_sum() >= 1.0)
        throw std::invalid_argument("filter: sum(beta) >= 1, presample value undefined");
}

// Shared recursion core. x2 is the squared observation series (presample
// zeros implicit); h_presample seeds h_{t} for t <= 0. When grad != nullptr,
// the per-component gradient recursions run alongside, with grad_presample
// as the t <= 0 gradient row.
void run_filter(std::span<const double> x2, const GarchParams& params, double h_presample,
                std::vector<double>& h, Eigen::MatrixXd* grad,
                const Eigen::RowVectorXd& grad_presample) {
    const int p = params.p();
    const int q = params.q();
    const int d = params.dim();
    const long n = static_cast<long>(x2.size());
    h.resize(n);
    if (grad) grad->resize(n, d);

    for (long t = 0; t < n; ++t) {
        double v = params.alpha[0];
        for (int i = 1; i <= p; ++i)
            if (t - i >= 0) v += params.alpha[i] * x2[t - i];
        for (int j = 1; j <= q; ++j)
            v += params.beta[j - 1] * (t - j >= 0 ? h[t - j] : h_presample);
        if (!std::isfinite(v))
            throw std::overflow_error("filter: non-finite h at index " + std::to_string(t + 1));
        h[t] = v;

        if (!grad) continue;
        Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(d);
        g(0) = 1.0;                                     // d/d alpha_0
        for (int i = 1; i <= p; ++i)
            if (t - i >= 0) g(i) = x2[t - i];           // d/d alpha_i
        for (int k = 1; k <= q; ++k)                    // d/d beta_k
            g(p + k) = (t - k >= 0 ? h[t - k] : h_presample);
        for (int j = 1; j <= q; ++j)
            g += params.beta[j - 1] * (t - j >= 0 ? grad->row(t - j) : grad_presample);
        grad->row(t) = g;
    }
}

Eigen::RowVectorXd fixed_point_gradient(const GarchParams& params) {
    const int p = params.p();
    const int q = params.q();
    const double denom = 1.0 - params.beta_sum();
    Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(params.dim());
    g(0) = 1.0 / denom;
    for (int k = 1; k <= q; ++k) g(p + k) = params.alpha[0] / (denom * denom);
    return g;
}

std::vector<double> squares(std::span<const double> x) {
    std::vector<double> x2(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) x2[i] = x[i] * x[i];
    return x2;
}

}  // namespace

std::vector<double> filter_h(std::span<const double> x, const GarchParams& params) {
    check_filter_domain(params);
    if (x.empty()) throw std::invalid_argument("filter_h: empty series");
    const double h0 = params.alpha[0] / (1.0 - params.beta_sum());
    std::vector<double> h;
    run_filter(squares(x), params, h0, h, nullptr, {});
    return h;
}

std::vector<double> psi_coefficients(const GarchParams& params, int J) {
    check_filter_domain(params);
    if (J < 1) throw std::invalid_argument("psi_coefficients: J >= 1 required");
    const int p = params.p();
    const int q = params.q();
    std::vector<double> psi(J);
    for (int j = 1; j <= J; ++j) {
        double v = (j <= p) ? params.alpha[j] : 0.0;
        for (int i = 1; i <= std::min(j - 1, q); ++i) v += params.beta[i - 1] * psi[j - i - 1];
        // i = j term would reference psi_0 = 0; the division recursion starts
        // at psi_1 so it contributes nothing.
        psi[j - 1] = v;
    }
    return psi;
}

double h_hat_via_psi(std::span<const double> x, const GarchParams& params, long t) {
    check_filter_domain(params);
    if (t < 1 || t > static_cast<long>(x.size()))
        throw std::invalid_argument("h_hat_via_psi: t out of range");
    double v = params.alpha[0] / (1.0 - params.beta_sum());
    if (t > 1) {
        const auto psi = psi_coefficients(params, static_cast<int>(t - 1));
        for (long j = 1; j <= t - 1; ++j) v += psi[j - 1] * x[t - j - 1] * x[t - j - 1];
    }
    return v;
}

FilterOutput filter_gradient(std::span<const double> x, const GarchParams& params) {
    check_filter_domain(params);
    if (x.empty()) throw std::invalid_argument("filter_gradient: empty series");
    const double h0 = params.alpha[0] / (1.0 - params.beta_sum());
    FilterOutput out;
    run_filter(squares(x), params, h0, out.h, &out.grad, fixed_point_gradient(params));
    return out;
}

FilterOutput stationary_filter(const GarchPath& path, const GarchParams& params_true) {
    if (!(path.params_used == params_true))
        throw std::invalid_argument("stationary_filter: params do not match path.params_used");
    check_filter_domain(params_true);

    // Rerun the defining recursion over the full trajectory (burn-in
    // included); at the true parameter this reproduces sigma_t^2 exactly and
    // the burn-in washes out the gradient initialization geometrically.
    FilterOutput full;
    run_filter(squares(path.full_x), params_true,
               params_true.alpha[0] / (1.0 - params_true.beta_sum()), full.h, &full.grad,
               fixed_point_gradient(params_true));

    const long b = path.burn_in;
    const long n = static_cast<long>(path.x.size());
    FilterOutput out;
    out.h.assign(full.h.begin() + b, full.h.end());
    out.grad = full.grad.middleRows(b, n);
    return out;
}

}  // namespace garchlab
