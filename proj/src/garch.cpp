#include "garchlab/garch.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "garchlab/sre.hpp"

namespace garchlab {

double GarchParams::beta_sum() const {
    return std::accumulate(beta.begin(), beta.end(), 0.0);
}

void GarchParams::validate() const {
    if (alpha.empty() || p() < 1)
        throw std::invalid_argument("GarchParams: p >= 1 required");
    if (!(alpha[0] > 0.0))
        throw std::invalid_argument("GarchParams: alpha_0 > 0 required");
    for (double a : alpha)
        if (!(a >= 0.0) || !std::isfinite(a))
            throw std::invalid_argument("GarchParams: alpha_i >= 0 required");
    for (double b : beta)
        if (!(b >= 0.0) || !std::isfinite(b))
            throw std::invalid_argument("GarchParams: beta_j >= 0 required");
}

bool necessary_stationarity(const GarchParams& params) {
    params.validate();
    return params.beta_sum() < 1.0;
}

GarchPath simulate(const GarchParams& params, const InnovationModel& model, long n,
                   long burn_in, const SeedSpec& seed) {
    params.validate();
    if (n < 1) throw std::invalid_argument("simulate: n >= 1 required");
    if (burn_in < 0) throw std::invalid_argument("simulate: burn_in >= 0 required");
    const double bsum = params.beta_sum();
    if (bsum >= 1.0)
        throw std::invalid_argument("simulate: sum(beta) >= 1, fixed-point initialization "
                                    "undefined");

    const int p = params.p();
    const int q = params.q();
    const long total = burn_in + n;

    GarchPath path;
    path.params_used = params;
    path.burn_in = burn_in;
    path.full_z.resize(total);
    {
        auto eng = make_engine(seed);
        model.sample(std::span<double>(path.full_z), eng);
    }
    path.full_x.resize(total);
    path.full_sigma2.resize(total);

    const double s2_init = params.alpha[0] / (1.0 - bsum);
    for (long t = 0; t < total; ++t) {
        double s2 = params.alpha[0];
        for (int i = 1; i <= p; ++i) {
            const long ti = t - i;
            const double x2 = (ti >= 0) ? path.full_x[ti] * path.full_x[ti] : 0.0;
            s2 += params.alpha[i] * x2;
        }
        for (int j = 1; j <= q; ++j) {
            const long tj = t - j;
            const double h = (tj >= 0) ? path.full_sigma2[tj] : s2_init;
            s2 += params.beta[j - 1] * h;
        }
        if (!std::isfinite(s2))
            throw std::overflow_error("simulate: non-finite sigma^2 at index " +
                                      std::to_string(t + 1));
        path.full_sigma2[t] = s2;
        path.full_x[t] = std::sqrt(s2) * path.full_z[t];
    }

    path.x.assign(path.full_x.begin() + burn_in, path.full_x.end());
    path.sigma2.assign(path.full_sigma2.begin() + burn_in, path.full_sigma2.end());
    path.z.assign(path.full_z.begin() + burn_in, path.full_z.end());
    return path;
}

LyapunovEstimate lyapunov_stationarity(const GarchParams& params, const InnovationModel& model,
                                       long horizon, int reps, const SeedSpec& seed) {
    if (horizon < 100) throw std::invalid_argument("lyapunov_stationarity: horizon >= 100");
    const SreSystem sys = build_sre(params);
    return top_lyapunov([&sys](double z) { return sys.m1(z); }, model, horizon, reps, seed);
}

}  // namespace garchlab
