#include "garchlab/sre.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace garchlab {

Eigen::MatrixXd companion_matrix(std::span<const double> beta) {
    const int q = static_cast<int>(beta.size());
    if (q < 1) throw std::invalid_argument("companion_matrix: q >= 1 required");
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(q, q);
    for (int j = 0; j < q; ++j) c(0, j) = beta[j];
    for (int r = 1; r < q; ++r) c(r, r - 1) = 1.0;
    return c;
}

SreSystem build_sre(const GarchParams& theta0) {
    theta0.validate();
    SreSystem sys;
    sys.p = std::max(theta0.p(), 3);
    sys.q = std::max(theta0.q(), 3);
    // Zero-pad: the extra coordinates carry zero coefficients and leave the
    // original dynamics untouched.
    sys.theta0 = theta0;
    sys.theta0.alpha.resize(sys.p + 1, 0.0);
    sys.theta0.beta.resize(sys.q, 0.0);

    const int p = sys.p, q = sys.q;
    const int d1 = p + q - 1;
    sys.dim = d1 + q * (p + q + 1);
    const auto& a = sys.theta0.alpha;
    const auto& b = sys.theta0.beta;

    Eigen::MatrixXd p0 = Eigen::MatrixXd::Zero(sys.dim, sys.dim);
    Eigen::MatrixXd pz = Eigen::MatrixXd::Zero(sys.dim, sys.dim);
    Eigen::VectorXd qv = Eigen::VectorXd::Zero(sys.dim);

    // --- M1 block: state (sigma^2_{t+1}..sigma^2_{t-q+2}, X^2_t..X^2_{t-p+2})
    // Row 0: sigma^2_{t+1} = (beta_1 + alpha_1 z^2) sigma^2_t
    //        + beta_2 sigma^2_{t-1} + ... + beta_q sigma^2_{t-q+1}
    //        + alpha_2 X^2_{t-1} + ... + alpha_p X^2_{t-p+1}   (+ alpha_0 in Q)
    for (int j = 1; j <= q; ++j) p0(0, j - 1) = b[j - 1];
    pz(0, 0) = a[1];
    for (int i = 2; i <= p; ++i) p0(0, q + i - 2) = a[i];
    for (int r = 1; r < q; ++r) p0(r, r - 1) = 1.0;  // sigma^2 shift
    pz(q, 0) = 1.0;                                  // X^2_t = z^2 sigma^2_t
    for (int k = 1; k <= p - 2; ++k) p0(q + k, q + k - 1) = 1.0;  // X^2 shift

    // --- gradient blocks: companion action (M3 = diag(C, p+1), M5 = diag(C, q))
    const Eigen::MatrixXd c = companion_matrix(b);
    for (int blk = 0; blk < p + 1 + q; ++blk)
        p0.block(d1 + blk * q, d1 + blk * q, q, q) = c;

    // --- couplings into the S block (M2 and M4)
    // alpha_1 block: driving term z^2 sigma^2_t
    pz(d1 + q, 0) = 1.0;
    // alpha_i blocks, i >= 2: driving term X^2_{t+1-i} = [S_{t-1}]_{q+i-1}
    for (int i = 2; i <= p; ++i) p0(d1 + i * q, q + i - 2) = 1.0;
    // beta_j blocks: driving term sigma^2_{t+1-j} = [S_{t-1}]_j
    for (int j = 1; j <= q; ++j) p0(d1 + (p + j) * q, j - 1) = 1.0;

    // Q: alpha_0 into sigma^2_{t+1}, constant 1 into d h/d alpha_0.
    qv(0) = a[0];
    qv(d1) = 1.0;

    sys.p_const = std::move(p0);
    sys.p_z2 = std::move(pz);
    sys.q_vec = std::move(qv);
    return sys;
}

std::vector<Eigen::VectorXd> iterate_sre(const SreSystem& sys, std::span<const double> z,
                                         const Eigen::VectorXd& y0) {
    if (!y0.allFinite()) throw std::invalid_argument("iterate_sre: non-finite initial state");
    if (y0.size() != sys.dim) throw std::invalid_argument("iterate_sre: y0 dimension mismatch");
    std::vector<Eigen::VectorXd> out;
    out.reserve(z.size());
    Eigen::VectorXd y = y0;
    for (std::size_t t = 0; t < z.size(); ++t) {
        y = sys.p_of(z[t]) * y + sys.q_vec;
        if (!y.allFinite())
            throw std::overflow_error("iterate_sre: overflow at index " + std::to_string(t + 1));
        out.push_back(y);
    }
    return out;
}

double op_norm_estimate(const Eigen::MatrixXd& a, int iters) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(a.cols()).normalized();
    for (int it = 0; it < iters; ++it) {
        Eigen::VectorXd w = a * v;
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        v = a.transpose() * w;
        const double nv = v.norm();
        if (nv == 0.0) return 0.0;
        v /= nv;
    }
    return (a * v).norm();
}

double spectral_radius(const Eigen::MatrixXd& a, double tol, int max_iter) {
    if (!a.allFinite()) throw std::invalid_argument("spectral_radius: non-finite entries");
    if (a.rows() != a.cols()) throw std::invalid_argument("spectral_radius: square matrix only");

    // Power iteration; catches the common nonnegative-dominant case fast.
    // Acceptance is by eigenpair residual, not successive estimates: defective
    // dominant eigenvalues converge too slowly and must hit the QR fallback.
    Eigen::VectorXd v = Eigen::VectorXd::Ones(a.cols()).normalized();
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd w = a * v;
        const double nw = w.norm();
        if (nw < 1e-300) return 0.0;  // (numerically) nilpotent direction
        const double lam = v.dot(w);
        if (it > 4 && (w - lam * v).norm() <= tol * nw) return std::abs(lam);
        v = w / nw;
    }
    // Complex dominant pair or slow separation: Hessenberg-QR fallback.
    const Eigen::EigenSolver<Eigen::MatrixXd> es(a, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("spectral_radius: eigensolver failed to converge");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

// log ||P_{z_horizon} ... P_{z_1}|| via periodically renormalized products;
// optionally records the running value at requested checkpoints.
double log_product_norm(const MatrixSampler& sampler, std::span<const double> z,
                        std::span<const long> checkpoints, std::vector<double>* record) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(sampler(0.0).rows(), sampler(0.0).cols());
    double log_acc = 0.0;
    std::size_t next_cp = 0;
    for (std::size_t t = 0; t < z.size(); ++t) {
        b = sampler(z[t]) * b;
        if (!b.allFinite()) throw std::overflow_error("lyapunov product: non-finite entries");
        if ((t + 1) % 10 == 0) {  // renormalization cadence
            const double nrm = op_norm_estimate(b);
            log_acc += std::log(std::max(nrm, 1e-300));
            b /= std::max(nrm, 1e-300);
        }
        if (record && next_cp < checkpoints.size() &&
            static_cast<long>(t + 1) == checkpoints[next_cp]) {
            record->push_back(log_acc + std::log(std::max(op_norm_estimate(b), 1e-300)));
            ++next_cp;
        }
    }
    return log_acc + std::log(std::max(op_norm_estimate(b), 1e-300));
}

}  // namespace

LyapunovEstimate top_lyapunov(const MatrixSampler& sampler, const InnovationModel& model,
                              long horizon, int reps, const SeedSpec& seed) {
    if (horizon < 100) throw std::invalid_argument("top_lyapunov: horizon >= 100 required");
    if (reps < 1) throw std::invalid_argument("top_lyapunov: reps >= 1 required");
    std::vector<double> rho(reps);
    for (int r = 0; r < reps; ++r) {
        auto eng = make_engine(seed.with_stream(seed.stream_index * 1000003ULL + r));
        std::vector<double> z(horizon);
        model.sample(std::span<double>(z), eng);
        rho[r] = log_product_norm(sampler, z, {}, nullptr) / static_cast<double>(horizon);
    }
    double mean = 0.0;
    for (double v : rho) mean += v;
    mean /= reps;
    double var = 0.0;
    for (double v : rho) var += (v - mean) * (v - mean);
    LyapunovEstimate est;
    est.rho_hat = mean;
    est.std_err = reps > 1 ? std::sqrt(var / (reps - 1) / reps) : 0.0;
    est.horizon = horizon;
    est.reps = reps;
    return est;
}

std::optional<MomentDecayResult> moment_decay_check(const MatrixSampler& sampler,
                                                    const InnovationModel& model,
                                                    std::span<const double> s_grid,
                                                    std::span<const long> t_grid, int reps,
                                                    const SeedSpec& seed) {
    if (s_grid.empty() || t_grid.size() < 2)
        throw std::invalid_argument("moment_decay_check: need >= 1 exponent and >= 2 horizons");
    const long horizon = t_grid.back();

    // One product run per replicate, recording log||P_t...P_1|| at each grid t.
    std::vector<std::vector<double>> logs(reps);
    for (int r = 0; r < reps; ++r) {
        auto eng = make_engine(seed.with_stream(seed.stream_index * 1000003ULL + r));
        std::vector<double> z(horizon);
        model.sample(std::span<double>(z), eng);
        logs[r].reserve(t_grid.size());
        log_product_norm(sampler, z, t_grid, &logs[r]);
    }

    for (double s : s_grid) {
        // log E||P_t...P_1||^s per horizon via log-sum-exp over replicates.
        std::vector<double> y(t_grid.size());
        for (std::size_t k = 0; k < t_grid.size(); ++k) {
            double mx = -std::numeric_limits<double>::infinity();
            for (int r = 0; r < reps; ++r) mx = std::max(mx, s * logs[r][k]);
            double acc = 0.0;
            for (int r = 0; r < reps; ++r) acc += std::exp(s * logs[r][k] - mx);
            y[k] = mx + std::log(acc / reps);
        }
        // Least squares y = log c + t log lambda.
        double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
        const double nk = static_cast<double>(t_grid.size());
        for (std::size_t k = 0; k < t_grid.size(); ++k) {
            st += t_grid[k];
            sy += y[k];
            stt += static_cast<double>(t_grid[k]) * t_grid[k];
            sty += t_grid[k] * y[k];
        }
        const double slope = (nk * sty - st * sy) / (nk * stt - st * st);
        const double intercept = (sy - slope * st) / nk;
        double ss_res = 0.0, ss_tot = 0.0;
        for (std::size_t k = 0; k < t_grid.size(); ++k) {
            const double fitv = intercept + slope * t_grid[k];
            ss_res += (y[k] - fitv) * (y[k] - fitv);
            ss_tot += (y[k] - sy / nk) * (y[k] - sy / nk);
        }
        const double r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
        if (slope < 0.0 && r2 >= 0.95) {
            MomentDecayResult res;
            res.s_tilde = s;
            res.lambda = std::exp(slope);
            res.c = std::exp(intercept);
            res.r_squared = r2;
            return res;
        }
    }
    return std::nullopt;
}

}  // namespace garchlab
