#include "garchlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "garchlab/filter.hpp"

namespace garchlab {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void parallel_for(long n_items, int threads, const std::function<void(long)>& fn) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = static_cast<int>(std::max<long>(1, std::min<long>(threads, n_items)));
    if (threads == 1) {
        for (long i = 0; i < n_items; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const long i = next.fetch_add(1);
                if (i >= n_items) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<double> parse_list(const std::string& field, const std::string& v) {
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
        throw std::invalid_argument("config field '" + field + "': expected [list]");
    std::vector<double> out;
    std::stringstream ss(v.substr(1, v.size() - 2));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    return out;
}

class KeyValues {
  public:
    explicit KeyValues(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

    bool has(const std::string& k) const { return kv_.count(k) > 0; }
    std::string str(const std::string& k, const std::string& def = "") const {
        auto it = kv_.find(k);
        return it == kv_.end() ? def : it->second;
    }
    double num(const std::string& k, double def) const {
        auto it = kv_.find(k);
        if (it == kv_.end()) return def;
        try {
            return std::stod(it->second);
        } catch (...) {
            throw std::invalid_argument("config field '" + k + "': not a number");
        }
    }
    bool flag(const std::string& k, bool def) const {
        auto it = kv_.find(k);
        if (it == kv_.end()) return def;
        return it->second == "true" || it->second == "1";
    }
    std::vector<double> list(const std::string& k) const {
        auto it = kv_.find(k);
        if (it == kv_.end())
            throw std::invalid_argument("config field '" + k + "': missing");
        return parse_list(k, it->second);
    }

  private:
    std::map<std::string, std::string> kv_;
};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: malformed line '" + line + "'");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    const KeyValues c(std::move(kv));

    ExperimentConfig cfg;
    cfg.kind = c.str("kind");
    if (c.has("theta0.alpha")) {
        for (double v : c.list("theta0.alpha")) cfg.theta0.alpha.push_back(v);
    }
    if (c.has("theta0.beta")) {
        for (double v : c.list("theta0.beta")) cfg.theta0.beta.push_back(v);
    }
    cfg.innovation_family = c.str("innovation.family", "gaussian");
    cfg.innovation_param =
        c.num("innovation.nu", c.num("innovation.alpha_tail", 0.0));
    if (c.has("n_grid")) {
        for (double v : c.list("n_grid")) cfg.n_grid.push_back(static_cast<long>(v));
    }
    cfg.replications = static_cast<int>(c.num("replications", 200));
    cfg.burn_in = static_cast<long>(c.num("burn_in", kDefaultBurnIn));
    cfg.K.m = c.num("K.m", 0.01);
    cfg.K.M = c.num("K.M", 5.0);
    cfg.K.beta_bar = c.num("K.beta_bar", 0.95);
    cfg.optimizer.tol_scale = c.num("optimizer.tol", 1e-6);
    cfg.optimizer.max_iter = static_cast<int>(c.num("optimizer.max_iter", 500));
    cfg.base_seed = static_cast<std::uint64_t>(c.num("base_seed", 1));
    cfg.out = c.str("out", "out");
    cfg.threads = static_cast<int>(c.num("threads", 0));
    cfg.force = c.flag("force", false);
    cfg.n = static_cast<long>(c.num("n", 0));
    cfg.data = c.str("data");
    cfg.tails_k = static_cast<long>(c.num("tails.k", 0));
    cfg.block_len = static_cast<long>(c.num("tails.block_len", 100));
    cfg.threshold_quantile = c.num("tails.threshold_quantile", 0.99);
    cfg.lyapunov_horizon = static_cast<long>(c.num("lyapunov.horizon", 2000));
    cfg.lyapunov_reps = static_cast<int>(c.num("lyapunov.reps", 50));
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

InnovationModel ExperimentConfig::innovation() const {
    return make_innovation(innovation_family, innovation_param);
}

void ExperimentConfig::validate() const {
    const bool needs_theta =
        kind != "tails" && kind != "fit";
    if (needs_theta) {
        if (theta0.alpha.empty())
            throw std::invalid_argument("config field 'theta0.alpha': missing");
        theta0.validate();
    }
    innovation();  // validates family parameters
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1])
            throw std::invalid_argument("config field 'n_grid': must be strictly increasing");
    if (replications < 1)
        throw std::invalid_argument("config field 'replications': must be >= 1");
    const bool estimation = kind == "rate" || kind == "stable-limit";
    if (estimation) {
        if (n_grid.empty()) throw std::invalid_argument("config field 'n_grid': missing");
        CompactSetK k = K;
        k.p = theta0.p();
        k.q = theta0.q();
        k.validate();
        // Condition C.4: theta0 interior to K.
        for (double v : theta0.alpha)
            if (!(v > k.m && v < k.M))
                throw std::invalid_argument(
                    "config field 'theta0.alpha': must lie strictly inside [K.m, K.M]");
        for (double v : theta0.beta)
            if (!(v > k.m && v < k.M))
                throw std::invalid_argument(
                    "config field 'theta0.beta': must lie strictly inside [K.m, K.M]");
        if (!(theta0.beta_sum() < k.beta_bar))
            throw std::invalid_argument(
                "config field 'theta0.beta': sum must be < K.beta_bar (interior of K)");
    }
    if ((kind == "fit" || kind == "tails") && data.empty())
        throw std::invalid_argument("config field 'data': missing");
}

// ---------------------------------------------------------------------------
// Shared helpers

namespace {

double inf_norm(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Slope of y on x with standard error.
std::pair<double, double> regression_slope(const std::vector<double>& x,
                                           const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - intercept - slope * x[i];
        ss_res += r * r;
    }
    const double se =
        x.size() > 2 ? std::sqrt(ss_res / (n - 2.0) / (sxx - sx * sx / n)) : 0.0;
    return {slope, se};
}

double kurtosis_of(const Eigen::VectorXd& v) {
    const double mean = v.mean();
    double m2 = 0.0, m4 = 0.0;
    for (long i = 0; i < v.size(); ++i) {
        const double d = v(i) - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(v.size());
    m4 /= static_cast<double>(v.size());
    return m4 / (m2 * m2);
}

CompactSetK k_for(const ExperimentConfig& cfg) {
    CompactSetK k = cfg.K;
    k.p = cfg.theta0.p();
    k.q = cfg.theta0.q();
    return k;
}

// Scaling sequence for standardized estimation errors: x_n = n/a_n in the
// heavy-tailed regime, sqrt(n) for light tails.
double error_scale(const InnovationModel& model, long n) {
    if (model.heavy_tailed() && model.square_tail_index() < 2.0)
        return static_cast<double>(n) / model.normalizing_a_n(n);
    return std::sqrt(static_cast<double>(n));
}

void require_stationary(const ExperimentConfig& cfg) {
    const auto est = lyapunov_stationarity(cfg.theta0, cfg.innovation(), cfg.lyapunov_horizon,
                                           cfg.lyapunov_reps,
                                           SeedSpec{cfg.base_seed ^ 0x5ca1ab1eULL, 0});
    if (!cfg.force && est.rho_hat >= 0.0)
        throw std::runtime_error("theta0 appears nonstationary: Lyapunov estimate rho_hat = " +
                                 fmt17(est.rho_hat) + " (std_err " + fmt17(est.std_err) + ")");
}

}  // namespace

// ---------------------------------------------------------------------------
// Rate experiment

RateResult run_rate_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    require_stationary(cfg);
    const InnovationModel model = cfg.innovation();
    const CompactSetK K = k_for(cfg);
    const Eigen::VectorXd theta0 = pack_theta(cfg.theta0);
    const int reps = cfg.replications;

    RateResult result;
    result.n_values = cfg.n_grid;
    result.rows.resize(cfg.n_grid.size() * static_cast<std::size_t>(reps));

    for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
        const long n = cfg.n_grid[ni];
        const double xn = error_scale(model, n);
        parallel_for(reps, cfg.threads, [&, ni, n, xn](long r) {
            const SeedSpec seed{cfg.base_seed,
                                ni * static_cast<std::size_t>(reps) + static_cast<std::size_t>(r)};
            const auto t0 = std::chrono::steady_clock::now();
            RateRow row;
            row.n = n;
            row.replicate = static_cast<int>(r);
            row.x_n = xn;
            try {
                const GarchPath path = simulate(cfg.theta0, model, n, cfg.burn_in, seed);
                const FitResult fitres = fit(path.x, K, cfg.optimizer, seed);
                row.converged = fitres.converged;
                row.theta_hat = fitres.theta_hat;
                row.error = pack_theta(fitres.theta_hat) - theta0;
            } catch (const std::exception&) {
                row.converged = false;
                row.theta_hat = cfg.theta0;
                row.error = Eigen::VectorXd::Constant(theta0.size(),
                                                      std::numeric_limits<double>::quiet_NaN());
            }
            row.runtime_ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();
            result.rows[ni * reps + r] = std::move(row);
        });
    }

    // Per-n medians of successful fits; failures counted, never averaged in.
    std::vector<double> log_n, log_med;
    for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
        std::vector<double> errs;
        for (int r = 0; r < reps; ++r) {
            const RateRow& row = result.rows[ni * reps + r];
            if (row.converged)
                errs.push_back(inf_norm(row.error));
            else
                ++result.failed_fits;
        }
        const double med = errs.empty() ? std::numeric_limits<double>::quiet_NaN()
                                        : median_of(std::move(errs));
        result.median_err.push_back(med);
        if (std::isfinite(med) && med > 0.0) {
            log_n.push_back(std::log(static_cast<double>(cfg.n_grid[ni])));
            log_med.push_back(std::log(med));
        }
    }
    if (log_n.size() >= 2) {
        const auto [slope, se] = regression_slope(log_n, log_med);
        result.slope = slope;
        result.slope_std_err = se;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Stable limit

StableLimitResult run_stable_limit(const ExperimentConfig& cfg) {
    cfg.validate();
    require_stationary(cfg);
    const InnovationModel model = cfg.innovation();
    const CompactSetK K = k_for(cfg);
    const Eigen::VectorXd theta0 = pack_theta(cfg.theta0);
    const int d = static_cast<int>(theta0.size());
    const int reps = cfg.replications;
    const long n = cfg.n_grid.back();

    StableLimitResult result;
    result.n = n;
    result.scale = error_scale(model, n);
    result.standardized_errors.resize(reps, d);
    std::vector<char> ok(reps, 0);

    parallel_for(reps, cfg.threads, [&](long r) {
        const SeedSpec seed{cfg.base_seed, static_cast<std::uint64_t>(r)};
        try {
            const GarchPath path = simulate(cfg.theta0, model, n, cfg.burn_in, seed);
            const FitResult fitres = fit(path.x, K, cfg.optimizer, seed);
            result.standardized_errors.row(r) =
                result.scale * (pack_theta(fitres.theta_hat) - theta0).transpose();
            ok[r] = fitres.converged ? 1 : 0;
        } catch (const std::exception&) {
            ok[r] = 0;
        }
    });

    // Compact to the successful rows.
    Eigen::MatrixXd kept(reps, d);
    long m = 0;
    for (int r = 0; r < reps; ++r) {
        if (ok[r])
            kept.row(m++) = result.standardized_errors.row(r);
        else
            ++result.failed_fits;
    }
    result.standardized_errors = kept.topRows(m);

    for (int c = 0; c < d; ++c) {
        const Eigen::VectorXd col = result.standardized_errors.col(c).cwiseAbs();
        std::vector<double> v(col.data(), col.data() + col.size());
        result.hill_per_component.push_back(hill(v, default_hill_k(m)));
        // Sum-stability diagnostic: pair sums keep the same tail index.
        std::vector<double> pairs;
        for (long i = 0; i + 1 < m; i += 2)
            pairs.push_back(std::abs(result.standardized_errors(i, c) +
                                     result.standardized_errors(i + 1, c)));
        result.pair_sum_hill.push_back(
            hill(pairs, default_hill_k(static_cast<long>(pairs.size()))).alpha_hat);
        result.kurtosis.push_back(kurtosis_of(result.standardized_errors.col(c)));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Martingale-transform sums

MtSumsResult run_mt_sums(const ExperimentConfig& cfg) {
    cfg.validate();
    require_stationary(cfg);
    const InnovationModel model = cfg.innovation();
    const int d = cfg.theta0.dim();
    const int reps = cfg.replications;
    const long n = cfg.n_grid.empty() ? cfg.n : cfg.n_grid.back();
    if (n < 1) throw std::invalid_argument("config field 'n_grid'/'n': missing");

    MtSumsResult result;
    result.n = n;
    // Martingale-transform normalization: a_n for heavy tails (stable limit),
    // sqrt(n) in the finite-variance regime (CLT).
    result.scale = model.heavy_tailed() && model.square_tail_index() < 2.0
                       ? model.normalizing_a_n(n)
                       : std::sqrt(static_cast<double>(n));
    result.sums.resize(reps, d);
    std::vector<double> min_g(reps, std::numeric_limits<double>::infinity());

    parallel_for(reps, cfg.threads, [&](long r) {
        const SeedSpec seed{cfg.base_seed, static_cast<std::uint64_t>(r)};
        const GarchPath path = simulate(cfg.theta0, model, n, cfg.burn_in, seed);
        const FilterOutput st = stationary_filter(path, cfg.theta0);
        Eigen::VectorXd s = Eigen::VectorXd::Zero(d);
        double mg = std::numeric_limits<double>::infinity();
        for (long t = 0; t < n; ++t) {
            const Eigen::RowVectorXd g = st.grad.row(t) / path.sigma2[t];  // G_t
            const double y = 0.5 * (path.z[t] * path.z[t] - 1.0);          // Y_t
            s += (g * y).transpose();
            mg = std::min(mg, g.cwiseAbs().sum());
        }
        result.sums.row(r) = s.transpose() / result.scale;
        min_g[r] = mg;
    });

    result.min_g_l1 = *std::min_element(min_g.begin(), min_g.end());
    for (int c = 0; c < d; ++c) {
        const Eigen::VectorXd col = result.sums.col(c).cwiseAbs();
        std::vector<double> v(col.data(), col.data() + col.size());
        result.hill_per_component.push_back(hill(v, default_hill_k(reps)));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Sandwich matrices

SandwichResult run_sandwich(const ExperimentConfig& cfg) {
    cfg.validate();
    const InnovationModel model = cfg.innovation();
    if (!std::isfinite(model.fourth_moment()))
        throw std::invalid_argument("sandwich requires EZ^4 < infinity; " + model.name() +
                                    " has EZ^4 = infinity");
    require_stationary(cfg);
    const long n = cfg.n > 0 ? cfg.n : (cfg.n_grid.empty() ? 100000 : cfg.n_grid.back());
    const int d = cfg.theta0.dim();

    const GarchPath path = simulate(cfg.theta0, model, n, cfg.burn_in, SeedSpec{cfg.base_seed, 0});
    const FilterOutput st = stationary_filter(path, cfg.theta0);

    Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(d, d);
    double z4 = 0.0;
    for (long t = 0; t < n; ++t) {
        const Eigen::RowVectorXd g = st.grad.row(t) / path.sigma2[t];  // h'_t / sigma_t^2
        outer += g.transpose() * g;
        z4 += std::pow(path.z[t], 4);
    }
    outer /= static_cast<double>(n);
    z4 /= static_cast<double>(n);

    SandwichResult res;
    res.ez4_hat = z4;
    res.a0 = 0.25 * (z4 - 1.0) * outer;
    res.b0 = -0.5 * outer;
    const Eigen::MatrixXd b0_inv = res.b0.inverse();
    res.sandwich = b0_inv * res.a0 * b0_inv;
    return res;
}

// ---------------------------------------------------------------------------
// SRE check and equivalence oracle

double sre_equivalence_max_rel_err(const GarchParams& theta0, const InnovationModel& model,
                                   long steps, const SeedSpec& seed) {
    const SreSystem sys = build_sre(theta0);
    const GarchParams& th = sys.theta0;  // padded
    const int p = sys.p, q = sys.q;
    const int d = p + q + 1;
    const long warmup = 200;
    const long total = warmup + steps;

    std::vector<double> z = model.sample(total, seed);

    // Direct recursions, indexed by time u = 1..total+1 (index 0 = presample).
    // sig2[u], x2[u], dh[u] (row of d entries). Presample: fixed point, zero
    // X, exact fixed-point derivative.
    const double bsum = th.beta_sum();
    const double s0 = th.alpha[0] / (1.0 - bsum);
    std::vector<double> sig2(total + 2, s0), x2(total + 2, 0.0);
    std::vector<std::vector<double>> dh(total + 2, std::vector<double>(d, 0.0));
    for (long u = 0; u <= total + 1; ++u) {
        dh[u][0] = 1.0 / (1.0 - bsum);
        for (int k = 1; k <= q; ++k) dh[u][p + k] = th.alpha[0] / ((1.0 - bsum) * (1.0 - bsum));
    }
    auto at = [&](const std::vector<double>& arr, long u) { return u >= 1 ? arr[u] : arr[0]; };
    for (long u = 1; u <= total + 1; ++u) {
        double s2 = th.alpha[0];
        for (int i = 1; i <= p; ++i) s2 += th.alpha[i] * (u - i >= 1 ? x2[u - i] : 0.0);
        for (int j = 1; j <= q; ++j) s2 += th.beta[j - 1] * at(sig2, u - j);
        sig2[u] = s2;
        if (u <= total) x2[u] = z[u - 1] * z[u - 1] * s2;
        std::vector<double>& g = dh[u];
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = 1.0;
        for (int i = 1; i <= p; ++i) g[i] = (u - i >= 1 ? x2[u - i] : 0.0);
        for (int k = 1; k <= q; ++k) g[p + k] = at(sig2, u - k);
        for (int j = 1; j <= q; ++j) {
            const auto& prev = u - j >= 1 ? dh[u - j] : dh[0];
            for (int c = 0; c < d; ++c) g[c] += th.beta[j - 1] * prev[c];
        }
    }

    auto state_at = [&](long t) {
        Eigen::VectorXd y(sys.dim);
        int k = 0;
        for (int j = 0; j < q; ++j) y(k++) = at(sig2, t + 1 - j);
        for (int i = 0; i < p - 1; ++i) y(k++) = (t - i >= 1 ? x2[t - i] : 0.0);
        for (int c = 0; c < d; ++c)
            for (int j = 0; j < q; ++j) y(k++) = (t + 1 - j >= 1 ? dh[t + 1 - j] : dh[0])[c];
        return y;
    };

    const Eigen::VectorXd y0 = state_at(warmup);
    const std::vector<double> z_tail(z.begin() + warmup, z.end());
    const auto traj = iterate_sre(sys, z_tail, y0);

    double max_rel = 0.0;
    for (long s = 0; s < steps; ++s) {
        const Eigen::VectorXd direct = state_at(warmup + 1 + s);
        for (int i = 0; i < sys.dim; ++i) {
            const double a = traj[s](i), b = direct(i);
            const double denom = std::max(std::abs(b), 1e-300);
            max_rel = std::max(max_rel, std::abs(a - b) / denom);
        }
    }
    return max_rel;
}

SreCheckResult run_sre_check(const ExperimentConfig& cfg) {
    cfg.validate();
    const InnovationModel model = cfg.innovation();
    const SreSystem sys = build_sre(cfg.theta0);

    SreCheckResult res;
    res.dim = sys.dim;
    res.spectral_radius_p0 = spectral_radius(sys.p_of(0.0));
    res.lyapunov = top_lyapunov([&sys](double zv) { return sys.p_of(zv); }, model,
                                cfg.lyapunov_horizon, cfg.lyapunov_reps,
                                SeedSpec{cfg.base_seed, 1});
    const std::vector<double> s_grid{0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0};
    const std::vector<long> t_grid{50, 100, 200, 400, 800};
    res.moment_decay =
        moment_decay_check([&sys](double zv) { return sys.p_of(zv); }, model, s_grid, t_grid,
                           std::max(cfg.lyapunov_reps, 100), SeedSpec{cfg.base_seed, 2});
    res.equivalence_max_rel_err =
        sre_equivalence_max_rel_err(cfg.theta0, model, 500, SeedSpec{cfg.base_seed, 3});
    return res;
}

}  // namespace garchlab
