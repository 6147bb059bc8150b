// Acceptance gate: one pass/fail line per criterion, exit nonzero on any
// failure. Heavy Monte Carlo lives here, not in the unit tests.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "garchlab/experiments.hpp"
#include "garchlab/filter.hpp"

using namespace garchlab;

namespace {

int g_failures = 0;

void report(int id, bool pass, const std::string& name, const std::string& detail) {
    std::printf("ACCEPTANCE %2d: %s - %s (%s)\n", id, pass ? "PASS" : "FAIL", name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

GarchParams random_theta(std::mt19937_64& eng) {
    std::uniform_int_distribution<int> pq(1, 3);
    std::uniform_real_distribution<double> ua(0.02, 0.15);
    GarchParams th;
    th.alpha = {0.1 + 0.3 * ua(eng)};
    const int p = pq(eng), q = pq(eng);
    for (int i = 0; i < p; ++i) th.alpha.push_back(ua(eng));
    double bsum = 0.0;
    for (int j = 0; j < q; ++j) {
        double b = std::uniform_real_distribution<double>(0.05, 0.4)(eng);
        if (bsum + b > 0.7) b = 0.05;
        th.beta.push_back(b);
        bsum += b;
    }
    return th;
}

std::vector<double> random_series(std::mt19937_64& eng, long n) {
    std::normal_distribution<double> g;
    std::vector<double> x(n);
    for (auto& v : x) v = g(eng);
    return x;
}

std::string num(double v) { return fmt17(v); }

void criterion_1() {
    std::mt19937_64 eng(1001);
    double worst = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
        const auto th = random_theta(eng);
        const auto x = random_series(eng, 200);
        const auto h = filter_h(x, th);
        for (long t = 1; t <= 200; ++t) {
            const double hp = h_hat_via_psi(x, th, t);
            worst = std::max(worst, std::abs(h[t - 1] - hp) / hp);
        }
    }
    report(1, worst <= 1e-10, "filter recursion equals psi-series expansion",
           "max rel dev " + num(worst) + " over 100 instances");
}

void criterion_2() {
    std::mt19937_64 eng(1002);
    double worst_fd = 0.0, worst_id = 0.0;
    bool nonneg = true;
    for (int inst = 0; inst < 50; ++inst) {
        const auto th = random_theta(eng);
        const auto x = random_series(eng, 120);
        const auto out = filter_gradient(x, th);
        const Eigen::VectorXd theta = pack_theta(th);
        for (int c = 0; c < th.dim(); ++c) {
            const double step = 1e-6 * (1.0 + std::abs(theta(c)));
            Eigen::VectorXd tp = theta, tm = theta;
            tp(c) += step;
            tm(c) -= step;
            const auto hp = filter_h(x, unpack_theta(tp, th.p(), th.q()));
            const auto hm = filter_h(x, unpack_theta(tm, th.p(), th.q()));
            for (long t = 0; t < 120; ++t) {
                const double fd = (hp[t] - hm[t]) / (2.0 * step);
                const double an = out.grad(t, c);
                worst_fd = std::max(worst_fd,
                                    std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6}));
            }
        }
        for (long t = 0; t < 120; ++t) {
            double s = 0.0;
            for (int i = 0; i <= th.p(); ++i) {
                s += th.alpha[i] * out.grad(t, i);
                if (out.grad(t, i) < 0.0) nonneg = false;
            }
            worst_id = std::max(worst_id, std::abs(s - out.h[t]) / out.h[t]);
        }
    }
    const bool pass = worst_fd < 1e-5 && worst_id <= 1e-10 && nonneg;
    report(2, pass, "filter gradient: finite differences, alpha identity, nonnegativity",
           "fd " + num(worst_fd) + ", identity " + num(worst_id) +
               (nonneg ? ", all dh/dalpha >= 0" : ", NEGATIVE dh/dalpha found"));
}

void criterion_3() {
    std::mt19937_64 eng(1003);
    double worst = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
        const auto th = random_theta(eng);
        const auto model =
            inst % 2 == 0 ? InnovationModel::gaussian() : InnovationModel::student_t(3.0);
        worst = std::max(worst, sre_equivalence_max_rel_err(
                                    th, model, 500, SeedSpec{1003, static_cast<std::uint64_t>(inst)}));
    }
    report(3, worst <= 1e-9, "SRE embedding equals direct recursions over 500 steps",
           "max rel dev " + num(worst) + " over 20 random theta");
}

void criterion_4() {
    bool grid_ok = true;
    for (int g = 0; g < 50; ++g) {
        const double bsum = 0.02 + g * (1.3 - 0.02) / 49.0;
        const GarchParams th{{0.1, 0.1, 0.05}, {0.6 * bsum, 0.4 * bsum}};
        const double rho = spectral_radius(build_sre(th).m1(0.0));
        if ((rho < 1.0) != (bsum < 1.0)) grid_ok = false;
    }

    const GarchParams th{{0.1, 0.1}, {0.8}};
    const auto sys = build_sre(th);
    bool lyap_ok = true;
    std::string lyap_detail;
    for (const auto& model : {InnovationModel::gaussian(), InnovationModel::student_t(3.0)}) {
        const auto est = top_lyapunov([&sys](double z) { return sys.p_of(z); }, model, 2000, 50,
                                      SeedSpec{1004, 0});
        if (!(est.rho_hat + 3.0 * est.std_err < 0.0)) lyap_ok = false;
        lyap_detail += model.name() + " rho " + num(est.rho_hat) + " se " + num(est.std_err) + "; ";
    }

    // Sign test on block-triangular systems: the top Lyapunov coefficient of
    // [[A, C], [0, B]] is the max of the block coefficients; coupling C must
    // not change the sign.
    bool block_ok = true;
    for (const double top : {0.3, 1.4}) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
        m.topLeftCorner(2, 2) = top * Eigen::MatrixXd::Identity(2, 2);
        m.bottomRightCorner(2, 2) = 0.7 * Eigen::MatrixXd::Identity(2, 2);
        m(0, 2) = 0.25;
        const auto est = top_lyapunov([&m](double) { return m; }, InnovationModel::gaussian(),
                                      1000, 3, SeedSpec{1005, 0});
        const double expect = std::log(std::max(top, 0.7));
        if (std::abs(est.rho_hat - expect) > 0.01) block_ok = false;
        if ((est.rho_hat < 0.0) != (expect < 0.0)) block_ok = false;
    }

    report(4, grid_ok && lyap_ok && block_ok, "spectral radius grid, negative rho, block sign test",
           std::string(grid_ok ? "grid ok; " : "grid FAIL; ") + lyap_detail +
               (block_ok ? "blocks ok" : "blocks FAIL"));
}

ExperimentConfig rate_config(const std::string& family) {
    // Moderate persistence: at alpha_1 + beta_1 = 0.9 the finite-sample bias
    // at n = 2000 inflates the small-n median and steepens the fitted slope
    // past -0.55 for most seeds; at 0.7 the asymptotic rate shows cleanly.
    auto cfg = parse_config(
        "kind = rate\n"
        "theta0.alpha = [0.2, 0.2]\n"
        "theta0.beta = [0.5]\n"
        "n_grid = [2000, 8000, 32000]\n"
        "replications = 200\n"
        "base_seed = 3\n"
        "threads = 0\n");
    cfg.innovation_family = family;
    if (family == "student_t") cfg.innovation_param = 3.0;
    return cfg;
}

double g_gaussian_slope = 0.0;

void criterion_5() {
    const auto res = run_rate_experiment(rate_config("gaussian"));
    const double slope = res.slope.value_or(0.0);
    g_gaussian_slope = slope;
    report(5, slope >= -0.55 && slope <= -0.45, "gaussian rate: log-log slope near -1/2",
           "slope " + num(slope) + " se " + num(res.slope_std_err) + ", failed fits " +
               std::to_string(res.failed_fits));
}

void criterion_6() {
    const auto res = run_rate_experiment(rate_config("student_t"));
    const double slope = res.slope.value_or(0.0);
    const bool pass = slope >= -0.43 && slope <= -0.23 && slope > g_gaussian_slope;
    report(6, pass, "student t(3) rate: shallower slope near -1/3",
           "slope " + num(slope) + " vs gaussian " + num(g_gaussian_slope) + ", failed fits " +
               std::to_string(res.failed_fits));
}

void criterion_7() {
    auto cfg = parse_config(
        "kind = stable-limit\n"
        "theta0.alpha = [0.1, 0.1]\n"
        "theta0.beta = [0.8]\n"
        "innovation.family = student_t\n"
        "innovation.nu = 3\n"
        "n_grid = [32000]\n"
        "replications = 500\n"
        "base_seed = 20240502\n");
    const auto heavy = run_stable_limit(cfg);
    const double alpha1_hill = heavy.hill_per_component[1].alpha_hat;

    auto gcfg = parse_config(
        "kind = stable-limit\n"
        "theta0.alpha = [0.1, 0.1]\n"
        "theta0.beta = [0.8]\n"
        "innovation.family = gaussian\n"
        "n_grid = [8000]\n"
        "replications = 500\n"
        "base_seed = 20240503\n");
    const auto light = run_stable_limit(gcfg);
    const double kurt = light.kurtosis[1];

    const bool pass = alpha1_hill >= 1.2 && alpha1_hill <= 1.8 && kurt >= 2.5 && kurt <= 3.5;
    report(7, pass, "stable limit: hill index of alpha_1 errors; gaussian kurtosis control",
           "hill " + num(alpha1_hill) + " (k " + std::to_string(heavy.hill_per_component[1].k_used) +
               ", failed " + std::to_string(heavy.failed_fits) + "), gaussian kurtosis " +
               num(kurt));
}

void criterion_8() {
    auto cfg = parse_config(
        "kind = mt-sums\n"
        "theta0.alpha = [0.1, 0.1]\n"
        "theta0.beta = [0.8]\n"
        "innovation.family = student_t\n"
        "innovation.nu = 3\n"
        "n = 32000\n"
        "replications = 2000\n"  // Hill at k ~ 5% of a small replicate sample is
        "base_seed = 1\n");      // bias-dominated; 2000 draws stabilize it
    const auto res = run_mt_sums(cfg);
    const double h1 = res.hill_per_component[1].alpha_hat;
    const double bound = 1.0 / 0.1 - 1e-9;  // 1 / max alpha_i
    const bool pass = h1 >= 1.2 && h1 <= 1.8 && res.min_g_l1 >= bound;
    report(8, pass, "martingale transform sums: hill index and |G_t|_1 bound",
           "hill(alpha_1) " + num(h1) + ", min |G_t|_1 " + num(res.min_g_l1) + " >= " +
               num(bound));
}

void criterion_9() {
    // Breiman degenerate-eta identity on exact Pareto tails.
    auto eng = make_engine(SeedSpec{1009, 0});
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> xi(400000);
    for (auto& v : xi) v = std::pow(1.0 - u(eng), -1.0 / 1.5);
    std::vector<double> eta(xi.size(), 2.0);
    const std::vector<double> grid{4.0, 8.0, 16.0};
    const auto br = breiman_ratio(xi, eta, 1.5, grid);
    bool breiman_ok = std::abs(br.e_eta_alpha / std::pow(2.0, 1.5) - 1.0) < 1e-9;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (!br.defined[i] || std::abs(br.ratios[i] / std::pow(2.0, 1.5) - 1.0) > 0.05)
            breiman_ok = false;

    const auto hill_rep = hill(xi, 1000);
    const bool hill_ok = hill_rep.alpha_hat >= 1.35 && hill_rep.alpha_hat <= 1.65;

    // Quantile 0.999 keeps the per-block exceedance rate low enough for the
    // blocks estimator to be near-unbiased on independent data.
    std::vector<double> iid(xi.begin(), xi.begin() + 100000);
    const double g_iid = extremal_index_blocks(iid, 100, 0.999);
    std::vector<double> pairs(100000);
    for (std::size_t t = 0; t < pairs.size(); ++t) pairs[t] = std::max(xi[t], xi[t + 1]);
    const double g_pair = extremal_index_blocks(pairs, 100, 0.999);

    // gamma for |G_t Y_t| from a stationary GARCH path.
    const GarchParams th{{0.1, 0.1}, {0.8}};
    const auto path = simulate(th, InnovationModel::student_t(3.0), 100000, 2000,
                               SeedSpec{1009, 1});
    const auto st = stationary_filter(path, th);
    std::vector<double> gy(100000);
    for (long t = 0; t < 100000; ++t) {
        const double gl1 = st.grad.row(t).cwiseAbs().sum() / path.sigma2[t];
        gy[t] = gl1 * std::abs(0.5 * (path.z[t] * path.z[t] - 1.0));
    }
    const double g_gy = extremal_index_blocks(gy, 100, 0.99);

    const bool pass = breiman_ok && hill_ok && g_iid >= 0.85 && g_iid <= 1.0 && g_pair >= 0.4 &&
                      g_pair <= 0.6 && g_gy > 0.05;
    report(9, pass, "heavy-tail toolbox: breiman, hill, extremal indices",
           std::string(breiman_ok ? "breiman ok" : "breiman FAIL") + ", hill " +
               num(hill_rep.alpha_hat) + ", gamma iid " + num(g_iid) + ", pairs " + num(g_pair) +
               ", |G Y| " + num(g_gy));
}

void criterion_10() {
    auto cfg = parse_config(
        "kind = sandwich\n"
        "theta0.alpha = [0.1, 0.1]\n"
        "theta0.beta = [0.8]\n"
        "innovation.family = gaussian\n"
        "n = 200000\n"
        "base_seed = 20240505\n");
    const auto run1 = run_sandwich(cfg);
    cfg.base_seed = 20240506;
    const auto run2 = run_sandwich(cfg);

    const Eigen::MatrixXd rhs = -0.5 * (run1.ez4_hat - 1.0) * run1.b0;
    const bool identity_ok =
        (run1.a0 - rhs).cwiseAbs().maxCoeff() <= 1e-12 * run1.a0.cwiseAbs().maxCoeff();

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(run1.b0);
    const bool negdef = es.eigenvalues().maxCoeff() < 0.0;

    // Gaussian: E Z^4 = 3 so the sandwich collapses to -B0^{-1}; compare
    // across independent runs, 5% entrywise.
    const Eigen::MatrixXd target = -run2.b0.inverse();
    double worst = 0.0;
    for (int r = 0; r < target.rows(); ++r)
        for (int c = 0; c < target.cols(); ++c)
            worst = std::max(worst, std::abs(run1.sandwich(r, c) / target(r, c) - 1.0));

    const bool pass = identity_ok && negdef && worst < 0.05;
    report(10, pass, "sandwich identities and gaussian collapse",
           std::string(identity_ok ? "identity exact" : "identity FAIL") +
               (negdef ? ", B0 negative definite" : ", B0 NOT negative definite") +
               ", cross-run rel dev " + num(worst));
}

void criterion_11() {
    const std::string cli = GARCHLAB_CLI_PATH;
    std::ofstream("acc_det.cfg") << "theta0.alpha = [0.1, 0.1]\ntheta0.beta = [0.8]\n"
                                    "innovation.family = student_t\ninnovation.nu = 3\n"
                                    "n_grid = [1000]\nreplications = 8\nburn_in = 500\n"
                                    "base_seed = 77\nlyapunov.horizon = 300\n"
                                    "lyapunov.reps = 10\nout = acc_det_a.csv\nthreads = 1\n";
    auto run = [&cli](const std::string& args) {
        const int rc = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
        return WEXITSTATUS(rc);
    };
    auto slurp = [](const std::string& path) {
        std::ifstream in(path);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    bool pass = run("rate --config acc_det.cfg") == 0;
    pass = pass && run("rate --config acc_det.cfg --out acc_det_b.csv --threads 4") == 0;
    pass = pass && run("rate --config acc_det.cfg --out acc_det_c.csv --threads 2") == 0;
    const auto a = slurp("acc_det_a.csv");
    pass = pass && !a.empty() && a == slurp("acc_det_b.csv") && a == slurp("acc_det_c.csv");
    pass = pass && slurp("acc_det_a_summary.json") == slurp("acc_det_b_summary.json");

    pass = pass && run("sre-check --config acc_det.cfg --out acc_sre_a.json") == 0;
    pass = pass && run("sre-check --config acc_det.cfg --out acc_sre_b.json") == 0;
    const auto sa = slurp("acc_sre_a.json");
    pass = pass && !sa.empty() && sa == slurp("acc_sre_b.json");

    report(11, pass, "CLI determinism: byte-identical reruns at any thread count",
           pass ? "rate csv/json and sre-check json identical" : "outputs differ");
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    const double mins =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
    std::printf("acceptance: %d/11 criteria passed in %.1f min\n", 11 - g_failures, mins);
    return g_failures == 0 ? 0 : 1;
}
