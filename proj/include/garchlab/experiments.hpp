#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "garchlab/qmle.hpp"
#include "garchlab/sre.hpp"
#include "garchlab/tails.hpp"

namespace garchlab {

// Flat key-value experiment configuration (dotted section names, `key = value`
// lines, # comments, [..] numeric lists). See README for the full schema.
struct ExperimentConfig {
    std::string kind;
    GarchParams theta0;
    std::string innovation_family = "gaussian";
    double innovation_param = 0.0;  // nu or alpha_tail
    std::vector<long> n_grid;
    int replications = 200;
    long burn_in = kDefaultBurnIn;
    CompactSetK K;
    FitOptions optimizer;
    std::uint64_t base_seed = 1;
    std::string out = "out";
    int threads = 0;  // 0 = hardware concurrency
    bool force = false;

    long n = 0;             // simulate / sandwich length override
    std::string data;       // input file for fit / tails
    long tails_k = 0;       // 0 = default_hill_k
    long block_len = 100;
    double threshold_quantile = 0.99;
    long lyapunov_horizon = 2000;
    int lyapunov_reps = 50;

    InnovationModel innovation() const;
    void validate() const;  // throws std::invalid_argument naming the offending field
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);

// ---------------------------------------------------------------------------

struct RateRow {
    long n = 0;
    int replicate = 0;
    bool converged = false;
    GarchParams theta_hat;
    Eigen::VectorXd error;  // theta_hat - theta0
    double x_n = 0.0;       // n/a_n, or sqrt(n) for light tails
    double runtime_ms = 0.0;
};

struct RateResult {
    std::vector<RateRow> rows;
    std::vector<long> n_values;
    std::vector<double> median_err;  // per n, median of |theta_hat - theta0|_inf
    std::optional<double> slope;     // log-log regression slope
    double slope_std_err = 0.0;
    long failed_fits = 0;
};

RateResult run_rate_experiment(const ExperimentConfig& cfg);

struct StableLimitResult {
    long n = 0;
    double scale = 0.0;                      // x_n or sqrt(n)
    Eigen::MatrixXd standardized_errors;     // replicates x (p+q+1)
    std::vector<TailReport> hill_per_component;
    std::vector<double> pair_sum_hill;       // Hill on sums of replicate pairs
    std::vector<double> kurtosis;            // per component
    long failed_fits = 0;
};

StableLimitResult run_stable_limit(const ExperimentConfig& cfg);

struct MtSumsResult {
    long n = 0;
    double scale = 0.0;
    Eigen::MatrixXd sums;  // replicates x (p+q+1), a_n^-1 sum G_t Y_t
    std::vector<TailReport> hill_per_component;
    double min_g_l1 = 0.0;  // min over all paths and t of |G_t|_1
};

MtSumsResult run_mt_sums(const ExperimentConfig& cfg);

struct SandwichResult {
    Eigen::MatrixXd a0;
    Eigen::MatrixXd b0;
    Eigen::MatrixXd sandwich;  // B0^-1 A0 B0^-1
    double ez4_hat = 0.0;
};

SandwichResult run_sandwich(const ExperimentConfig& cfg);

struct SreCheckResult {
    int dim = 0;
    double spectral_radius_p0 = 0.0;
    LyapunovEstimate lyapunov;
    std::optional<MomentDecayResult> moment_decay;
    double equivalence_max_rel_err = 0.0;
};

SreCheckResult run_sre_check(const ExperimentConfig& cfg);

// Direct-recursion oracle for the SRE embedding: runs the plain GARCH and
// gradient recursions (no SRE code) and returns the max relative deviation
// against iterate_sre over `steps` steps.
double sre_equivalence_max_rel_err(const GarchParams& theta0, const InnovationModel& model,
                                   long steps, const SeedSpec& seed);

// ---------------------------------------------------------------------------

// CLI entry point used by tools/garchlab.cpp; exit 0 success, 1 validation
// error, 2 runtime failure.
int cli_main(int argc, char** argv);

// Deterministic "%.17g" formatting used by every output writer.
std::string fmt17(double v);

// Runs fn(0..n_items-1) on a worker pool; per-item work must be independent
// and index-seeded so results do not depend on the thread count.
void parallel_for(long n_items, int threads, const std::function<void(long)>& fn);

}  // namespace garchlab
