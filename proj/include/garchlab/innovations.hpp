#pragma once

#include <span>
#include <string>
#include <vector>

#include "garchlab/rng.hpp"

namespace garchlab {

enum class Family { Gaussian, StudentT, ParetoHybrid };

// Standardized innovation law: EZ = 0, EZ^2 = 1, with a known regular
// variation index for Z^2. All three families have a Lebesgue density that
// is positive in a neighborhood of the origin.
//
// StudentT(nu) is the t distribution rescaled by sqrt((nu-2)/nu) so the
// variance is exactly 1 (requires nu > 2); Z^2 then has tail index nu/2.
//
// ParetoHybrid(alpha_tail) has a symmetric density that is uniform on
// [-x0, x0] and proportional to |x|^(-2*alpha_tail-1) outside, continuous at
// +-x0, with x0 solved so that the variance is 1. Its Z^2 tail is exactly
// Pareto beyond x0^2, P(Z^2 > y) = K y^(-alpha_tail), which makes the
// normalizing sequence a_n available in closed form.
class InnovationModel {
  public:
    static InnovationModel gaussian();
    static InnovationModel student_t(double nu);        // nu > 2
    static InnovationModel pareto_hybrid(double alpha_tail);  // alpha_tail > 1

    Family family() const { return family_; }
    double nu() const { return nu_; }
    double alpha_tail() const { return alpha_tail_; }
    double x0() const { return x0_; }
    std::string name() const;

    // Tail index of Z^2: nu/2 for StudentT, alpha_tail for ParetoHybrid,
    // +infinity for Gaussian.
    double square_tail_index() const;
    bool heavy_tailed() const;

    double tail_prob_z2(double y) const;   // P(Z^2 > y)
    double quantile_abs(double prob) const;  // prob-quantile of |Z|

    // a_n solving P(Z^2 > a_n) = 1/n; closed form for ParetoHybrid,
    // bisection on the exact tail function otherwise. Throws for Gaussian.
    double normalizing_a_n(long n) const;

    // E Z^4; +infinity when the fourth moment does not exist.
    double fourth_moment() const;

    void sample(std::span<double> out, std::mt19937_64& eng) const;
    std::vector<double> sample(long n, const SeedSpec& seed) const;

  private:
    InnovationModel() = default;

    Family family_ = Family::Gaussian;
    double nu_ = 0.0;
    double alpha_tail_ = 0.0;
    // ParetoHybrid shape constants (derived from alpha_tail).
    double x0_ = 0.0;        // uniform/Pareto breakpoint
    double c0_ = 0.0;        // density level on [-x0, x0]
    double tail_mass_ = 0.0; // per-side mass beyond x0
};

InnovationModel make_innovation(const std::string& family, double param);

}  // namespace garchlab
