#include "garchlab/innovations.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace garchlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

InnovationModel InnovationModel::gaussian() {
    InnovationModel m;
    m.family_ = Family::Gaussian;
    return m;
}

InnovationModel InnovationModel::student_t(double nu) {
    if (!(nu > 2.0))
        throw std::invalid_argument("StudentT requires nu > 2, got " + std::to_string(nu));
    InnovationModel m;
    m.family_ = Family::StudentT;
    m.nu_ = nu;
    return m;
}

InnovationModel InnovationModel::pareto_hybrid(double alpha_tail) {
    if (!(alpha_tail > 1.0))
        throw std::invalid_argument("ParetoHybrid requires alpha_tail > 1, got " +
                                    std::to_string(alpha_tail));
    InnovationModel m;
    m.family_ = Family::ParetoHybrid;
    m.alpha_tail_ = alpha_tail;
    // Density: c0 on [-x0, x0], c0 * (x/x0)^(-2a-1) for |x| > x0.
    // Unit mass fixes c0 = a / (x0 (2a+1)); unit variance fixes x0.
    const double a = alpha_tail;
    m.x0_ = std::sqrt((2.0 * a + 1.0) / (a * (2.0 / 3.0 + 1.0 / (a - 1.0))));
    m.c0_ = a / (m.x0_ * (2.0 * a + 1.0));
    m.tail_mass_ = 0.5 / (2.0 * a + 1.0);
    return m;
}

std::string InnovationModel::name() const {
    switch (family_) {
        case Family::Gaussian: return "gaussian";
        case Family::StudentT: return "student_t(" + std::to_string(nu_) + ")";
        case Family::ParetoHybrid: return "pareto_hybrid(" + std::to_string(alpha_tail_) + ")";
    }
    return "?";
}

double InnovationModel::square_tail_index() const {
    switch (family_) {
        case Family::Gaussian: return kInf;
        case Family::StudentT: return nu_ / 2.0;
        case Family::ParetoHybrid: return alpha_tail_;
    }
    return kInf;
}

bool InnovationModel::heavy_tailed() const { return std::isfinite(square_tail_index()); }

double InnovationModel::tail_prob_z2(double y) const {
    if (y <= 0.0) return 1.0;
    const double s = std::sqrt(y);
    switch (family_) {
        case Family::Gaussian: {
            boost::math::normal_distribution<double> d;
            return 2.0 * boost::math::cdf(boost::math::complement(d, s));
        }
        case Family::StudentT: {
            boost::math::students_t_distribution<double> d(nu_);
            const double t = s / std::sqrt((nu_ - 2.0) / nu_);
            return 2.0 * boost::math::cdf(boost::math::complement(d, t));
        }
        case Family::ParetoHybrid: {
            if (s >= x0_) {
                // 2 * integral_s^inf c0 (x/x0)^(-2a-1) dx = (1/(2a+1)) (s/x0)^(-2a)
                return std::pow(s / x0_, -2.0 * alpha_tail_) / (2.0 * alpha_tail_ + 1.0);
            }
            return 1.0 - 2.0 * c0_ * s;
        }
    }
    return 0.0;
}

double InnovationModel::quantile_abs(double prob) const {
    if (!(prob > 0.0 && prob < 1.0)) throw std::invalid_argument("quantile_abs: prob in (0,1)");
    switch (family_) {
        case Family::Gaussian: {
            boost::math::normal_distribution<double> d;
            return boost::math::quantile(d, 0.5 * (1.0 + prob));
        }
        case Family::StudentT: {
            boost::math::students_t_distribution<double> d(nu_);
            return boost::math::quantile(d, 0.5 * (1.0 + prob)) * std::sqrt((nu_ - 2.0) / nu_);
        }
        case Family::ParetoHybrid: {
            const double tail = 1.0 - prob;  // P(|Z| > x)
            if (tail <= 2.0 * tail_mass_)
                return x0_ * std::pow(tail * (2.0 * alpha_tail_ + 1.0), -0.5 / alpha_tail_);
            return (1.0 - tail) / (2.0 * c0_);
        }
    }
    return 0.0;
}

double InnovationModel::normalizing_a_n(long n) const {
    if (family_ == Family::Gaussian)
        throw std::domain_error("normalizing_a_n: Gaussian innovations have no heavy-tail "
                                "normalization; use sqrt(n)");
    if (n < 2) throw std::invalid_argument("normalizing_a_n: n >= 2 required");
    const double target = 1.0 / static_cast<double>(n);
    if (family_ == Family::ParetoHybrid) {
        // Exact tail K y^(-a) beyond x0^2 with K = x0^(2a)/(2a+1).
        const double a = alpha_tail_;
        const double K = std::pow(x0_, 2.0 * a) / (2.0 * a + 1.0);
        const double y = std::pow(K * n, 1.0 / a);
        if (y >= x0_ * x0_) return y;
        // Very small n: invert the uniform part, P(Z^2 > y) = 1 - 2 c0 sqrt(y).
        const double s = (1.0 - target) / (2.0 * c0_);
        return s * s;
    }
    // Monotone tail; bisect on [1, 1e15].
    double lo = 1.0, hi = 1e15;
    if (tail_prob_z2(lo) < target) {
        // a_n below 1: widen downward.
        lo = 1e-12;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (tail_prob_z2(mid) > target)
            lo = mid;
        else
            hi = mid;
        if ((hi - lo) <= 1e-10 * hi) break;
    }
    return 0.5 * (lo + hi);
}

double InnovationModel::fourth_moment() const {
    switch (family_) {
        case Family::Gaussian: return 3.0;
        case Family::StudentT:
            return (nu_ > 4.0) ? 3.0 * (nu_ - 2.0) / (nu_ - 4.0) : kInf;
        case Family::ParetoHybrid: {
            const double a = alpha_tail_;
            if (!(a > 2.0)) return kInf;
            // E Z^4 = 2 c0 x0^5 / 5 + 2 c0 x0^5 / (2a - 4)
            return c0_ * std::pow(x0_, 5) * (2.0 / 5.0 + 1.0 / (a - 2.0));
        }
    }
    return kInf;
}

void InnovationModel::sample(std::span<double> out, std::mt19937_64& eng) const {
    switch (family_) {
        case Family::Gaussian: {
            std::normal_distribution<double> d(0.0, 1.0);
            for (double& v : out) v = d(eng);
            break;
        }
        case Family::StudentT: {
            std::student_t_distribution<double> d(nu_);
            const double scale = std::sqrt((nu_ - 2.0) / nu_);
            for (double& v : out) v = scale * d(eng);
            break;
        }
        case Family::ParetoHybrid: {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            const double pt = tail_mass_;
            for (double& v : out) {
                double w = u(eng);
                // Guard the open endpoints so the Pareto inverse stays finite.
                if (w <= 0.0) w = std::numeric_limits<double>::min();
                if (w < pt) {
                    v = -x0_ * std::pow(w / pt, -0.5 / alpha_tail_);
                } else if (w >= 1.0 - pt) {
                    double r = 1.0 - w;
                    if (r <= 0.0) r = std::numeric_limits<double>::min();
                    v = x0_ * std::pow(r / pt, -0.5 / alpha_tail_);
                } else {
                    v = -x0_ + 2.0 * x0_ * (w - pt) / (1.0 - 2.0 * pt);
                }
            }
            break;
        }
    }
}

std::vector<double> InnovationModel::sample(long n, const SeedSpec& seed) const {
    if (n < 1) throw std::invalid_argument("sample: n >= 1 required");
    std::vector<double> out(static_cast<std::size_t>(n));
    auto eng = make_engine(seed);
    sample(std::span<double>(out), eng);
    return out;
}

InnovationModel make_innovation(const std::string& family, double param) {
    if (family == "gaussian") return InnovationModel::gaussian();
    if (family == "student_t") return InnovationModel::student_t(param);
    if (family == "pareto_hybrid") return InnovationModel::pareto_hybrid(param);
    throw std::invalid_argument("unknown innovation family: " + family);
}

}  // namespace garchlab
