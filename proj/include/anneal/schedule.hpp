#pragma once

#include <cmath>
#include <stdexcept>

namespace anneal {

// Logarithmic cooling schedule beta(t) = log(e^{c*beta0} + t) / c.
// Stored and evaluated in log space so that large c*beta0 never overflows:
// beta(t) = beta0 + log1p(t * e^{-c*beta0}) / c.
struct CoolingSchedule {
    double c;
    double beta0;

    CoolingSchedule(double c_, double beta0_) : c(c_), beta0(beta0_) {
        if (!(c > 0.0)) throw std::invalid_argument("CoolingSchedule: c must be > 0");
        if (!(beta0 > 0.0)) throw std::invalid_argument("CoolingSchedule: beta0 must be > 0");
    }

    double beta(double t) const {
        if (!(t >= 0.0)) throw std::invalid_argument("beta: t must be >= 0");
        double w = std::exp(-c * beta0);
        return beta0 + std::log1p(t * w) / c;
    }

    double beta_prime(double t) const {
        if (!(t >= 0.0)) throw std::invalid_argument("beta_prime: t must be >= 0");
        double w = std::exp(-c * beta0);
        return w / (c * (1.0 + t * w));
    }

    // inverse of beta: time at which the schedule reaches inverse temperature b
    double time_at_beta(double b) const {
        if (!(b >= beta0)) throw std::invalid_argument("time_at_beta: b must be >= beta0");
        return std::exp(c * beta0) * std::expm1(c * (b - beta0));
    }
};

} // namespace anneal
