#include "svocal/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "svocal/errors.hpp"

namespace svocal {

double cohen_kappa(const std::vector<std::string>& a,
                   const std::vector<std::string>& b,
                   const WeightMatrix* weights) {
    if (a.size() != b.size()) throw ContractError("label sequences differ in length");
    if (a.empty()) throw ContractError("empty label sequences");

    const double n = static_cast<double>(a.size());
    std::map<std::string, double> marg_a, marg_b;
    double observed = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        observed += weights ? weights->weight(a[i], b[i]) : (a[i] == b[i] ? 1.0 : 0.0);
        marg_a[a[i]] += 1.0;
        marg_b[b[i]] += 1.0;
    }
    double p_o = observed / n;

    double p_e = 0.0;
    for (const auto& [ca, na] : marg_a) {
        for (const auto& [cb, nb] : marg_b) {
            double w = weights ? weights->weight(ca, cb) : (ca == cb ? 1.0 : 0.0);
            p_e += w * (na / n) * (nb / n);
        }
    }

    if (std::abs(1.0 - p_e) < 1e-12) {
        // Chance agreement saturates; by convention perfect observed
        // agreement is 1, anything else 0.
        return std::abs(1.0 - p_o) < 1e-12 ? 1.0 : 0.0;
    }
    return (p_o - p_e) / (1.0 - p_e);
}

double krippendorff_alpha_interval(
    const std::vector<std::vector<std::optional<double>>>& grid) {
    double n = 0.0;      // pairable values
    double s = 0.0;      // sum of pairable values
    double ss = 0.0;     // sum of squares
    double d_o_sum = 0.0;
    for (const auto& unit : grid) {
        std::vector<double> values;
        for (const auto& cell : unit) {
            if (cell) values.push_back(*cell);
        }
        const double m = static_cast<double>(values.size());
        if (m < 2.0) continue;
        double su = 0.0, ssu = 0.0;
        for (double v : values) {
            su += v;
            ssu += v * v;
        }
        // Sum over ordered pairs i != j of (x_i - x_j)^2.
        double pair_sum = 2.0 * (m * ssu - su * su);
        d_o_sum += pair_sum / (m - 1.0);
        n += m;
        s += su;
        ss += ssu;
    }
    if (n < 2.0) throw ContractError("fewer than 2 pairable values");

    double d_o = d_o_sum / n;
    double d_e = 2.0 * (n * ss - s * s) / (n * (n - 1.0));
    if (d_e < 1e-15) return 1.0;
    return 1.0 - d_o / d_e;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx;
        double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0)
        throw ContractError("zero rank variance, correlation undefined");
    return sxy / std::sqrt(sxx * syy);
}

double t_approx_p(double rho, std::size_t n) {
    double denom = 1.0 - rho * rho;
    if (denom <= 0.0) return 0.0;
    double df = static_cast<double>(n - 2);
    double t = rho * std::sqrt(df / denom);
    boost::math::students_t dist(df);
    double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    return std::min(1.0, p);
}

double permutation_p(const std::vector<double>& rx, std::vector<double> ry,
                     double rho_obs) {
    std::sort(ry.begin(), ry.end());
    std::size_t total = 0, at_least = 0;
    const double tol = 1e-12;
    do {
        ++total;
        if (std::abs(pearson(rx, ry)) >= std::abs(rho_obs) - tol) ++at_least;
    } while (std::next_permutation(ry.begin(), ry.end()));
    return static_cast<double>(at_least) / static_cast<double>(total);
}

}  // namespace

CorrelationReport spearman_rho(const std::vector<double>& x,
                               const std::vector<double>& y) {
    if (x.size() != y.size()) throw ContractError("value sequences differ in length");
    if (x.size() < 3) throw ContractError("need at least 3 pairs");

    std::vector<double> rx = average_ranks(x);
    std::vector<double> ry = average_ranks(y);
    CorrelationReport report;
    report.n = x.size();
    report.rho = pearson(rx, ry);
    report.p_value = t_approx_p(report.rho, report.n);
    if (x.size() <= 9) {
        report.p_exact = permutation_p(rx, ry, report.rho);
    }
    return report;
}

}  // namespace svocal
