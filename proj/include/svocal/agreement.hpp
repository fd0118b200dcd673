#pragma once

#include <optional>
#include <string>
#include <vector>

#include "svocal/metrics.hpp"

namespace svocal {

struct AgreementReport {
    std::optional<double> kappa;
    std::optional<double> soft_kappa;
    std::optional<double> krippendorff_alpha;
    std::size_t n_items = 0;
};

struct CorrelationReport {
    double rho = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    // Exact permutation p, available for n <= 9.
    std::optional<double> p_exact;
};

// Weighted agreement form when a matrix is given: each pair contributes
// weight(a_i, b_i) to observed agreement and chance agreement sums over the
// product of marginals.
double cohen_kappa(const std::vector<std::string>& a,
                   const std::vector<std::string>& b,
                   const WeightMatrix* weights = nullptr);

// Interval-distance alpha over an items x annotators grid; missing cells are
// std::nullopt. Items with fewer than two values are skipped.
double krippendorff_alpha_interval(
    const std::vector<std::vector<std::optional<double>>>& grid);

// Average ranks for ties, Pearson on ranks; two-sided p from the t
// approximation with n-2 degrees of freedom, plus the exact permutation p
// when n is small enough to enumerate.
CorrelationReport spearman_rho(const std::vector<double>& x,
                               const std::vector<double>& y);

}  // namespace svocal
