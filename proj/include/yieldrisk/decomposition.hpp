#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "yieldrisk/estimation.hpp"

namespace yieldrisk {

struct PosteriorDraws;

/// Slots 0..4 are parcel, household, season, village, time; slot 5 is the
/// idiosyncratic variance.
using VarianceVector = std::array<double, 6>;

struct VarianceDecomposition {
    VarianceVector variances{};
    std::array<bool, 5> modeled{true, true, true, true, true};
    double total = 0.0;
    // icc[k]: share of the total from level k and every level nested inside it.
    std::array<double, 5> icc{};
    // shares[k]: variances[k] / total, idiosyncratic last.
    VarianceVector shares{};
    double covariate_share = 0.0;          // season + village + time
    double idiosyncratic_side_share = 0.0;  // parcel + household + idiosyncratic
};

/// Variances must be finite and non-negative with a positive total.
/// Levels flagged as not modelled must carry 0 and are reported blank.
VarianceDecomposition decompose(const VarianceVector& variances,
                                const std::array<bool, 5>& modeled = {true, true, true, true, true});

/// Decomposition of a fit's point estimates; unidentified and absent levels
/// count as 0 and are flagged as not modelled.
VarianceDecomposition decompose(const FitResult& fit);

struct IntervalSummary {
    double mean = 0.0;
    double lower = 0.0;  // 2.5%
    double upper = 0.0;  // 97.5%
};

struct PosteriorDecomposition {
    std::vector<VarianceDecomposition> per_draw;
    std::array<IntervalSummary, 5> icc{};
    std::array<IntervalSummary, 6> shares{};
    IntervalSummary covariate_share;
};

PosteriorDecomposition decompose_posterior(const PosteriorDraws& draws);

// Report emitters: three panels (variances, ICC, shares).
void write_decomposition_csv(std::ostream& out, const std::vector<std::string>& column_names,
                             const std::vector<VarianceDecomposition>& columns);
void write_decomposition_text(std::ostream& out, const std::vector<std::string>& column_names,
                              const std::vector<VarianceDecomposition>& columns);

/// Share as a whole percent (display rounding).
int rounded_percent(double share);

}  // namespace yieldrisk
