#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "yieldrisk/actuarial.hpp"
#include "yieldrisk/decomposition.hpp"
#include "yieldrisk/estimation.hpp"
#include "yieldrisk/gibbs.hpp"

namespace yieldrisk {

enum class ReportFormat { csv, json, text };
std::string_view to_string(ReportFormat f);
ReportFormat report_format_from_string(std::string_view s);
/// File extension for the format: csv, json or txt.
std::string_view extension(ReportFormat f);

/// "***" for p < 0.01, "**" for p < 0.05, "*" for p < 0.1.
std::string significance_stars(double p);

std::string fit_to_json(const FitResult& fit);
/// Reads back the variance components of a fit JSON for decomposition.
VarianceDecomposition decomposition_from_fit_json(std::string_view json_text, const std::string& source = "<fit>");

/// Coefficient table with one column per fit: estimate with stars and the
/// standard error underneath in the text form; raw p-values in csv/json.
void write_coefficient_table(std::ostream& out, ReportFormat format, const std::vector<std::string>& column_names,
                             std::span<const FitResult> fits);

void write_decomposition(std::ostream& out, ReportFormat format, const std::vector<std::string>& column_names,
                         const std::vector<VarianceDecomposition>& columns);

void write_posterior_decomposition_csv(std::ostream& out, const PosteriorDecomposition& d);

/// One row per stored draw: chain, draw, parameters, deviance.
void write_draws_csv(std::ostream& out, const PosteriorDraws& draws);
void write_diagnostics_csv(std::ostream& out, const PosteriorDraws& draws);
void write_histograms_csv(std::ostream& out, std::span<const Histogram> histograms);

void write_zeta_csv(std::ostream& out, std::span<const ZetaProfile> profiles);

void write_pricing_report(std::ostream& out, ReportFormat format, std::span<const Contract> contracts,
                          std::span<const PricingResult> results);

/// {"error": kind, "message": ..., "exit_code": n} plus source and line for
/// row errors and columns for rank deficiency.
std::string error_to_json(const std::exception& e);

}  // namespace yieldrisk
