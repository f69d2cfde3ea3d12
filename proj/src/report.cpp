#include "yieldrisk/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include <json.hpp>

#include "csv.hpp"
#include "yieldrisk/errors.hpp"

namespace yieldrisk {

using nlohmann::ordered_json;

namespace {

std::string fixed(double v, int digits) {
    if (!std::isfinite(v)) return std::isnan(v) ? "" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string num(double v) { return std::isfinite(v) ? format_double(v) : (std::isnan(v) ? "" : (v > 0 ? "inf" : "-inf")); }

ordered_json json_number(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

ordered_json json_optional(const std::optional<double>& v) { return v ? json_number(*v) : ordered_json(nullptr); }

std::string pad(const std::string& s, std::size_t width, bool left = false) {
    if (s.size() >= width) return s;
    return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::string_view to_string(ReportFormat f) {
    switch (f) {
        case ReportFormat::csv: return "csv";
        case ReportFormat::json: return "json";
        case ReportFormat::text: return "text";
    }
    return "csv";
}

ReportFormat report_format_from_string(std::string_view s) {
    if (s == "csv") return ReportFormat::csv;
    if (s == "json") return ReportFormat::json;
    if (s == "text") return ReportFormat::text;
    throw ConfigError("unknown format '" + std::string(s) + "' (expected csv, json or text)");
}

std::string_view extension(ReportFormat f) { return f == ReportFormat::text ? "txt" : to_string(f); }

std::string significance_stars(double p) {
    if (!std::isfinite(p)) return "";
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.1) return "*";
    return "";
}

std::string fit_to_json(const FitResult& fit) {
    ordered_json j;
    j["method"] = std::string(to_string(fit.method));
    ordered_json levels = ordered_json::array();
    for (Level l : fit.spec.levels) levels.push_back(std::string(to_string(l)));
    j["hierarchy"] = {{"levels", levels}, {"covariates", fit.spec.include_covariates}};
    j["n_obs"] = fit.n_obs;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["normality_assumed"] = fit.normality_assumed;
    ordered_json coefs = ordered_json::array();
    for (std::size_t i = 0; i < fit.beta_labels.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        coefs.push_back({{"label", fit.beta_labels[i]},
                         {"estimate", json_number(fit.beta[k])},
                         {"se", json_number(k < fit.standard_errors.size() ? fit.standard_errors[k] : NAN)},
                         {"p_value", json_number(k < fit.p_values.size() ? fit.p_values[k] : NAN)}});
    }
    j["coefficients"] = coefs;
    j["mu"] = json_optional(fit.mu);
    ordered_json vars;
    for (Level l : kAllLevels) {
        const auto it = fit.level_variances.find(l);
        const VarianceComponent vc = it == fit.level_variances.end() ? VarianceComponent{} : it->second;
        vars[std::string(to_string(l))] = {
            {"value", json_number(vc.value)}, {"se", json_number(vc.se)}, {"status", std::string(to_string(vc.status))}};
    }
    vars["idiosyncratic"] = {{"value", json_number(fit.idiosyncratic.value)},
                             {"se", json_number(fit.idiosyncratic.se)},
                             {"status", std::string(to_string(fit.idiosyncratic.status))}};
    j["variances"] = vars;
    j["metrics"] = {{"log_likelihood", json_optional(fit.metrics.log_likelihood)},
                    {"aic", json_optional(fit.metrics.aic)},
                    {"dic", json_optional(fit.metrics.dic)},
                    {"p_d", json_optional(fit.metrics.p_d)},
                    {"r_squared", json_optional(fit.metrics.r_squared)}};
    if (fit.method != Method::ols) {
        try {
            const auto d = decompose(fit);
            ordered_json icc;
            ordered_json shares;
            for (std::size_t k = 0; k < 5; ++k) {
                const std::string name(to_string(kAllLevels[k]));
                icc[name] = d.modeled[k] ? json_number(d.icc[k]) : ordered_json(nullptr);
                shares[name] = d.modeled[k] ? json_number(d.shares[k]) : ordered_json(nullptr);
            }
            shares["idiosyncratic"] = d.shares[5];
            j["decomposition"] = {{"total", d.total}, {"icc", icc}, {"shares", shares}, {"covariate_share", d.covariate_share}};
        } catch (const DomainError&) {
            j["decomposition"] = nullptr;
        }
    }
    j["warnings"] = fit.warnings;
    return j.dump(2) + "\n";
}

VarianceDecomposition decomposition_from_fit_json(std::string_view json_text, const std::string& source) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(source + ": invalid JSON: " + e.what());
    }
    if (!j.contains("variances") || !j["variances"].is_object()) throw SchemaError(source + ": missing 'variances'");
    const auto& vars = j["variances"];
    VarianceVector v{};
    std::array<bool, 5> modeled{};
    auto read = [&](const std::string& name) -> std::pair<double, std::string> {
        if (!vars.contains(name)) throw SchemaError(source + ": missing variance '" + name + "'");
        const auto& e = vars[name];
        const std::string status = e.value("status", std::string("estimated"));
        if (!e.contains("value") || !e["value"].is_number()) throw SchemaError(source + ": variance '" + name + "' has no value");
        return {e["value"].get<double>(), status};
    };
    for (std::size_t k = 0; k < 5; ++k) {
        const auto [value, status] = read(std::string(to_string(kAllLevels[k])));
        modeled[k] = status == "estimated" || status == "boundary";
        v[k] = modeled[k] ? value : 0.0;
    }
    v[5] = read("idiosyncratic").first;
    return decompose(v, modeled);
}

void write_coefficient_table(std::ostream& out, ReportFormat format, const std::vector<std::string>& column_names,
                             std::span<const FitResult> fits) {
    // Labels in order of first appearance across the fits.
    std::vector<std::string> labels;
    std::set<std::string> seen;
    for (const auto& f : fits) {
        for (const auto& l : f.beta_labels) {
            if (seen.insert(l).second) labels.push_back(l);
        }
    }
    auto find = [](const FitResult& f, const std::string& label) -> int {
        for (std::size_t i = 0; i < f.beta_labels.size(); ++i) {
            if (f.beta_labels[i] == label) return static_cast<int>(i);
        }
        return -1;
    };
    auto se_of = [](const FitResult& f, int i) {
        return i < f.standard_errors.size() ? f.standard_errors[i] : std::numeric_limits<double>::quiet_NaN();
    };
    auto p_of = [](const FitResult& f, int i) {
        return i < f.p_values.size() ? f.p_values[i] : std::numeric_limits<double>::quiet_NaN();
    };

    if (format == ReportFormat::csv) {
        out << "model,parameter,estimate,se,p_value,stars\n";
        for (std::size_t m = 0; m < fits.size(); ++m) {
            const auto& f = fits[m];
            const std::string model = csv::escape(column_names[m]);
            if (f.mu) out << model << ",mu," << num(*f.mu) << ",,,\n";
            for (std::size_t i = 0; i < f.beta_labels.size(); ++i) {
                const int k = static_cast<int>(i);
                const double p = p_of(f, k);
                out << model << ',' << csv::escape(f.beta_labels[i]) << ',' << num(f.beta[k]) << ',' << num(se_of(f, k))
                    << ',' << num(p) << ',' << significance_stars(p) << '\n';
            }
            const auto v = f.variance_vector();
            for (std::size_t l = 0; l < 5; ++l) {
                const auto it = f.level_variances.find(kAllLevels[l]);
                if (it == f.level_variances.end() || it->second.status == VarianceStatus::not_modeled) continue;
                out << model << ",variance:" << to_string(kAllLevels[l]) << ',' << num(v[l]) << ',' << num(it->second.se)
                    << ",,\n";
            }
            out << model << ",variance:idiosyncratic," << num(v[5]) << ',' << num(f.idiosyncratic.se) << ",,\n";
            out << model << ",n_obs," << f.n_obs << ",,,\n";
            if (f.metrics.log_likelihood) out << model << ",log_likelihood," << num(*f.metrics.log_likelihood) << ",,,\n";
            if (f.metrics.aic) out << model << ",aic," << num(*f.metrics.aic) << ",,,\n";
            if (f.metrics.dic) out << model << ",dic," << num(*f.metrics.dic) << ",,,\n";
            if (f.metrics.r_squared) out << model << ",r_squared," << num(*f.metrics.r_squared) << ",,,\n";
        }
        return;
    }
    if (format == ReportFormat::json) {
        ordered_json arr = ordered_json::array();
        for (std::size_t m = 0; m < fits.size(); ++m) {
            arr.push_back({{"model", column_names[m]}, {"fit", ordered_json::parse(fit_to_json(fits[m]))}});
        }
        out << arr.dump(2) << "\n";
        return;
    }

    const std::size_t label_w = 24;
    const std::size_t col_w = 14;
    out << pad("", label_w, true);
    for (const auto& n : column_names) out << pad(n, col_w);
    out << "\n";
    auto row = [&](const std::string& label, const std::vector<std::string>& cells) {
        out << pad(label, label_w, true);
        for (const auto& c : cells) out << pad(c, col_w);
        out << "\n";
    };
    for (const auto& label : labels) {
        std::vector<std::string> est;
        std::vector<std::string> se;
        for (const auto& f : fits) {
            const int i = find(f, label);
            est.push_back(i < 0 ? "" : fixed(f.beta[i], 3) + significance_stars(p_of(f, i)));
            se.push_back(i < 0 || !std::isfinite(se_of(f, i)) ? "" : "(" + fixed(se_of(f, i), 3) + ")");
        }
        row(label, est);
        row("", se);
    }
    for (std::size_t l = 0; l < 6; ++l) {
        std::vector<std::string> cells;
        bool any = false;
        for (const auto& f : fits) {
            const bool shown = l == 5 || (f.level_variances.count(kAllLevels[l]) &&
                                          f.level_variances.at(kAllLevels[l]).status != VarianceStatus::not_modeled);
            any = any || shown;
            cells.push_back(shown ? fixed(f.variance_vector()[l], 3) : "");
        }
        if (any) row(l == 5 ? std::string("sigma2 idiosyncratic") : "sigma2 " + std::string(to_string(kAllLevels[l])), cells);
    }
    std::vector<std::string> n;
    std::vector<std::string> ll;
    std::vector<std::string> aic;
    std::vector<std::string> dic;
    for (const auto& f : fits) {
        n.push_back(std::to_string(f.n_obs));
        ll.push_back(f.metrics.log_likelihood ? fixed(*f.metrics.log_likelihood, 1) : "");
        aic.push_back(f.metrics.aic ? fixed(*f.metrics.aic, 1) : "");
        dic.push_back(f.metrics.dic ? fixed(*f.metrics.dic, 1) : "");
    }
    row("Observations", n);
    row("Log likelihood", ll);
    row("AIC", aic);
    row("DIC", dic);
    out << "Note: *p<0.1; **p<0.05; ***p<0.01\n";
}

void write_decomposition(std::ostream& out, ReportFormat format, const std::vector<std::string>& column_names,
                         const std::vector<VarianceDecomposition>& columns) {
    if (format == ReportFormat::csv) {
        write_decomposition_csv(out, column_names, columns);
        return;
    }
    if (format == ReportFormat::text) {
        write_decomposition_text(out, column_names, columns);
        return;
    }
    ordered_json arr = ordered_json::array();
    for (std::size_t c = 0; c < columns.size(); ++c) {
        const auto& d = columns[c];
        ordered_json var;
        ordered_json icc;
        ordered_json share;
        for (std::size_t k = 0; k < 5; ++k) {
            const std::string name(to_string(kAllLevels[k]));
            var[name] = d.modeled[k] ? ordered_json(d.variances[k]) : ordered_json(nullptr);
            icc[name] = d.modeled[k] ? ordered_json(d.icc[k]) : ordered_json(nullptr);
            share[name] = d.modeled[k] ? ordered_json(d.shares[k]) : ordered_json(nullptr);
        }
        var["idiosyncratic"] = d.variances[5];
        share["idiosyncratic"] = d.shares[5];
        arr.push_back({{"model", column_names[c]},
                       {"variances", var},
                       {"total", d.total},
                       {"icc", icc},
                       {"shares", share},
                       {"covariate_share", d.covariate_share},
                       {"idiosyncratic_side_share", d.idiosyncratic_side_share}});
    }
    out << arr.dump(2) << "\n";
}

void write_posterior_decomposition_csv(std::ostream& out, const PosteriorDecomposition& d) {
    out << "panel,level,mean,lower,upper\n";
    auto line = [&](const char* panel, std::string_view level, const IntervalSummary& s) {
        out << panel << ',' << level << ',' << num(s.mean) << ',' << num(s.lower) << ',' << num(s.upper) << '\n';
    };
    for (std::size_t k = 0; k < 5; ++k) line("icc", to_string(kAllLevels[k]), d.icc[k]);
    for (std::size_t k = 0; k < 5; ++k) line("share", to_string(kAllLevels[k]), d.shares[k]);
    line("share", "idiosyncratic", d.shares[5]);
    line("share", "covariate", d.covariate_share);
}

void write_draws_csv(std::ostream& out, const PosteriorDraws& draws) {
    out << "chain,draw";
    for (const auto& n : draws.parameter_names) out << ',' << csv::escape(n);
    out << ",deviance\n";
    for (Eigen::Index r = 0; r < draws.values.rows(); ++r) {
        out << r / draws.draws_per_chain << ',' << r % draws.draws_per_chain;
        for (Eigen::Index c = 0; c < draws.values.cols(); ++c) out << ',' << format_double(draws.values(r, c));
        out << ',' << format_double(draws.deviance[static_cast<std::size_t>(r)]) << '\n';
    }
}

void write_diagnostics_csv(std::ostream& out, const PosteriorDraws& draws) {
    out << "parameter,mean,sd,q025,q50,q975,rhat,ess\n";
    for (const auto& s : draws.summaries) {
        out << csv::escape(s.name) << ',' << num(s.mean) << ',' << num(s.sd) << ',' << num(s.q025) << ',' << num(s.q50)
            << ',' << num(s.q975) << ',' << num(s.rhat) << ',' << num(s.ess) << '\n';
    }
    out << "deviance_mean," << num(draws.mean_deviance) << ",,,,,,\n";
    out << "deviance_at_mean," << num(draws.deviance_at_mean) << ",,,,,,\n";
    out << "p_d," << num(draws.p_d) << ",,,,,,\n";
    out << "dic," << num(draws.dic) << ",,,,,,\n";
}

void write_histograms_csv(std::ostream& out, std::span<const Histogram> histograms) {
    out << "parameter,bin_lower,bin_upper,count,skewness\n";
    for (const auto& h : histograms) {
        for (std::size_t b = 0; b < h.counts.size(); ++b) {
            out << csv::escape(h.parameter) << ',' << num(h.edges[b]) << ',' << num(h.edges[b + 1]) << ',' << h.counts[b]
                << ',' << num(h.skewness) << '\n';
        }
    }
}

void write_zeta_csv(std::ostream& out, std::span<const ZetaProfile> profiles) {
    out << "parameter,value,zeta,abs_zeta,lr,failed,estimate\n";
    for (const auto& p : profiles) {
        for (std::size_t i = 0; i < p.grid.size(); ++i) {
            out << csv::escape(p.parameter) << ',' << num(p.grid[i]) << ',' << num(p.zeta[i]) << ',' << num(p.abs_zeta[i])
                << ',' << num(p.lr[i]) << ',' << (p.failed[i] ? "true" : "false") << ',' << num(p.mle_value) << '\n';
        }
    }
}

void write_pricing_report(std::ostream& out, ReportFormat format, std::span<const Contract> contracts,
                          std::span<const PricingResult> results) {
    if (format == ReportFormat::csv) {
        write_pricing_report_csv(out, contracts, results);
        return;
    }
    if (format == ReportFormat::json) {
        ordered_json arr = ordered_json::array();
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& r = results[i];
            ordered_json phases = ordered_json::array();
            for (std::size_t k = 0; k < 3; ++k) {
                const auto& t = contracts[i].phases[k];
                phases.push_back({{"phase", std::string(to_string(t.phase))},
                                  {"direction", std::string(to_string(t.direction))},
                                  {"strike_mm", t.strike_mm},
                                  {"exit_mm", t.exit_mm},
                                  {"slope_rs_per_mm", t.slope_rs_per_mm},
                                  {"max_payout_rs", t.max_payout_rs},
                                  {"mean_payout_rs", r.phases[k].mean_payout_rs},
                                  {"payout_frequency", r.phases[k].payout_frequency},
                                  {"n_cells", r.phases[k].n_cells}});
            }
            arr.push_back({{"contract", r.label},
                           {"fair_premium_rs", r.fair_premium_rs},
                           {"payout_probability", r.payout_probability},
                           {"loading_factor", json_optional(r.loading_factor)},
                           {"years_until_payout", json_number(r.years_until_payout)},
                           {"n_cells", r.n_cells},
                           {"phases", phases},
                           {"excluded", r.excluded},
                           {"warnings", r.warnings}});
        }
        out << arr.dump(2) << "\n";
        return;
    }
    // Table layout: one column per contract; currency to one decimal.
    const std::size_t label_w = 28;
    const std::size_t col_w = 12;
    out << pad("", label_w, true);
    for (const auto& r : results) out << pad(r.label, col_w);
    out << "\n";
    auto row = [&](const std::string& label, auto cell) {
        out << pad(label, label_w, true);
        for (std::size_t i = 0; i < results.size(); ++i) out << pad(cell(i), col_w);
        out << "\n";
    };
    for (std::size_t k = 0; k < 3; ++k) {
        const std::string ph = "Phase " + std::string(to_string(kAllPhases[k]));
        row(ph + " strike (mm)", [&](std::size_t i) { return fixed(contracts[i].phases[k].strike_mm, 0); });
        row(ph + " exit (mm)", [&](std::size_t i) { return fixed(contracts[i].phases[k].exit_mm, 0); });
        row(ph + " max payout (Rs)", [&](std::size_t i) { return fixed(contracts[i].phases[k].max_payout_rs, 0); });
    }
    row("Actuarially fair premium", [&](std::size_t i) { return fixed(results[i].fair_premium_rs, 1); });
    row("Probability of payout", [&](std::size_t i) { return fixed(results[i].payout_probability, 3); });
    row("Loading factor", [&](std::size_t i) {
        return results[i].loading_factor ? fixed(*results[i].loading_factor, 2) : std::string();
    });
    row("Years until payout", [&](std::size_t i) { return fixed(results[i].years_until_payout, 2); });
    row("Village-year-phase cells", [&](std::size_t i) { return std::to_string(results[i].n_cells); });
}

std::string error_to_json(const std::exception& e) {
    ordered_json j;
    const auto* err = dynamic_cast<const Error*>(&e);
    j["error"] = err ? err->kind() : "internal_error";
    j["message"] = e.what();
    j["exit_code"] = err ? err->exit_code() : 1;
    if (const auto* row = dynamic_cast<const RowError*>(&e)) {
        j["source"] = row->source();
        j["line"] = row->line();
    }
    if (const auto* rank = dynamic_cast<const RankDeficiencyError*>(&e)) j["columns"] = rank->columns();
    if (const auto* conv = dynamic_cast<const ConvergenceError*>(&e)) j["last_iterate"] = conv->last_iterate();
    return j.dump();
}

}  // namespace yieldrisk
