#include "yieldrisk/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "csv.hpp"
#include "yieldrisk/actuarial.hpp"
#include "yieldrisk/decomposition.hpp"
#include "yieldrisk/errors.hpp"
#include "yieldrisk/estimation.hpp"
#include "yieldrisk/gibbs.hpp"
#include "yieldrisk/report.hpp"
#include "yieldrisk/synthetic.hpp"

namespace yieldrisk {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::optional<int> workers;
    std::string format = "csv";
    std::ostream* warn = &std::cerr;
};

struct FitOptions {
    std::string panel;
    std::string levels;
    bool no_covariates = false;
    // Bayes
    std::optional<int> burn_in;
    std::optional<int> keep;
    std::optional<int> thin;
    std::optional<int> chains;
    bool store_effects = false;
    bool no_group_moves = false;
    bool dic_variance_form = false;
    int histogram_bins = 40;
    // profile
    std::vector<std::string> parameters;
    std::optional<int> points;
    std::optional<double> half_width;
};

struct SimulateOptions {
    std::optional<int> villages;
    std::optional<int> times;
    std::optional<int> households;
    std::optional<int> parcels;
    std::optional<double> coverage;
    std::optional<double> mu;
    std::vector<double> variances;
    std::optional<int> rain_villages;
    std::optional<int> rain_years;
    std::optional<double> western_fraction;
    std::string calibrate;
    std::optional<double> target_premium;
    std::vector<double> rain_sd;
};

struct DecomposeOptions {
    std::vector<std::string> fits;
    std::vector<std::string> variances;
    std::vector<std::string> names;
};

struct PriceOptions {
    std::string rainfall;
    std::vector<std::string> contracts;
    std::vector<std::string> references;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    try {
        json j = json::parse(read_file(path));
        if (!j.is_object()) throw ConfigError(path + ": config must be a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

template <class T>
void take(const json& section, const char* key, T& target) {
    if (!section.contains(key)) return;
    try {
        target = section.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

const json& section(const json& cfg, const char* name) {
    static const json empty = json::object();
    if (!cfg.contains(name)) return empty;
    if (!cfg[name].is_object()) throw ConfigError(std::string("config section '") + name + "' must be an object");
    return cfg[name];
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

VarianceVector parse_variances(const std::vector<double>& v, const std::string& what) {
    if (v.size() != 6) throw ConfigError(what + " needs six values (parcel, household, season, village, time, idiosyncratic)");
    VarianceVector out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

HierarchySpec hierarchy_from(const json& cfg, const FitOptions& o) {
    HierarchySpec spec = HierarchySpec::full();
    const auto& h = section(cfg, "hierarchy");
    std::vector<std::string> names;
    take(h, "levels", names);
    take(h, "covariates", spec.include_covariates);
    if (!o.levels.empty()) names = split_list(o.levels);
    if (!names.empty()) {
        spec.levels.clear();
        for (const auto& n : names) spec.levels.push_back(level_from_string(n));
    }
    if (o.no_covariates) spec.include_covariates = false;
    spec.validate();
    return spec;
}

ColumnSchema schema_from(const json& cfg) {
    ColumnSchema schema;
    take(cfg, "schema", schema.columns);
    return schema;
}

int resolve_workers(const Globals& g) {
    if (g.workers) {
        if (*g.workers < 1) throw ConfigError("--workers must be positive");
        return *g.workers;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

class Artifacts {
public:
    Artifacts(const std::string& dir, std::ostream& log) : dir_(dir), log_(log) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_)) throw ConfigError("cannot create output directory '" + dir + "'");
    }
    template <class F>
    void write(const std::string& name, F body) {
        const fs::path path = dir_ / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ConfigError("cannot write '" + path.string() + "'");
        body(out);
        out.flush();
        if (!out) throw ConfigError("failed writing '" + path.string() + "'");
        log_ << path.string() << "\n";
    }

private:
    fs::path dir_;
    std::ostream& log_;
};

std::vector<TransformedRecord> load_panel(const std::string& path, const json& cfg) {
    if (path.empty()) throw ConfigError("--panel is required");
    const auto records = load_yield_panel(path, schema_from(cfg));
    if (records.empty()) throw SchemaError(path + ": panel has no rows");
    return transform_panel(records);
}

ChainConfig chain_from(const json& cfg, const Globals& g, const FitOptions& o) {
    ChainConfig c;
    const auto& s = section(cfg, "chain");
    take(s, "burn_in", c.burn_in);
    take(s, "keep", c.keep);
    take(s, "thin", c.thin);
    take(s, "n_chains", c.n_chains);
    take(s, "seed", c.seed);
    take(s, "store_group_effects", c.store_group_effects);
    take(s, "group_moves", c.group_moves);
    take(s, "dic_variance_form", c.dic_variance_form);
    if (o.burn_in) c.burn_in = *o.burn_in;
    if (o.keep) c.keep = *o.keep;
    if (o.thin) c.thin = *o.thin;
    if (o.chains) c.n_chains = *o.chains;
    if (g.seed) c.seed = *g.seed;
    if (o.store_effects) c.store_group_effects = true;
    if (o.no_group_moves) c.group_moves = false;
    if (o.dic_variance_form) c.dic_variance_form = true;
    c.workers = resolve_workers(g);
    c.validate();
    return c;
}

PriorSpec priors_from(const json& cfg) {
    PriorSpec p;
    const auto& s = section(cfg, "priors");
    take(s, "mu_mean", p.mu.mean);
    take(s, "mu_variance", p.mu.variance);
    take(s, "beta_variance", p.beta_variance);
    if (s.contains("variances")) {
        const auto& v = s["variances"];
        if (!v.is_array() || v.size() != 6) throw ConfigError("priors.variances must list six {shape, scale} objects");
        for (std::size_t k = 0; k < 6; ++k) {
            take(v[k], "shape", p.variances[k].shape);
            take(v[k], "scale", p.variances[k].scale);
        }
    }
    p.validate();
    return p;
}

MleOptions mle_from(const json& cfg) {
    MleOptions m;
    const auto& s = section(cfg, "mle");
    take(s, "tolerance", m.tolerance);
    take(s, "max_iter", m.max_iter);
    return m;
}

int cmd_fit(Method method, const Globals& g, const FitOptions& o, std::ostream& log) {
    const json cfg = load_config(g.config_path);
    const auto format = report_format_from_string(g.format);
    const auto spec = hierarchy_from(cfg, o);
    const auto records = load_panel(o.panel, cfg);
    Artifacts out(g.out_dir, log);
    const std::string ext(extension(format));

    FitResult fit;
    std::optional<PosteriorDraws> draws;
    if (method == Method::ols) {
        fit = fit_ols(records, spec);
    } else if (method == Method::mle) {
        fit = fit_mle(records, spec, mle_from(cfg));
    } else {
        draws = run_gibbs(records, spec, priors_from(cfg), chain_from(cfg, g, o));
        fit = summarize_fit(*draws);
    }
    for (const auto& w : fit.warnings) *g.warn << "warning: " << w << "\n";

    const std::string name(to_string(method));
    out.write("fit.json", [&](std::ostream& s) { s << fit_to_json(fit); });
    const std::vector<FitResult> fits = {fit};
    out.write("coefficients." + ext, [&](std::ostream& s) { write_coefficient_table(s, format, {name}, fits); });
    if (method != Method::ols) {
        const std::vector<VarianceDecomposition> cols = {decompose(fit)};
        out.write("decomposition." + ext, [&](std::ostream& s) { write_decomposition(s, format, {name}, cols); });
    }
    if (draws) {
        out.write("draws.csv", [&](std::ostream& s) { write_draws_csv(s, *draws); });
        out.write("diagnostics.csv", [&](std::ostream& s) { write_diagnostics_csv(s, *draws); });
        std::vector<Histogram> hists;
        for (Level l : draws->fitted_levels) hists.push_back(posterior_histogram(*draws, std::string(to_string(l)), o.histogram_bins));
        hists.push_back(posterior_histogram(*draws, "idiosyncratic", o.histogram_bins));
        out.write("histograms.csv", [&](std::ostream& s) { write_histograms_csv(s, hists); });
        const auto pd = decompose_posterior(*draws);
        out.write("posterior_decomposition.csv", [&](std::ostream& s) { write_posterior_decomposition_csv(s, pd); });
    }
    return 0;
}

int cmd_profile(const Globals& g, const FitOptions& o, std::ostream& log) {
    const json cfg = load_config(g.config_path);
    const auto spec = hierarchy_from(cfg, o);
    const auto records = load_panel(o.panel, cfg);
    const auto mle = mle_from(cfg);
    const auto fit = fit_mle(records, spec, mle);
    ZetaGrid grid;
    const auto& s = section(cfg, "profile");
    take(s, "points", grid.points);
    take(s, "half_width_se", grid.half_width_se);
    if (o.points) grid.points = *o.points;
    if (o.half_width) grid.half_width_se = *o.half_width;
    std::vector<std::string> params = o.parameters;
    if (params.empty()) {
        for (Level l : spec.levels) {
            if (fit.level_variances.at(l).status == VarianceStatus::estimated) params.emplace_back(to_string(l));
        }
        params.emplace_back("idiosyncratic");
    }
    const int workers = resolve_workers(g);
    std::vector<ZetaProfile> profiles;
    for (const auto& p : params) profiles.push_back(profile_zeta(records, spec, fit, p, grid, mle, workers));
    Artifacts out(g.out_dir, log);
    out.write("fit.json", [&](std::ostream& st) { st << fit_to_json(fit); });
    out.write("zeta.csv", [&](std::ostream& st) { write_zeta_csv(st, profiles); });
    return 0;
}

int cmd_decompose(const Globals& g, const DecomposeOptions& o, std::ostream& log) {
    const auto format = report_format_from_string(g.format);
    std::vector<VarianceDecomposition> cols;
    std::vector<std::string> names;
    for (const auto& path : o.fits) {
        cols.push_back(decomposition_from_fit_json(read_file(path), path));
        names.push_back(fs::path(path).stem().string());
    }
    for (std::size_t i = 0; i < o.variances.size(); ++i) {
        std::vector<double> v;
        for (const auto& item : split_list(o.variances[i])) {
            const auto d = csv::parse_double(item);
            if (!d) throw ConfigError("--variances: '" + item + "' is not a number");
            v.push_back(*d);
        }
        cols.push_back(decompose(parse_variances(v, "--variances")));
        names.push_back("model" + std::to_string(names.size() + 1));
    }
    if (cols.empty()) throw ConfigError("decompose needs --fit or --variances");
    for (std::size_t i = 0; i < o.names.size() && i < names.size(); ++i) names[i] = o.names[i];
    Artifacts out(g.out_dir, log);
    out.write("decomposition." + std::string(extension(format)),
              [&](std::ostream& s) { write_decomposition(s, format, names, cols); });
    return 0;
}

std::array<double, 3> rain_sd_from(const std::vector<double>& v) {
    if (v.empty()) return {45.0, 55.0, 90.0};
    if (v.size() != 3) throw ConfigError("--rain-sd needs three values");
    return {v[0], v[1], v[2]};
}

int cmd_simulate(const Globals& g, const SimulateOptions& o, std::ostream& log) {
    const json cfg = load_config(g.config_path);
    GenerativeConfig gen;
    const auto& s = section(cfg, "generative");
    take(s, "villages", gen.villages);
    take(s, "times", gen.times);
    take(s, "households_per_village", gen.households_per_village);
    take(s, "parcels_per_household", gen.parcels_per_household);
    take(s, "parcel_season_coverage", gen.parcel_season_coverage);
    take(s, "mu", gen.mu);
    take(s, "input_parcel_sd", gen.input_parcel_sd);
    take(s, "input_season_sd", gen.input_season_sd);
    take(s, "seed", gen.seed);
    if (s.contains("variances")) {
        std::vector<double> v;
        take(s, "variances", v);
        gen.variances = parse_variances(v, "generative.variances");
    }
    if (s.contains("disturbances")) {
        const auto& d = s["disturbances"];
        if (!d.is_array() || d.size() != 6) throw ConfigError("generative.disturbances must list six entries");
        for (std::size_t k = 0; k < 6; ++k) {
            std::string family = "normal";
            take(d[k], "family", family);
            gen.disturbances[k].family = family_from_string(family);
            take(d[k], "skew", gen.disturbances[k].skew);
        }
    }
    if (s.contains("crop_mix")) {
        gen.crop_mix.clear();
        const auto& mix = s["crop_mix"];
        if (!mix.is_object()) throw ConfigError("generative.crop_mix must map crops to weights");
        for (const auto& [crop, w] : mix.items()) gen.crop_mix.emplace_back(crop, w.get<double>());
    }
    if (s.contains("beta")) {
        const auto& b = s["beta"];
        if (!b.is_object()) throw ConfigError("generative.beta must map crops to {intercept, slopes}");
        for (const auto& [crop, v] : b.items()) {
            CropBeta cb;
            take(v, "intercept", cb.intercept);
            take(v, "slopes", cb.slopes);
            gen.beta[crop] = cb;
        }
    }
    if (o.villages) gen.villages = *o.villages;
    if (o.times) gen.times = *o.times;
    if (o.households) gen.households_per_village = *o.households;
    if (o.parcels) gen.parcels_per_household = *o.parcels;
    if (o.coverage) gen.parcel_season_coverage = *o.coverage;
    if (o.mu) gen.mu = *o.mu;
    if (!o.variances.empty()) gen.variances = parse_variances(o.variances, "--variances");
    if (g.seed) gen.seed = *g.seed;
    gen.workers = resolve_workers(g);

    RainfallGenConfig rain;
    const auto& r = section(cfg, "rainfall");
    take(r, "villages", rain.villages);
    take(r, "first_year", rain.first_year);
    take(r, "years", rain.years);
    take(r, "western_fraction", rain.western_fraction);
    take(r, "seed", rain.seed);
    if (r.contains("phases")) {
        const auto& ph = r["phases"];
        if (!ph.is_array() || ph.size() != 3) throw ConfigError("rainfall.phases must list three {mean_mm, sd_mm}");
        for (std::size_t k = 0; k < 3; ++k) {
            take(ph[k], "mean_mm", rain.phases[k].mean_mm);
            take(ph[k], "sd_mm", rain.phases[k].sd_mm);
        }
    }
    if (o.rain_villages) rain.villages = *o.rain_villages;
    if (o.rain_years) rain.years = *o.rain_years;
    if (o.western_fraction) rain.western_fraction = *o.western_fraction;
    if (g.seed) rain.seed = *g.seed;

    const auto panel = generate_panel(gen);
    json truth = json::parse(truth_to_json(panel.truth));
    GeneratedRainfall rainfall;
    json rain_truth;
    if (!o.calibrate.empty()) {
        if (!o.target_premium) throw ConfigError("--calibrate needs --target-premium");
        const auto& contract = reference_contract(o.calibrate);
        const auto cal = calibrate_premium(rain, contract, *o.target_premium, rain_sd_from(o.rain_sd));
        rain = cal.config;
        rain_truth["calibration"] = {{"contract", contract.label},
                                     {"target_premium_rs", *o.target_premium},
                                     {"phase_probability", cal.probability},
                                     {"fair_premium_rs", cal.pricing.fair_premium_rs},
                                     {"payout_probability", cal.pricing.payout_probability}};
    }
    rainfall = generate_rainfall(rain);
    json targets = json::array();
    for (const auto& t : rain.phases) targets.push_back({{"mean_mm", t.mean_mm}, {"sd_mm", t.sd_mm}});
    rain_truth["villages"] = rain.villages;
    rain_truth["first_year"] = rain.first_year;
    rain_truth["years"] = rain.years;
    rain_truth["western_fraction"] = rain.western_fraction;
    rain_truth["seed"] = rain.seed;
    rain_truth["phase_targets"] = targets;
    rain_truth["n_clipped"] = rainfall.n_clipped;
    rain_truth["report"] = rainfall.report;
    truth["rainfall"] = rain_truth;

    Artifacts out(g.out_dir, log);
    out.write("panel.csv", [&](std::ostream& st) { write_yield_panel(st, panel.records); });
    out.write("rainfall.csv", [&](std::ostream& st) { write_rainfall(st, rainfall.series); });
    out.write("truth.json", [&](std::ostream& st) { st << truth.dump(2) << "\n"; });
    return 0;
}

int cmd_price(const Globals& g, const PriceOptions& o, std::ostream& log) {
    const auto format = report_format_from_string(g.format);
    if (o.rainfall.empty()) throw ConfigError("--rainfall is required");
    const auto series = load_rainfall(o.rainfall);
    if (series.empty()) throw SchemaError(o.rainfall + ": no rainfall rows");
    std::vector<Contract> contracts;
    for (const auto& path : o.contracts) contracts.push_back(load_contract(path));
    for (const auto& label : o.references) contracts.push_back(reference_contract(label));
    if (contracts.empty()) contracts = reference_contracts();
    std::vector<PricingResult> results;
    for (const auto& c : contracts) {
        results.push_back(price(c, series));
        for (const auto& e : results.back().excluded) *g.warn << "excluded: " << e << "\n";
    }
    if (!results.empty()) {
        for (const auto& w : results.front().warnings) *g.warn << "warning: " << w << "\n";
    }
    Artifacts out(g.out_dir, log);
    out.write("pricing." + std::string(extension(format)),
              [&](std::ostream& s) { write_pricing_report(s, format, contracts, results); });
    out.write("payout_ledger.csv", [&](std::ostream& s) { write_payout_ledger_csv(s, results); });
    return 0;
}

void add_fit_options(CLI::App* sub, FitOptions& o) {
    sub->add_option("--panel", o.panel, "yield panel CSV")->required();
    sub->add_option("--levels", o.levels, "comma-separated levels, innermost first");
    sub->add_flag("--no-covariates", o.no_covariates, "intercepts only");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multilevel yield variance decomposition and rainfall index insurance pricing", "yieldrisk"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    g.warn = &err;
    app.add_option("--config", g.config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "random seed");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--workers", g.workers, "worker threads (default: available parallelism)");
    app.add_option("--format", g.format, "report format")->check(CLI::IsMember({"csv", "json", "text"}));

    SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic yield panel and rainfall records");
    simulate->add_option("--villages", sim.villages);
    simulate->add_option("--times", sim.times);
    simulate->add_option("--households", sim.households, "households per village");
    simulate->add_option("--parcels", sim.parcels, "parcels per household");
    simulate->add_option("--coverage", sim.coverage, "probability a parcel is observed in a season");
    simulate->add_option("--mu", sim.mu);
    simulate->add_option("--variances", sim.variances, "six level variances")->delimiter(',');
    simulate->add_option("--rain-villages", sim.rain_villages);
    simulate->add_option("--rain-years", sim.rain_years);
    simulate->add_option("--western-fraction", sim.western_fraction);
    simulate->add_option("--calibrate", sim.calibrate, "reference contract whose fair premium to target");
    simulate->add_option("--target-premium", sim.target_premium, "fair premium target in Rs");
    simulate->add_option("--rain-sd", sim.rain_sd, "phase total standard deviations")->delimiter(',');

    FitOptions fo;
    auto* fit_ols_cmd = app.add_subcommand("fit-ols", "least squares with season fixed effects");
    auto* fit_mle_cmd = app.add_subcommand("fit-mle", "maximum likelihood multilevel fit");
    auto* fit_bayes_cmd = app.add_subcommand("fit-bayes", "Gibbs sampler multilevel fit");
    auto* profile_cmd = app.add_subcommand("profile", "zeta profiles around the maximum likelihood fit");
    for (auto* sub : {fit_ols_cmd, fit_mle_cmd, fit_bayes_cmd, profile_cmd}) add_fit_options(sub, fo);
    fit_bayes_cmd->add_option("--burn-in", fo.burn_in);
    fit_bayes_cmd->add_option("--keep", fo.keep);
    fit_bayes_cmd->add_option("--thin", fo.thin);
    fit_bayes_cmd->add_option("--chains", fo.chains);
    fit_bayes_cmd->add_flag("--store-effects", fo.store_effects, "keep group effect draws");
    fit_bayes_cmd->add_flag("--no-group-moves", fo.no_group_moves, "plain single-site sweeps");
    fit_bayes_cmd->add_flag("--dic-variance-form", fo.dic_variance_form, "p_D as half the deviance variance");
    fit_bayes_cmd->add_option("--histogram-bins", fo.histogram_bins)->check(CLI::PositiveNumber);
    profile_cmd->add_option("--parameter", fo.parameters, "variance level or coefficient label (repeatable)");
    profile_cmd->add_option("--points", fo.points);
    profile_cmd->add_option("--half-width", fo.half_width, "grid half-width in standard errors");

    DecomposeOptions dec;
    auto* decompose_cmd = app.add_subcommand("decompose", "ICCs and variance shares");
    decompose_cmd->add_option("--fit", dec.fits, "fit JSON (repeatable)")->check(CLI::ExistingFile);
    decompose_cmd->add_option("--variances", dec.variances, "six comma-separated variances (repeatable)");
    decompose_cmd->add_option("--name", dec.names, "column names (repeatable)");

    PriceOptions po;
    auto* price_cmd = app.add_subcommand("price", "fair premia and payout probabilities");
    price_cmd->add_option("--rainfall", po.rainfall, "daily rainfall CSV")->required();
    price_cmd->add_option("--contract", po.contracts, "contract JSON (repeatable)")->check(CLI::ExistingFile);
    price_cmd->add_option("--reference", po.references, "built-in contract label (repeatable)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::Success&) {
        const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        out << sub->help();
        return 0;
    } catch (const CLI::ParseError& e) {
        nlohmann::ordered_json j;
        j["error"] = "usage_error";
        j["message"] = e.what();
        j["exit_code"] = 2;
        err << j.dump() << "\n";
        return 2;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(g, sim, out);
        if (fit_ols_cmd->parsed()) return cmd_fit(Method::ols, g, fo, out);
        if (fit_mle_cmd->parsed()) return cmd_fit(Method::mle, g, fo, out);
        if (fit_bayes_cmd->parsed()) return cmd_fit(Method::bayes, g, fo, out);
        if (profile_cmd->parsed()) return cmd_profile(g, fo, out);
        if (decompose_cmd->parsed()) return cmd_decompose(g, dec, out);
        if (price_cmd->parsed()) return cmd_price(g, po, out);
    } catch (const Error& e) {
        err << error_to_json(e) << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        err << error_to_json(e) << "\n";
        return 1;
    }
    return 2;
}

}  // namespace yieldrisk
