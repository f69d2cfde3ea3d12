#include "yieldrisk/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "yieldrisk/errors.hpp"
#include "yieldrisk/gibbs.hpp"

namespace yieldrisk {

VarianceDecomposition decompose(const VarianceVector& variances, const std::array<bool, 5>& modeled) {
    VarianceDecomposition d;
    d.variances = variances;
    d.modeled = modeled;
    for (std::size_t k = 0; k < variances.size(); ++k) {
        if (!std::isfinite(variances[k]) || variances[k] < 0.0) {
            throw DomainError("variances must be finite and non-negative");
        }
        if (k < 5 && !modeled[k] && variances[k] != 0.0) {
            throw DomainError("a level that is not modelled must carry zero variance");
        }
        d.total += variances[k];
    }
    if (!(d.total > 0.0)) throw DomainError("total variance is zero");

    double cumulative = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
        cumulative += variances[k];
        d.icc[k] = cumulative / d.total;
    }
    for (std::size_t k = 0; k < 6; ++k) d.shares[k] = variances[k] / d.total;
    d.covariate_share = (variances[2] + variances[3] + variances[4]) / d.total;
    d.idiosyncratic_side_share = (variances[0] + variances[1] + variances[5]) / d.total;
    return d;
}

VarianceDecomposition decompose(const FitResult& fit) {
    std::array<bool, 5> modeled{};
    for (std::size_t k = 0; k < 5; ++k) {
        auto it = fit.level_variances.find(kAllLevels[k]);
        modeled[k] = it != fit.level_variances.end() &&
                     (it->second.status == VarianceStatus::estimated ||
                      it->second.status == VarianceStatus::boundary);
    }
    return decompose(fit.variance_vector(), modeled);
}

namespace {

IntervalSummary summarize(std::vector<double> v) {
    IntervalSummary s;
    if (v.empty()) return s;
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    std::sort(v.begin(), v.end());
    auto quantile = [&](double p) {
        const double pos = p * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };
    s.lower = quantile(0.025);
    s.upper = quantile(0.975);
    return s;
}

}  // namespace

PosteriorDecomposition decompose_posterior(const PosteriorDraws& draws) {
    std::array<int, 6> col{};
    std::array<bool, 5> modeled{};
    for (std::size_t k = 0; k < 5; ++k) {
        col[k] = draws.column_index(std::string(to_string(kAllLevels[k])));
        modeled[k] = col[k] >= 0;
    }
    col[5] = draws.column_index("idiosyncratic");
    if (col[5] < 0) throw ConfigError("posterior draws lack the idiosyncratic variance");

    PosteriorDecomposition out;
    const Eigen::Index rows = draws.values.rows();
    out.per_draw.reserve(static_cast<std::size_t>(rows));
    for (Eigen::Index r = 0; r < rows; ++r) {
        VarianceVector v{};
        for (std::size_t k = 0; k < 6; ++k) {
            if (col[k] >= 0) v[k] = draws.values(r, col[k]);
        }
        out.per_draw.push_back(decompose(v, modeled));
    }
    for (std::size_t k = 0; k < 5; ++k) {
        std::vector<double> xs;
        for (const auto& d : out.per_draw) xs.push_back(d.icc[k]);
        out.icc[k] = summarize(std::move(xs));
    }
    for (std::size_t k = 0; k < 6; ++k) {
        std::vector<double> xs;
        for (const auto& d : out.per_draw) xs.push_back(d.shares[k]);
        out.shares[k] = summarize(std::move(xs));
    }
    std::vector<double> cov;
    for (const auto& d : out.per_draw) cov.push_back(d.covariate_share);
    out.covariate_share = summarize(std::move(cov));
    return out;
}

int rounded_percent(double share) { return static_cast<int>(std::lround(100.0 * share)); }

namespace {

constexpr std::array<const char*, 6> kRowNames = {"parcel", "household", "season", "village", "time",
                                                  "idiosyncratic"};

}  // namespace

void write_decomposition_csv(std::ostream& out, const std::vector<std::string>& column_names,
                             const std::vector<VarianceDecomposition>& columns) {
    out << "panel,level";
    for (const auto& c : column_names) out << ',' << c;
    out << '\n';
    auto cell = [&](const VarianceDecomposition& d, std::size_t k, double v) {
        if (k < 5 && !d.modeled[k]) return std::string();
        return format_double(v);
    };
    for (std::size_t k = 0; k < 6; ++k) {
        out << "variance," << kRowNames[k];
        for (const auto& d : columns) out << ',' << cell(d, k, d.variances[k]);
        out << '\n';
    }
    for (std::size_t k = 0; k < 5; ++k) {
        out << "icc," << kRowNames[k];
        for (const auto& d : columns) out << ',' << cell(d, k, d.icc[k]);
        out << '\n';
    }
    for (std::size_t k = 0; k < 6; ++k) {
        out << "share," << kRowNames[k];
        for (const auto& d : columns) out << ',' << cell(d, k, d.shares[k]);
        out << '\n';
    }
    out << "share,covariate";
    for (const auto& d : columns) out << ',' << format_double(d.covariate_share);
    out << '\n';
}

void write_decomposition_text(std::ostream& out, const std::vector<std::string>& column_names,
                              const std::vector<VarianceDecomposition>& columns) {
    char buf[64];
    auto row = [&](const std::string& name, auto&& fmt) {
        std::snprintf(buf, sizeof buf, "%-16s", name.c_str());
        out << buf;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            std::snprintf(buf, sizeof buf, "%12s", fmt(columns[c]).c_str());
            out << buf;
        }
        out << '\n';
    };
    auto fixed3 = [&](double v) {
        char b[32];
        std::snprintf(b, sizeof b, "%.3f", v);
        return std::string(b);
    };
    row("", [&](const VarianceDecomposition& d) {
        const auto idx = static_cast<std::size_t>(&d - columns.data());
        return column_names[idx];
    });
    out << "Panel A: variance parameter estimates\n";
    for (std::size_t k = 0; k < 6; ++k) {
        row(kRowNames[k], [&](const VarianceDecomposition& d) {
            return (k < 5 && !d.modeled[k]) ? std::string() : fixed3(d.variances[k]);
        });
    }
    out << "Panel B: intraclass correlation coefficients\n";
    for (std::size_t k = 0; k < 5; ++k) {
        row(kRowNames[k], [&](const VarianceDecomposition& d) {
            return d.modeled[k] ? fixed3(d.icc[k]) : std::string();
        });
    }
    out << "Panel C: shares of variance from each level\n";
    for (std::size_t k = 0; k < 6; ++k) {
        row(kRowNames[k], [&](const VarianceDecomposition& d) {
            if (k < 5 && !d.modeled[k]) return std::string();
            char b[16];
            std::snprintf(b, sizeof b, "%02d%%", rounded_percent(d.shares[k]));
            return std::string(b);
        });
    }
    row("covariate", [&](const VarianceDecomposition& d) {
        char b[16];
        std::snprintf(b, sizeof b, "%02d%%", rounded_percent(d.covariate_share));
        return std::string(b);
    });
}

}  // namespace yieldrisk
