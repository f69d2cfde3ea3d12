#include <algorithm>
#include <cmath>
#include <limits>

#include "yieldrisk/gibbs.hpp"

namespace yieldrisk {

namespace {

double mean_of(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s / static_cast<double>(n);
}

double variance_of(const double* x, std::size_t n, double m) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (x[i] - m) * (x[i] - m);
    return s / static_cast<double>(n - 1);
}

// Between/within pieces for equal-length sequences.
struct Pooled {
    double w = 0.0;
    double var_plus = 0.0;
};

Pooled pooled(const std::vector<const double*>& seqs, std::size_t n) {
    const auto m = seqs.size();
    std::vector<double> means(m);
    double w = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        means[j] = mean_of(seqs[j], n);
        w += variance_of(seqs[j], n, means[j]);
    }
    w /= static_cast<double>(m);
    double b = 0.0;
    if (m > 1) {
        const double grand = mean_of(means.data(), m);
        for (double mj : means) b += (mj - grand) * (mj - grand);
        b *= static_cast<double>(n) / static_cast<double>(m - 1);
    }
    const double nn = static_cast<double>(n);
    return {w, (nn - 1.0) / nn * w + b / nn};
}

}  // namespace

double split_rhat(const std::vector<std::vector<double>>& chains) {
    if (chains.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::size_t n = chains.front().size();
    for (const auto& c : chains) n = std::min(n, c.size());
    const std::size_t half = n / 2;
    if (half < 2) return std::numeric_limits<double>::quiet_NaN();
    std::vector<const double*> seqs;
    for (const auto& c : chains) {
        seqs.push_back(c.data());
        seqs.push_back(c.data() + (n - half));
    }
    const Pooled p = pooled(seqs, half);
    if (p.w <= 0.0) return p.var_plus <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(p.var_plus / p.w);
}

double effective_sample_size(const std::vector<std::vector<double>>& chains) {
    if (chains.empty()) return 0.0;
    std::size_t n = chains.front().size();
    for (const auto& c : chains) n = std::min(n, c.size());
    if (n < 4) return 0.0;
    const std::size_t m = chains.size();
    std::vector<const double*> seqs;
    std::vector<double> means;
    for (const auto& c : chains) {
        seqs.push_back(c.data());
        means.push_back(mean_of(c.data(), n));
    }
    const Pooled p = pooled(seqs, n);
    const double total = static_cast<double>(m * n);
    if (p.var_plus <= 0.0) return total;

    auto rho = [&](std::size_t lag) {
        double acov = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double* x = seqs[j];
            double s = 0.0;
            for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - means[j]) * (x[i + lag] - means[j]);
            acov += s / static_cast<double>(n);
        }
        acov /= static_cast<double>(m);
        // Within-chain variance with the biased normalization to match acov.
        const double w_biased = p.w * static_cast<double>(n - 1) / static_cast<double>(n);
        return 1.0 - (w_biased - acov) / p.var_plus;
    };

    double tau = -1.0;
    double previous_pair = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
        const double r0 = k == 0 ? 1.0 : rho(2 * k);
        double pair = r0 + rho(2 * k + 1);
        if (pair < 0.0) break;
        pair = std::min(pair, previous_pair);
        previous_pair = pair;
        tau += 2.0 * pair;
    }
    tau = std::max(tau, 1.0 / std::log10(total));
    return total / tau;
}

}  // namespace yieldrisk
