#pragma once

#include <random>
#include <string>
#include <vector>

#include "yieldrisk/data_model.hpp"

namespace yieldrisk::testing {

// Small crossed panel: villages x times seasons, households nested in
// villages, parcels nested in households, each parcel observed in a random
// subset of times. Responses are plain Gaussian noise around a level sum.
inline std::vector<TransformedRecord> small_panel(unsigned seed, int villages = 4, int times = 3,
                                                  int households = 3, int parcels = 2,
                                                  double coverage = 0.8) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> time_eff(static_cast<std::size_t>(times));
    for (auto& t : time_eff) t = 0.5 * z(rng);
    std::vector<TransformedRecord> out;
    for (int v = 0; v < villages; ++v) {
        const double ve = 0.7 * z(rng);
        std::vector<double> season_eff(static_cast<std::size_t>(times));
        for (auto& s : season_eff) s = 0.6 * z(rng);
        for (int h = 0; h < households; ++h) {
            const double he = 0.3 * z(rng);
            for (int p = 0; p < parcels; ++p) {
                const double pe = 0.8 * z(rng);
                for (int t = 0; t < times; ++t) {
                    if (u(rng) > coverage) continue;
                    TransformedRecord r;
                    r.village_id = "v" + std::to_string(v);
                    r.household_id = r.village_id + "h" + std::to_string(h);
                    r.parcel_id = r.household_id + "p" + std::to_string(p);
                    r.time_id = "t" + std::to_string(t);
                    r.crop = Crop(u(rng) < 0.5 ? "rice" : "wheat");
                    for (auto& x : r.x) x = 3.0 + z(rng);
                    r.y = 5.0 + 0.3 * r.x[0] + 0.1 * r.x[1] + time_eff[static_cast<std::size_t>(t)] + ve +
                          season_eff[static_cast<std::size_t>(t)] + he + pe + z(rng);
                    out.push_back(r);
                }
            }
        }
    }
    return out;
}

}  // namespace yieldrisk::testing
