#include <cmath>
#include <random>
#include <sstream>

#include <doctest.h>

#include "yieldrisk/data_model.hpp"
#include "yieldrisk/errors.hpp"

using namespace yieldrisk;

namespace {

const char* kHeader = "parcel_id,household_id,village_id,time_id,crop,yield,labor,fertilizer,mechanization,pesticide\n";

std::vector<YieldRecord> parse(const std::string& body) {
    std::istringstream in(std::string(kHeader) + body);
    return read_yield_panel(in, {}, "panel.csv");
}

}  // namespace

TEST_CASE("ihs reference values") {
    // Closed form ln(v + sqrt(v^2 + 1)) evaluated in long double as the oracle.
    auto oracle = [](long double v) { return static_cast<double>(std::log(v + std::sqrt(v * v + 1.0L))); };
    CHECK(ihs(0.0) == 0.0);
    CHECK(ihs(1.0) == doctest::Approx(0.88137358701954302523).epsilon(1e-15));
    CHECK(ihs(1000.0) == doctest::Approx(7.60090270954198861152).epsilon(1e-15));
    CHECK(ihs(1e9) == doctest::Approx(21.4164130175063564658).epsilon(1e-15));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> logv(-6.0, 9.0);
    for (int i = 0; i < 1000; ++i) {
        const double v = std::pow(10.0, logv(rng));
        CHECK(ihs(v) == doctest::Approx(oracle(v)).epsilon(1e-14));
    }
}

TEST_CASE("ihs is strictly increasing and rejects bad input") {
    double prev = ihs(0.0);
    for (double v = 0.001; v < 1e6; v *= 1.37) {
        const double cur = ihs(v);
        CHECK(cur > prev);
        prev = cur;
    }
    CHECK_THROWS_AS(ihs(-1.0), DomainError);
    CHECK_THROWS_AS(ihs(std::nan("")), DomainError);
    CHECK_THROWS_AS(ihs(INFINITY), DomainError);
}

TEST_CASE("crop ordering puts the named crops first") {
    std::vector<Crop> crops = {Crop("cotton"), Crop("barley"), Crop("rice"), Crop("maize"), Crop("sorghum"),
                               Crop("wheat"), Crop("apple")};
    std::sort(crops.begin(), crops.end());
    std::vector<std::string> names;
    for (const auto& c : crops) names.push_back(c.name());
    CHECK(names == std::vector<std::string>{"rice", "sorghum", "wheat", "maize", "cotton", "apple", "barley"});
    CHECK(Crop("Rice") == Crop("rice"));
}

TEST_CASE("yield panel round trip") {
    auto records = parse(
        "p1,h1,v1,2009,rice,1500.5,300,50,1000,20\n"
        "p1,h1,v1,2010,wheat,0,10,0,0,0\n"
        "p2,h2,v2,2009,cotton,1e3,1,2,3,4\n");
    REQUIRE(records.size() == 3);
    CHECK(records[0].yield_raw == 1500.5);
    CHECK(records[1].crop.name() == "wheat");
    std::ostringstream out;
    write_yield_panel(out, records);
    std::istringstream in(out.str());
    auto again = read_yield_panel(in);
    CHECK(again == records);
}

TEST_CASE("schema mapping renames columns") {
    std::istringstream in(
        "plot,hh,vil,year,crop,kg,labour,fert,mech,pest\n"
        "p1,h1,v1,2009,rice,10,1,2,3,4\n");
    ColumnSchema schema;
    schema.columns = {{"parcel_id", "plot"}, {"household_id", "hh"}, {"village_id", "vil"},
                      {"time_id", "year"},   {"yield", "kg"},        {"labor", "labour"},
                      {"fertilizer", "fert"}, {"mechanization", "mech"}, {"pesticide", "pest"}};
    auto r = read_yield_panel(in, schema);
    REQUIRE(r.size() == 1);
    CHECK(r[0].parcel_id == "p1");
    CHECK(r[0].pesticide == 4.0);
}

TEST_CASE("malformed rows name the offending line") {
    std::istringstream missing("parcel_id,household_id,village_id,time_id,crop,yield\n");
    CHECK_THROWS_AS(read_yield_panel(missing), SchemaError);

    try {
        parse("p1,h1,v1,2009,rice,10,1,2,3,4\np2,h1,v1,2009,rice,-5,1,2,3,4\n");
        FAIL("negative yield accepted");
    } catch (const RowError& e) {
        CHECK(e.line() == 3);
    }
    try {
        parse("p1,h1,v1,2009,rice,10,1,2,3,4\np1,h1,v1,2009,rice,11,1,2,3,4\n");
        FAIL("duplicate row accepted");
    } catch (const RowError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
    }
    try {
        parse("p1,h1,v1,2009,rice,abc,1,2,3,4\n");
        FAIL("non-numeric yield accepted");
    } catch (const RowError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("nesting violations are consistency errors") {
    CHECK_THROWS_AS(parse("p1,h1,v1,2009,rice,10,1,2,3,4\np1,h2,v1,2010,rice,10,1,2,3,4\n"), ConsistencyError);
    CHECK_THROWS_AS(parse("p1,h1,v1,2009,rice,10,1,2,3,4\np2,h1,v2,2010,rice,10,1,2,3,4\n"), ConsistencyError);
}

TEST_CASE("transform applies ihs to yield and inputs") {
    auto records = parse("p1,h1,v1,2009,rice,1000,1,0,3,4\n");
    auto t = transform_panel(records);
    REQUIRE(t.size() == 1);
    CHECK(t[0].y == doctest::Approx(7.60090270954198861152).epsilon(1e-15));
    CHECK(t[0].x[0] == doctest::Approx(0.88137358701954302523).epsilon(1e-15));
    CHECK(t[0].x[1] == 0.0);
}

TEST_CASE("dates are strict ISO") {
    CHECK(format_date(parse_date("2010-06-03")) == "2010-06-03");
    CHECK_THROWS_AS(parse_date("2010-6-3"), DomainError);
    CHECK_THROWS_AS(parse_date("2010-02-30"), DomainError);
    CHECK_THROWS_AS(parse_date("03/06/2010"), DomainError);
}

TEST_CASE("rainfall grouping, round trip and gap warnings") {
    std::ostringstream body;
    body << "village_id,date,rain_mm,region\n";
    for (int d = 1; d <= 30; ++d) {
        if (d == 10 || d == 11) continue;
        body << "a,2010-06-" << (d < 10 ? "0" : "") << d << ",1.5,eastern_central\n";
    }
    body << "b,2011-07-01,2,western\n";
    std::istringstream in(body.str());
    auto series = read_rainfall(in, "rain.csv");
    REQUIRE(series.size() == 2);
    CHECK(series[0].village_id == "a");
    CHECK(series[0].observations.size() == 28);
    CHECK(series[0].monsoon_start() == make_date(2010, 6, 1));
    CHECK(series[1].monsoon_start() == make_date(2011, 7, 1));
    CHECK_FALSE(series[0].warnings.empty());

    std::ostringstream out;
    write_rainfall(out, series);
    std::istringstream again(out.str());
    auto back = read_rainfall(again);
    REQUIRE(back.size() == 2);
    CHECK(back[0].observations.size() == series[0].observations.size());
    CHECK(back[1].region == Region::western);
}

TEST_CASE("rainfall rejects duplicate dates and unknown regions") {
    std::istringstream dup("village_id,date,rain_mm,region\na,2010-06-01,1,eastern_central\na,2010-06-01,2,eastern_central\n");
    CHECK_THROWS_AS(read_rainfall(dup), RowError);
    std::istringstream region("village_id,date,rain_mm,region\na,2010-06-01,1,north\n");
    CHECK_THROWS_AS(read_rainfall(region), RowError);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_rainfall(empty), SchemaError);
}
