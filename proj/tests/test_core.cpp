#include <gtest/gtest.h>

#include "regmarket/core_model.hpp"

using namespace regmarket;

TEST(CoreModel, FiveGeneratorCaseIsValid) {
  EXPECT_TRUE(validate_case(five_generator_case()).empty());
  EXPECT_NO_THROW(require_valid(five_generator_case()));
}

TEST(CoreModel, InvertedLimitsNameTheResource) {
  auto c = five_generator_case();
  c.resources[2].p_min = 110.0;
  auto v = validate_case(c);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].resource_id, "C");
  EXPECT_EQ(v[0].field, "p_min");
}

TEST(CoreModel, CapacityBelowDemandIsReported) {
  auto c = five_generator_case();
  c.resources[4].p_max = 0.0;  // 400 MW left for 420 MW of demand
  auto v = validate_case(c);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].field, "requirements.demand");
  EXPECT_TRUE(v[0].resource_id.empty());
}

TEST(CoreModel, EachBrokenInvariantIsReported) {
  auto c = five_generator_case();
  c.resources[0].ramp = 0.0;
  c.resources[1].offer_energy = -1.0;
  c.resources[3].id = "A";
  c.requirements.reg_capacity_req = -5.0;
  c.params.dispatch_interval_min = 7.0;
  c.forecast_demand = 0.0;
  auto v = validate_case(c);
  std::vector<std::string> fields;
  for (const auto& e : v) fields.push_back(e.field);
  EXPECT_EQ(fields, (std::vector<std::string>{"ramp", "offer_energy", "id", "requirements.reg_capacity_req",
                                              "params.dispatch_interval_min", "forecast_demand"}));
  try {
    require_valid(c);
    FAIL() << "expected InvalidCase";
  } catch (const InvalidCase& e) {
    EXPECT_EQ(e.violations().size(), v.size());
    EXPECT_NE(std::string(e.what()).find("B.offer_energy"), std::string::npos);
  }
}

TEST(CoreModel, AgcPeriodMustDivideTheInterval) {
  auto c = five_generator_case();
  c.params.agc_period_sec = 7.0;
  auto v = validate_case(c);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].field, "params.agc_period_sec");
}

TEST(CoreModel, DeploymentRatioAndIntervals) {
  MarketParams p;
  EXPECT_EQ(p.beta(), 150.0);
  EXPECT_EQ(p.intervals_per_hour(), 12.0);
  EXPECT_NEAR(p.mileage_req_per_interval(80.0), 80.0 / 12.0, 1e-15);
  p.dispatch_interval_min = 10.0;
  p.agc_period_sec = 2.0;
  EXPECT_EQ(p.beta(), 600.0);
}

TEST(CoreModel, SummaryOfConstantSeriesHasZeroVariance) {
  auto s = summarize({19.25, 19.25, 19.25});
  EXPECT_EQ(s.min, 19.25);
  EXPECT_EQ(s.mean, 19.25);
  EXPECT_EQ(s.max, 19.25);
  EXPECT_EQ(s.variance, 0.0);
  EXPECT_EQ(s.count, 3u);
}

TEST(CoreModel, PopulationVariance) {
  auto s = summarize({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.variance, 1.25);
  EXPECT_LE(s.min, s.mean);
  EXPECT_LE(s.mean, s.max);
  EXPECT_EQ(summarize({}).count, 0u);
}
