#include <gtest/gtest.h>

#include "../support/properties.hpp"

using sci::props::all_properties;
using sci::props::Property;

namespace sci::props {
void PrintTo(const Property& p, std::ostream* os) { *os << p.module << "/" << p.name; }
}  // namespace sci::props

class PropertySuite : public ::testing::TestWithParam<Property> {};

TEST_P(PropertySuite, Holds) {
  const auto r = GetParam().run();
  EXPECT_TRUE(r.passed()) << r.name << ": " << r.failures << " of " << r.cases
                          << " cases failed (allowed " << r.allowed_failures
                          << "); first: " << r.first_failure;
  RecordProperty("cases", static_cast<int>(r.cases));
}

INSTANTIATE_TEST_SUITE_P(All, PropertySuite, ::testing::ValuesIn(all_properties()),
                         [](const ::testing::TestParamInfo<Property>& info) {
                           return info.param.module + "_" + info.param.name;
                         });
