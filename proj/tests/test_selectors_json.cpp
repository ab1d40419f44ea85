#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstdlib>
#include <random>

#include <json.hpp>

#include "nd/divergence.hpp"
#include "nd/error.hpp"
#include "nd/json_io.hpp"
#include "nd/selectors.hpp"
#include "support.hpp"

namespace nd {
namespace {

ErrorCode error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

class SelectorTest : public ::testing::Test {
 protected:
  // Three layers, classes c0 and c1, four instances.
  ActivationStore store = testing::make_store({{{1}, {2}, {3}, {4}}, {{1}, {2}, {3}, {4}}, {{1}, {2}, {3}, {4}}},
                                              {0, 0, 1, 1}, 2);
};

TEST_F(SelectorTest, Instances) {
  EXPECT_EQ(selectors::parse_instance(store, "3"), InstanceId{3});
  EXPECT_EQ(error_of([&] { selectors::parse_instance(store, "4"); }), ErrorCode::UnknownInstance);
  EXPECT_EQ(error_of([&] { selectors::parse_instance(store, "99999999999"); }), ErrorCode::UnknownInstance);
  for (const char* bad : {"", "-1", "+1", "1x", " 1", "one", "1.0"}) {
    EXPECT_EQ(error_of([&] { selectors::parse_instance(store, bad); }), ErrorCode::MalformedSpec) << bad;
  }
}

TEST_F(SelectorTest, Subsets) {
  const auto cls = selectors::parse_subset(store, "class:c1");
  ASSERT_TRUE(std::holds_alternative<ClassSubset>(cls));
  EXPECT_EQ(std::get<ClassSubset>(cls).id, ClassId{1});
  const auto single = selectors::parse_subset(store, "instance:2");
  ASSERT_TRUE(std::holds_alternative<SingleSubset>(single));
  EXPECT_EQ(std::get<SingleSubset>(single).id, InstanceId{2});
  EXPECT_EQ(error_of([&] { selectors::parse_subset(store, "class:nope"); }), ErrorCode::UnknownClass);
  EXPECT_EQ(error_of([&] { selectors::parse_subset(store, "class:"); }), ErrorCode::MalformedSpec);
  EXPECT_EQ(error_of([&] { selectors::parse_subset(store, "c1"); }), ErrorCode::MalformedSpec);
  EXPECT_EQ(error_of([&] { selectors::parse_subset(store, "median:c1"); }), ErrorCode::MalformedSpec);
}

TEST_F(SelectorTest, SortKeys) {
  const auto median = selectors::parse_sort_key(store, "median:c0");
  ASSERT_TRUE(std::holds_alternative<SortItem>(median));
  EXPECT_EQ(std::get<ClassMedianItem>(std::get<SortItem>(median)).id, ClassId{0});

  const auto diff = selectors::parse_sort_key(store, "diff:instance:1,median:c1");
  ASSERT_TRUE(std::holds_alternative<DifferenceKey>(diff));
  const auto& d = std::get<DifferenceKey>(diff);
  EXPECT_EQ(std::get<InstanceItem>(d.a).id, InstanceId{1});
  EXPECT_EQ(std::get<ClassMedianItem>(d.b).id, ClassId{1});

  const auto diff2 = std::get<DifferenceKey>(selectors::parse_sort_key(store, "diff:median:c0,instance:3"));
  EXPECT_EQ(std::get<ClassMedianItem>(diff2.a).id, ClassId{0});
  EXPECT_EQ(std::get<InstanceItem>(diff2.b).id, InstanceId{3});

  for (const char* bad : {"", "diff:", "diff:median:c0", "diff:median:c0;median:c1", "max:c0", "instance:"}) {
    EXPECT_EQ(error_of([&] { selectors::parse_sort_key(store, bad); }), ErrorCode::MalformedSpec) << bad;
  }
  EXPECT_EQ(error_of([&] { selectors::parse_sort_key(store, "diff:median:zz,median:c0"); }),
            ErrorCode::UnknownClass);
}

TEST_F(SelectorTest, Directions) {
  EXPECT_EQ(selectors::parse_direction("asc"), Direction::ascending);
  EXPECT_EQ(selectors::parse_direction("desc"), Direction::descending);
  EXPECT_EQ(error_of([] { selectors::parse_direction("up"); }), ErrorCode::MalformedSpec);
}

TEST_F(SelectorTest, Layers) {
  EXPECT_EQ(selectors::parse_layers(store, "layer_2,layer_0"), (std::vector<LayerId>{LayerId{2}, LayerId{0}}));
  EXPECT_EQ(error_of([&] { selectors::parse_layers(store, ""); }), ErrorCode::EmptyLayerList);
  EXPECT_EQ(error_of([&] { selectors::parse_layers(store, "layer_0,layer_0"); }), ErrorCode::DuplicateLayer);
  EXPECT_EQ(error_of([&] { selectors::parse_layers(store, "bogus"); }), ErrorCode::UnknownLayer);
  EXPECT_EQ(error_of([&] { selectors::parse_layers(store, "layer_0,"); }), ErrorCode::MalformedSpec);
}

TEST(JsonTest, FloatNumbersRoundTripThroughText) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::uint32_t> bits;
  int checked = 0;
  while (checked < 20000) {
    const float value = std::bit_cast<float>(bits(rng));
    if (!std::isfinite(value)) continue;
    const std::string text = nlohmann::json(json_io::float_number(value)).dump();
    ASSERT_EQ(std::strtof(text.c_str(), nullptr), value) << text;
    ++checked;
  }
  EXPECT_EQ(nlohmann::json(json_io::float_number(0.1f)).dump(), "0.1");
  EXPECT_EQ(nlohmann::json(json_io::float_number(3.0f)).dump(), "3.0");
}

TEST(JsonTest, BodyIsCompactWithTrailingNewline) {
  EXPECT_EQ(json_io::body({{"a", 1}}), "{\"a\":1}\n");
}

TEST(JsonTest, DivergenceReportShape) {
  const auto store = testing::make_store({{{1, 2}, {3, 4}}, {{5}, {6}}}, {0, 1}, 2);
  const auto report = score_instance(store, InstanceId{0}, ClassId{1}, default_divergence_params(store));
  const auto json = json_io::divergence_report(store, report);
  EXPECT_EQ(json["instance"], 0);
  EXPECT_EQ(json["class"], "c1");
  EXPECT_EQ(json["divergence"].get<double>(), report.divergence);
  ASSERT_EQ(json["layers"].size(), 2u);
  EXPECT_EQ(json["layers"][0]["layer"], "layer_0");
  EXPECT_EQ(json["layers"][0]["scores"].size(), 2u);
  EXPECT_EQ(json["params"]["layers"], nlohmann::json::array({"layer_0", "layer_1"}));
  EXPECT_EQ(json["params"]["bin_count"], kDefaultBinCount);
}

}  // namespace
}  // namespace nd
