#include <doctest.h>

#include <algorithm>

#include "cosmoforge/classdist.hpp"
#include "cosmoforge/error.hpp"
#include "cosmoforge/prng.hpp"
#include "test_support.hpp"

using namespace cosmoforge;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

const ClassDistribution kTraining({25775, 35738, 65});
const ClassDistribution kGenerated({920, 2064, 16});

}  // namespace

TEST_SUITE("classdist") {
  TEST_CASE("parse_class") {
    CHECK(parse_class("spiral") == GalaxyClass::Spiral);
    CHECK(parse_class("Elliptical") == GalaxyClass::Elliptical);
    CHECK(parse_class("Eliptical") == GalaxyClass::Elliptical);
    CHECK(parse_class("IRREGULAR") == GalaxyClass::Irregular);
    CHECK(code_of([] { parse_class("lenticular"); }) == ErrorCode::UnknownClass);
  }

  TEST_CASE("reference class counts use truncated percentages") {
    CHECK(kTraining.total() == 61578);
    CHECK(kTraining.percentage(GalaxyClass::Spiral).str() == "41.8");
    CHECK(kTraining.percentage(GalaxyClass::Elliptical).str() == "58.0");
    CHECK(kTraining.percentage(GalaxyClass::Irregular).str() == "0.1");
    CHECK(kGenerated.percentage(GalaxyClass::Spiral).str() == "30.6");
    CHECK(kGenerated.percentage(GalaxyClass::Elliptical).str() == "68.8");
    CHECK(kGenerated.percentage(GalaxyClass::Irregular).str() == "0.5");
    CHECK(code_of([] { ClassDistribution({0, 0, 0}); }) == ErrorCode::EmptyLabels);
  }

  TEST_CASE("truncated percentages sum close to 100") {
    Prng rng(71);
    for (int i = 0; i < 500; ++i) {
      const ClassDistribution d({rng.bounded(100000), rng.bounded(100000), 1 + rng.bounded(1000)});
      std::uint64_t tenths = 0;
      for (const auto c : kAllClasses) tenths += d.percentage(c).value;
      REQUIRE(tenths <= 1000);
      REQUIRE(tenths >= 997);
    }
  }

  TEST_CASE("tvd and chi2") {
    // Hand sum of half the absolute proportion differences.
    const double tvd = 0.5 * (std::abs(25775.0 / 61578 - 920.0 / 3000) +
                              std::abs(35738.0 / 61578 - 2064.0 / 3000) +
                              std::abs(65.0 / 61578 - 16.0 / 3000));
    CHECK(total_variation(kTraining, kGenerated) == doctest::Approx(tvd).epsilon(1e-12));
    CHECK(total_variation(kTraining, kGenerated) == doctest::Approx(0.1119).epsilon(1e-3));
    CHECK(total_variation(kTraining, kGenerated) == total_variation(kGenerated, kTraining));

    double chi2 = 0.0;
    const double observed[3] = {25775, 35738, 65};
    const double expected_share[3] = {920.0 / 3000, 2064.0 / 3000, 16.0 / 3000};
    for (int i = 0; i < 3; ++i) {
      const double e = expected_share[i] * 61578;
      chi2 += (observed[i] - e) * (observed[i] - e) / e;
    }
    CHECK(chi_square(kTraining, kGenerated) == doctest::Approx(chi2).epsilon(1e-10));

    const auto self = compare(kTraining, kTraining);
    CHECK(self.tvd == 0.0);
    REQUIRE(self.chi2);
    CHECK(*self.chi2 == 0.0);

    const ClassDistribution only_spiral({5, 0, 0});
    const ClassDistribution only_irregular({0, 0, 9});
    const auto disjoint = compare(only_spiral, only_irregular);
    CHECK(disjoint.tvd == 1.0);
    CHECK_FALSE(disjoint.chi2);
    CHECK(code_of([&] { chi_square(only_spiral, only_irregular); }) == ErrorCode::ZeroExpected);
  }

  TEST_CASE("tvd range on random distributions") {
    Prng rng(72);
    for (int i = 0; i < 200; ++i) {
      const ClassDistribution a({rng.bounded(50), rng.bounded(50), 1 + rng.bounded(50)});
      const ClassDistribution b({rng.bounded(50), 1 + rng.bounded(50), rng.bounded(50)});
      const double t = total_variation(a, b);
      REQUIRE(t >= 0.0);
      REQUIRE(t <= 1.0);
      REQUIRE(t == total_variation(b, a));
      REQUIRE(total_variation(a, a) == 0.0);
    }
  }

  TEST_CASE("tally is permutation invariant") {
    std::vector<Label> labels = {{"a", "spiral"}, {"b", "elliptical"}, {"c", "Eliptical"},
                                 {"d", "irregular"}, {"e", "spiral"}, {"f", "spiral"}};
    const ClassDistribution d = tally(labels);
    CHECK(d.counts() == std::array<std::uint64_t, 3>{3, 2, 1});
    Prng rng(73);
    for (int i = 0; i < 20; ++i) {
      for (std::size_t k = labels.size() - 1; k > 0; --k)
        std::swap(labels[k], labels[rng.bounded(k + 1)]);
      REQUIRE(tally(labels) == d);
    }
    CHECK(code_of([] { tally({}); }) == ErrorCode::EmptyLabels);
    CHECK(code_of([] { tally({{"x", "blob"}}); }) == ErrorCode::UnknownClass);
  }

  TEST_CASE("labels csv") {
    const auto labels = parse_labels_csv("\xEF\xBB\xBFid,class\r\nimg0001,spiral\r\n\"img,2\",Elliptical\n");
    REQUIRE(labels.size() == 2);
    CHECK(labels[0] == Label{"img0001", "spiral"});
    CHECK(labels[1] == Label{"img,2", "Elliptical"});
    CHECK(code_of([] { parse_labels_csv("name,label\na,spiral\n"); }) == ErrorCode::MalformedFile);
    CHECK(code_of([] { parse_labels_csv("id,class\nonlyone\n"); }) == ErrorCode::MalformedFile);
    CHECK(parse_labels_csv("id,class\n").empty());
  }

  TEST_CASE("render_table and json") {
    const std::string table = render_table({{"training", kTraining}, {"generated", kGenerated}});
    CHECK(table.find("25775 (41.8%)") != std::string::npos);
    CHECK(table.find("920 (30.6%)") != std::string::npos);
    CHECK(table.find("16 (0.5%)") != std::string::npos);
    const auto j = distribution_to_json(kTraining);
    CHECK(j["total"] == 61578);
  }
}
