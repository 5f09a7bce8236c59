#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace cosmoforge {

enum class GalaxyClass { Spiral = 0, Elliptical = 1, Irregular = 2 };

inline constexpr std::size_t kClassCount = 3;
inline constexpr std::array<GalaxyClass, kClassCount> kAllClasses = {
    GalaxyClass::Spiral, GalaxyClass::Elliptical, GalaxyClass::Irregular};

std::string_view to_string(GalaxyClass c) noexcept;

// Case-insensitive; accepts "eliptical" as an alias. Throws UnknownClass.
GalaxyClass parse_class(std::string_view name);

// Percentage in tenths of a percent, truncated: floor(1000 * count / total).
struct Tenths {
  std::uint64_t value = 0;
  std::string str() const;  // e.g. "41.8"
};

class ClassDistribution {
 public:
  explicit ClassDistribution(std::array<std::uint64_t, kClassCount> counts);

  std::uint64_t count(GalaxyClass c) const noexcept {
    return counts_[static_cast<std::size_t>(c)];
  }
  const std::array<std::uint64_t, kClassCount>& counts() const noexcept {
    return counts_;
  }
  std::uint64_t total() const noexcept { return total_; }
  Tenths percentage(GalaxyClass c) const noexcept;
  double fraction(GalaxyClass c) const noexcept;

  friend bool operator==(const ClassDistribution&, const ClassDistribution&) = default;

 private:
  std::array<std::uint64_t, kClassCount> counts_;
  std::uint64_t total_;
};

using Label = std::pair<std::string, std::string>;  // (image id, class name)

ClassDistribution tally(const std::vector<Label>& labels);

// Total variation distance between the two class proportions.
double total_variation(const ClassDistribution& a, const ClassDistribution& b);

// Pearson chi-square of a's counts against b's proportions scaled to a's
// total. Classes with zero expected and zero observed count are skipped;
// zero expected with a nonzero observation throws ZeroExpected.
double chi_square(const ClassDistribution& a, const ClassDistribution& b);

struct Comparison {
  double tvd = 0.0;
  std::optional<double> chi2;  // absent when chi_square would throw
};

Comparison compare(const ClassDistribution& a, const ClassDistribution& b);

// Labels CSV with header "id,class".
std::vector<Label> parse_labels_csv(std::string_view text);
std::vector<Label> load_labels_csv(const std::filesystem::path& path);

// Table rows "<name>  <count> (<pct>%) ..." in class order.
std::string render_table(
    const std::vector<std::pair<std::string, ClassDistribution>>& rows);

nlohmann::ordered_json distribution_to_json(const ClassDistribution& d);

}  // namespace cosmoforge
