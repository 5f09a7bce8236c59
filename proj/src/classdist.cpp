#include "cosmoforge/classdist.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "cosmoforge/error.hpp"
#include "cosmoforge/image_io.hpp"

namespace cosmoforge {

std::string_view to_string(GalaxyClass c) noexcept {
  switch (c) {
    case GalaxyClass::Spiral: return "spiral";
    case GalaxyClass::Elliptical: return "elliptical";
    case GalaxyClass::Irregular: return "irregular";
  }
  return "unknown";
}

namespace {

std::string trim_lower(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

}  // namespace

GalaxyClass parse_class(std::string_view name) {
  const std::string key = trim_lower(name);
  if (key == "spiral") return GalaxyClass::Spiral;
  if (key == "elliptical" || key == "eliptical") return GalaxyClass::Elliptical;
  if (key == "irregular") return GalaxyClass::Irregular;
  throw Error(ErrorCode::UnknownClass, "unknown galaxy class: " + std::string(name));
}

std::string Tenths::str() const {
  return std::to_string(value / 10) + "." + std::to_string(value % 10);
}

ClassDistribution::ClassDistribution(std::array<std::uint64_t, kClassCount> counts)
    : counts_(counts), total_(0) {
  for (const auto c : counts_) total_ += c;
  if (total_ == 0) throw Error(ErrorCode::EmptyLabels, "class distribution is empty");
}

Tenths ClassDistribution::percentage(GalaxyClass c) const noexcept {
  return {1000 * count(c) / total_};
}

double ClassDistribution::fraction(GalaxyClass c) const noexcept {
  return static_cast<double>(count(c)) / static_cast<double>(total_);
}

ClassDistribution tally(const std::vector<Label>& labels) {
  if (labels.empty()) throw Error(ErrorCode::EmptyLabels, "no labels to tally");
  std::array<std::uint64_t, kClassCount> counts{};
  for (const auto& [id, name] : labels) {
    ++counts[static_cast<std::size_t>(parse_class(name))];
  }
  return ClassDistribution(counts);
}

double total_variation(const ClassDistribution& a, const ClassDistribution& b) {
  double sum = 0.0;
  for (const auto c : kAllClasses) sum += std::abs(a.fraction(c) - b.fraction(c));
  return 0.5 * sum;
}

double chi_square(const ClassDistribution& a, const ClassDistribution& b) {
  double chi2 = 0.0;
  for (const auto c : kAllClasses) {
    const double observed = static_cast<double>(a.count(c));
    const double expected = b.fraction(c) * static_cast<double>(a.total());
    if (expected == 0.0) {
      if (observed == 0.0) continue;
      throw Error(ErrorCode::ZeroExpected,
                  "class " + std::string(to_string(c)) + " has zero expected count");
    }
    chi2 += (observed - expected) * (observed - expected) / expected;
  }
  return chi2;
}

Comparison compare(const ClassDistribution& a, const ClassDistribution& b) {
  Comparison out{total_variation(a, b), std::nullopt};
  try {
    out.chi2 = chi_square(a, b);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ZeroExpected) throw;
  }
  return out;
}

namespace {

// Splits one CSV record; supports double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back().push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        fields.back().push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else {
      fields.back().push_back(ch);
    }
  }
  if (quoted) {
    throw Error(ErrorCode::MalformedFile,
                "labels csv: unterminated quote on line " + std::to_string(line_no));
  }
  return fields;
}

}  // namespace

std::vector<Label> parse_labels_csv(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<Label> labels;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto fields = split_csv_line(line, line_no);
    if (!header_seen) {
      if (fields.size() != 2 || trim_lower(fields[0]) != "id" ||
          trim_lower(fields[1]) != "class") {
        throw Error(ErrorCode::MalformedFile, "labels csv: header must be 'id,class'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 2) {
      throw Error(ErrorCode::MalformedFile,
                  "labels csv: expected 2 fields on line " + std::to_string(line_no));
    }
    labels.emplace_back(std::move(fields[0]), std::move(fields[1]));
  }
  if (!header_seen) throw Error(ErrorCode::MalformedFile, "labels csv: missing header");
  return labels;
}

std::vector<Label> load_labels_csv(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  return parse_labels_csv({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

std::string render_table(
    const std::vector<std::pair<std::string, ClassDistribution>>& rows) {
  auto cell = [](const ClassDistribution& d, GalaxyClass c) {
    return std::to_string(d.count(c)) + " (" + d.percentage(c).str() + "%)";
  };
  char line[256];
  std::ostringstream out;
  std::snprintf(line, sizeof line, "%-12s %-18s %-18s %-18s\n", "set", "spiral",
                "elliptical", "irregular");
  out << line;
  for (const auto& [name, d] : rows) {
    std::snprintf(line, sizeof line, "%-12s %-18s %-18s %-18s\n", name.c_str(),
                  cell(d, GalaxyClass::Spiral).c_str(),
                  cell(d, GalaxyClass::Elliptical).c_str(),
                  cell(d, GalaxyClass::Irregular).c_str());
    out << line;
  }
  return out.str();
}

nlohmann::ordered_json distribution_to_json(const ClassDistribution& d) {
  nlohmann::ordered_json j;
  j["total"] = d.total();
  auto counts = nlohmann::ordered_json::object();
  auto percentages = nlohmann::ordered_json::object();
  for (const auto c : kAllClasses) {
    counts[std::string(to_string(c))] = d.count(c);
    percentages[std::string(to_string(c))] = d.percentage(c).str();
  }
  j["counts"] = std::move(counts);
  j["percentages"] = std::move(percentages);
  return j;
}

}  // namespace cosmoforge
