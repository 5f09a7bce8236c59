#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cosmoforge {

enum class PrepStatus { Kept, DiscardedSmall, DiscardedMalformed };

std::string_view to_string(PrepStatus status) noexcept;

struct ManifestEntry {
  std::string source_path;
  std::optional<std::string> output_path;  // present iff kept
  std::optional<std::size_t> original_w;   // absent when undecodable
  std::optional<std::size_t> original_h;
  PrepStatus status = PrepStatus::DiscardedMalformed;
  std::optional<std::string> sha256;  // present iff kept

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct PrepOptions {
  std::size_t target_side = 256;
  std::size_t min_side = 128;
  // Optional color augmentation applied to kept outputs; 0 disables it.
  double hue_jitter_probability = 0.0;
  double hue_jitter_max_shift_deg = 30.0;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string manifest_name = "manifest.json";
};

// Candidate source files: regular files directly inside `input_dir`, sorted by
// their byte-wise path string.
std::vector<std::filesystem::path> list_candidates(
    const std::filesystem::path& input_dir);

// Crops, resizes and writes every usable image as <index>.png (six-digit
// zero-padded index over kept files, in candidate order), then writes the
// manifest JSON into output_dir.
std::vector<ManifestEntry> prepare_dataset(const std::filesystem::path& input_dir,
                                           const std::filesystem::path& output_dir,
                                           const PrepOptions& options = {});

nlohmann::ordered_json manifest_to_json(const std::vector<ManifestEntry>& entries);

}  // namespace cosmoforge
