#include "cosmoforge/prep.hpp"

#include <algorithm>
#include <cstdio>

#include "cosmoforge/digest.hpp"
#include "cosmoforge/error.hpp"
#include "cosmoforge/image_io.hpp"
#include "cosmoforge/parallel.hpp"
#include "cosmoforge/prng.hpp"
#include "cosmoforge/raster.hpp"

namespace cosmoforge {

namespace fs = std::filesystem;

std::string_view to_string(PrepStatus status) noexcept {
  switch (status) {
    case PrepStatus::Kept: return "kept";
    case PrepStatus::DiscardedSmall: return "discarded_small";
    case PrepStatus::DiscardedMalformed: return "discarded_malformed";
  }
  return "unknown";
}

std::vector<fs::path> list_candidates(const fs::path& input_dir) {
  std::error_code ec;
  if (!fs::is_directory(input_dir, ec)) {
    throw Error(ErrorCode::IoError, "not a directory: " + input_dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(input_dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    return a.generic_string() < b.generic_string();
  });
  return files;
}

namespace {

struct Processed {
  ManifestEntry entry;
  Bytes png;
};

Processed process_one(const fs::path& source, std::size_t candidate_index,
                      const PrepOptions& options) {
  Processed result;
  result.entry.source_path = source.generic_string();
  std::optional<Raster> raster;
  try {
    raster = read_image(source);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError) throw;
    result.entry.status = PrepStatus::DiscardedMalformed;
    return result;
  }
  result.entry.original_w = raster->width();
  result.entry.original_h = raster->height();
  if (std::min(raster->width(), raster->height()) < options.min_side) {
    result.entry.status = PrepStatus::DiscardedSmall;
    return result;
  }
  Raster out = resize_bilinear(center_square_crop(*raster), options.target_side,
                               options.target_side);
  if (options.hue_jitter_probability > 0.0) {
    out = hue_jitter(out, derive_seed(options.seed, candidate_index),
                     {options.hue_jitter_probability,
                      options.hue_jitter_max_shift_deg});
  }
  result.entry.status = PrepStatus::Kept;
  result.png = encode_png(out);
  result.entry.sha256 = sha256_hex(result.png);
  return result;
}

std::string index_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu.png", index);
  return buf;
}

}  // namespace

nlohmann::ordered_json manifest_to_json(const std::vector<ManifestEntry>& entries) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json j;
    j["source_path"] = e.source_path;
    j["output_path"] = e.output_path ? nlohmann::ordered_json(*e.output_path)
                                     : nlohmann::ordered_json(nullptr);
    j["original_w"] = e.original_w ? nlohmann::ordered_json(*e.original_w)
                                   : nlohmann::ordered_json(nullptr);
    j["original_h"] = e.original_h ? nlohmann::ordered_json(*e.original_h)
                                   : nlohmann::ordered_json(nullptr);
    j["status"] = to_string(e.status);
    j["sha256"] = e.sha256 ? nlohmann::ordered_json(*e.sha256)
                           : nlohmann::ordered_json(nullptr);
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<ManifestEntry> prepare_dataset(const fs::path& input_dir,
                                           const fs::path& output_dir,
                                           const PrepOptions& options) {
  if (options.target_side < 16) {
    throw Error(ErrorCode::InvalidParameter, "target side must be >= 16");
  }
  if (options.min_side < 1) {
    throw Error(ErrorCode::InvalidParameter, "min side must be >= 1");
  }
  const auto candidates = list_candidates(input_dir);
  if (candidates.empty()) {
    throw Error(ErrorCode::EmptyInput, "no files in " + input_dir.string());
  }

  std::vector<Processed> processed(candidates.size());
  parallel_for(candidates.size(), options.workers, [&](std::size_t i) {
    processed[i] = process_one(candidates[i], i, options);
  });

  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec) {
    throw Error(ErrorCode::IoError,
                "cannot create " + output_dir.string() + ": " + ec.message());
  }

  std::vector<ManifestEntry> manifest;
  manifest.reserve(processed.size());
  std::size_t kept = 0;
  for (auto& p : processed) {
    if (p.entry.status == PrepStatus::Kept) {
      const fs::path out = output_dir / index_name(kept++);
      write_file(out, p.png);
      p.entry.output_path = out.generic_string();
    }
    manifest.push_back(std::move(p.entry));
  }

  const std::string text = manifest_to_json(manifest).dump(2) + "\n";
  write_file(output_dir / options.manifest_name,
             {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  return manifest;
}

}  // namespace cosmoforge
