#pragma once

#include "echlab/ellipsoid.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace echlab {

// Spectrum memoization files; layout in docs/cache-format.md.
inline constexpr std::uint32_t kSpectrumCacheVersion = 1;

// ECHLAB_CACHE_DIR when set and non-empty.
std::optional<std::filesystem::path> cache_dir_from_env();

// "a=<21 digits>;b=<21 digits>;formal=<0|1>"
std::string spectrum_cache_key(const Ellipsoid& e, bool formal);
std::filesystem::path spectrum_cache_path(const std::filesystem::path& dir, const std::string& key);

void write_spectrum_file(const std::filesystem::path& p, const std::string& key, bool formal,
                         const std::vector<SpectrumEntry>& entries);
// nullopt on a missing, foreign, stale or corrupt file.
std::optional<std::vector<SpectrumEntry>> read_spectrum_file(const std::filesystem::path& p, const Ellipsoid& e,
                                                             const std::string& key);

// spectrum_prefix, served from and stored into dir when given.
std::vector<SpectrumEntry> cached_spectrum_prefix(const Ellipsoid& e, std::size_t count, const SpectrumOptions& opt,
                                                  const std::optional<std::filesystem::path>& dir);

}  // namespace echlab
