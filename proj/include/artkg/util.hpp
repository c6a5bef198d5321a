#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>

namespace artkg {

using Rng = std::mt19937_64;

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t splitmix64(std::uint64_t x);

/// Per-stage seed: the stage name is hashed into the global seed.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view stage);

std::string hex64(std::uint64_t v);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);
double parse_double(std::string_view text);

std::string read_file(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string to_lower_ascii(std::string_view s);

}  // namespace artkg
