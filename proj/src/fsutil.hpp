#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ecsflow {

std::string read_text_file(const std::filesystem::path& path);
std::vector<uint8_t> read_binary_file(const std::filesystem::path& path);

// write-temp-then-rename so partially written outputs are never observed
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

uint64_t fnv1a64(const uint8_t* data, size_t n, uint64_t h = 0xcbf29ce484222325ULL);
uint64_t fnv1a64_str(const std::string& s, uint64_t h = 0xcbf29ce484222325ULL);
uint64_t fnv1a64_file(const std::filesystem::path& path, uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(uint64_t v);

// Rows of comma-separated fields. No quoting support: the formats written
// by this project never embed commas in fields. Trailing \r is stripped.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

// image files under dir, lexicographically sorted by filename
std::vector<std::filesystem::path> list_image_files(const std::filesystem::path& dir);

}  // namespace ecsflow
