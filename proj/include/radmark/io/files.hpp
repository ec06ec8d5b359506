#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace radmark {

// Throws ConfigError when the file cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);

// Writes to a sibling temporary, fsyncs, then renames over the target.
// Readers observe either the old or the new content, never a torn file.
// Throws ServiceError on I/O failure; the target is left untouched.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file_atomic(const std::filesystem::path& path, std::string_view text);

// fsync on a directory so a completed rename survives a crash.
void sync_directory(const std::filesystem::path& dir);

} // namespace radmark
