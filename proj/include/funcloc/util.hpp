// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

namespace funcloc {

/// Reads a whole file as bytes. Throws Error{Io} naming the path on failure.
std::string read_file(const std::filesystem::path& path);

/// Writes bytes to a file, creating parent directories as needed.
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Lowercase hex SHA-256 of the input bytes.
std::string sha256_hex(std::string_view bytes);

bool is_blank(std::string_view text) noexcept;

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The first exception
/// thrown by any task is rethrown after all threads have joined.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace funcloc
