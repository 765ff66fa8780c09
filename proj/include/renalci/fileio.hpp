#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace renalci {

/// Whole-file binary read. Throws IoError.
std::string read_file(const std::filesystem::path& path);
/// Truncating binary write. Throws IoError.
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace renalci
