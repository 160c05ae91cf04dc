#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dimfuse {

/// Reads a whole file; throws DomainError if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// "07" -> 7 for names of the form NN.jpg with NN in 01..20, otherwise nullopt.
std::optional<int> image_ordinal_from_name(std::string_view filename);

/// "NN.jpg" for an ordinal in 1..20.
std::string image_name_for_ordinal(int ordinal);

/// Ordinals of the NN.jpg files present in a site directory, ascending.
/// A missing directory yields an empty list.
std::vector<int> list_image_ordinals(const std::filesystem::path& site_dir);

}  // namespace dimfuse
