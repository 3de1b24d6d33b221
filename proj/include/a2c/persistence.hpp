#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "a2c/classifier.hpp"
#include "a2c/rejector.hpp"

namespace a2c {

/// Model file layout:
///   A2CMODL1\n
///   kind = rejector|classifier\n
///   checksum = <crc32 of the body, 8 hex digits>\n
///   <body: sorted `key = value` lines, LF endings>
inline constexpr std::string_view kModelMagic = "A2CMODL1";

using AnyModel = std::variant<RejectorModel, ClassifierModel>;

std::string serialize_model(const RejectorModel& model);
std::string serialize_model(const ClassifierModel& model);

/// Bad magic, truncation or checksum mismatch -> CorruptionError.
/// Other magic versions or unknown kind tags -> VersionError.
AnyModel parse_model(std::string_view content, std::string_view source = "<memory>");

void save_model(const RejectorModel& model, const std::filesystem::path& path);
void save_model(const ClassifierModel& model, const std::filesystem::path& path);

AnyModel load_model(const std::filesystem::path& path);
RejectorModel load_rejector(const std::filesystem::path& path);
ClassifierModel load_classifier(const std::filesystem::path& path);

/// Writes `content` to `path` through a temporary file and a rename.
void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace a2c
