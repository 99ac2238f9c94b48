#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "petal/field.hpp"

namespace petal {

/// Binary PGM (P5, maxval 255).
void write_pgm(const Image8& img, const std::filesystem::path& path);
Image8 read_pgm(const std::filesystem::path& path);

/// Little-endian f64 raw array at `path` plus a JSON sidecar `path` + ".json" holding
/// {"n", "dx", "kind"}.
void write_real_field(const RealField& f, std::string_view kind, const std::filesystem::path& path);
RealField read_real_field(const std::filesystem::path& path, std::string* kind = nullptr);

void write_text(const std::filesystem::path& path, const std::string& contents);

}  // namespace petal
