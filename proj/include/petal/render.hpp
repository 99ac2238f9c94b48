#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "petal/field.hpp"

namespace petal {

/// Images laid out row-major in `columns` columns with a `gap`-pixel white border.
/// All panels must share one size.
Image8 montage(std::span<const Image8> panels, int columns, int gap = 2);

/// target | distorted | corrected
Image8 triple_montage(const Image8& target, const Image8& distorted, const Image8& corrected, int gap = 2);

/// Reads PGM panels from disk (MissingInput if any is absent) and writes the montage.
void render_montage(std::span<const std::filesystem::path> inputs, int columns, const std::filesystem::path& out,
                    int gap = 2);

}  // namespace petal
