#include "petal/render.hpp"

#include <algorithm>

#include "petal/error.hpp"
#include "petal/io.hpp"

namespace petal {

Image8 montage(std::span<const Image8> panels, int columns, int gap) {
  if (panels.empty() || columns < 1 || gap < 0) throw Error(ErrorKind::InvalidConfig, "montage needs panels and columns");
  const int w = panels[0].width;
  const int h = panels[0].height;
  for (const auto& p : panels) {
    if (p.width != w || p.height != h) throw Error(ErrorKind::ShapeMismatch, "montage panels differ in size");
  }
  const int count = static_cast<int>(panels.size());
  const int cols = std::min(columns, count);
  const int rows = (count + columns - 1) / columns;
  Image8 out;
  out.width = cols * w + (cols + 1) * gap;
  out.height = rows * h + (rows + 1) * gap;
  out.pixels.assign(static_cast<std::size_t>(out.width) * out.height, 255);
  for (int k = 0; k < count; ++k) {
    const int x0 = gap + (k % columns) * (w + gap);
    const int y0 = gap + (k / columns) * (h + gap);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        out.pixels[static_cast<std::size_t>(y0 + y) * out.width + x0 + x] = panels[k].pixels[static_cast<std::size_t>(y) * w + x];
      }
    }
  }
  return out;
}

Image8 triple_montage(const Image8& target, const Image8& distorted, const Image8& corrected, int gap) {
  const Image8 panels[] = {target, distorted, corrected};
  return montage(panels, 3, gap);
}

void render_montage(std::span<const std::filesystem::path> inputs, int columns, const std::filesystem::path& out,
                    int gap) {
  std::vector<Image8> panels;
  for (const auto& p : inputs) {
    if (!std::filesystem::exists(p)) throw Error(ErrorKind::MissingInput, "missing montage input " + p.string());
    panels.push_back(read_pgm(p));
  }
  write_pgm(montage(panels, columns, gap), out);
}

}  // namespace petal
