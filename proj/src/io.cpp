#include "petal/io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "petal/error.hpp"

namespace petal {

void write_pgm(const Image8& img, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::MissingInput, "cannot write " + path.string());
  f << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

Image8 read_pgm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::MissingInput, "cannot read " + path.string());
  std::string magic;
  int maxval = 0;
  Image8 img;
  f >> magic >> img.width >> img.height >> maxval;
  if (magic != "P5" || maxval != 255 || img.width <= 0 || img.height <= 0) {
    throw Error(ErrorKind::CorruptFile, "not an 8-bit P5 PGM: " + path.string());
  }
  f.get();  // single whitespace before the raster
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  f.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (f.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw Error(ErrorKind::CorruptFile, "truncated PGM raster: " + path.string());
  }
  return img;
}

void write_real_field(const RealField& field, std::string_view kind, const std::filesystem::path& path) {
  std::string bytes;
  bytes.reserve(field.values.size() * 8);
  for (double v : field.values) {
    const auto u = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<char>((u >> (8 * b)) & 0xFF));
  }
  write_text(path, bytes);
  nlohmann::json meta{{"n", field.grid.n}, {"dx", field.grid.dx}, {"kind", std::string(kind)}};
  write_text(path.string() + ".json", meta.dump(2) + "\n");
}

RealField read_real_field(const std::filesystem::path& path, std::string* kind) {
  std::ifstream meta_file(path.string() + ".json");
  if (!meta_file) throw Error(ErrorKind::MissingInput, "missing sidecar for " + path.string());
  const auto meta = nlohmann::json::parse(meta_file);
  RealField field(make_grid(meta.at("n").get<int>(), meta.at("dx").get<double>()));
  if (kind != nullptr) *kind = meta.at("kind").get<std::string>();

  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::MissingInput, "cannot read " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (bytes.size() != field.values.size() * 8) throw Error(ErrorKind::CorruptFile, "raw field size mismatch");
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    std::uint64_t u = 0;
    for (int b = 0; b < 8; ++b) u |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + b])) << (8 * b);
    field.values[i] = std::bit_cast<double>(u);
  }
  return field;
}

void write_text(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::MissingInput, "cannot write " + path.string());
  f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

}  // namespace petal
