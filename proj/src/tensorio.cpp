#include "attnlab/tensorio.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include <json.hpp>

namespace attnlab {

namespace {

std::uint32_t float_bits_le(const unsigned char b[4]) {
  return static_cast<std::uint32_t>(b[0]) |
         static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 |
         static_cast<std::uint32_t>(b[3]) << 24;
}

void bits_to_le(std::uint32_t bits, unsigned char b[4]) {
  b[0] = static_cast<unsigned char>(bits & 0xFF);
  b[1] = static_cast<unsigned char>((bits >> 8) & 0xFF);
  b[2] = static_cast<unsigned char>((bits >> 16) & 0xFF);
  b[3] = static_cast<unsigned char>((bits >> 24) & 0xFF);
}

}  // namespace

Matrix load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_tensor: cannot open " + path.string());
  std::string header;
  if (!std::getline(in, header)) {
    throw IoError("load_tensor: missing header line in " + path.string());
  }
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("load_tensor: bad header in " + path.string() + ": " +
                  e.what());
  }
  if (!h.contains("rows") || !h.contains("cols") ||
      h.value("dtype", "") != "f32" || h.value("order", "") != "row-major") {
    throw IoError("load_tensor: unsupported header in " + path.string());
  }
  const std::size_t rows = h["rows"].get<std::size_t>();
  const std::size_t cols = h["cols"].get<std::size_t>();
  const std::size_t count = rows * cols;

  std::vector<double> data(count);
  std::vector<unsigned char> buf(count * 4);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
    throw IoError("load_tensor: truncated payload in " + path.string());
  }
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t bits = float_bits_le(&buf[i * 4]);
    data[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return Matrix(rows, cols, std::move(data));
}

void save_tensor(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("save_tensor: cannot open " + path.string());
  out << "{\"rows\":" << m.rows() << ",\"cols\":" << m.cols()
      << ",\"dtype\":\"f32\",\"order\":\"row-major\"}\n";
  std::vector<unsigned char> buf(m.data().size() * 4);
  for (std::size_t i = 0; i < m.data().size(); ++i) {
    const float f = static_cast<float>(m.data()[i]);
    bits_to_le(std::bit_cast<std::uint32_t>(f), &buf[i * 4]);
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("save_tensor: write failed for " + path.string());
}

}  // namespace attnlab
