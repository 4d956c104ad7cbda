#include "dmn/binio.hpp"

#include <array>
#include <cstring>
#include <stdexcept>

namespace dmn::binio {

namespace {

void write_raw(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  if (!os) throw std::runtime_error("binio: write failed");
}

void read_raw(std::istream& is, void* p, std::size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (is.gcount() != static_cast<std::streamsize>(n))
    throw std::runtime_error("binio: truncated input");
}

} // namespace

void write_u8(std::ostream& os, std::uint8_t v) { write_raw(os, &v, 1); }
void write_u32(std::ostream& os, std::uint32_t v) { write_raw(os, &v, 4); }
void write_u64(std::ostream& os, std::uint64_t v) { write_raw(os, &v, 8); }
void write_f64(std::ostream& os, double v) { write_raw(os, &v, 8); }

void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  if (!s.empty()) write_raw(os, s.data(), s.size());
}

void write_matrix(std::ostream& os, const Matrix& m) {
  write_u64(os, static_cast<std::uint64_t>(m.rows()));
  write_u64(os, static_cast<std::uint64_t>(m.cols()));
  if (m.size() > 0)
    write_raw(os, m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
}

std::uint8_t read_u8(std::istream& is) {
  std::uint8_t v;
  read_raw(is, &v, 1);
  return v;
}

std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v;
  read_raw(is, &v, 4);
  return v;
}

std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v;
  read_raw(is, &v, 8);
  return v;
}

double read_f64(std::istream& is) {
  double v;
  read_raw(is, &v, 8);
  return v;
}

std::string read_string(std::istream& is, std::size_t max_len) {
  const std::uint32_t n = read_u32(is);
  if (n > max_len) throw std::runtime_error("binio: string length " + std::to_string(n) + " too large");
  std::string s(n, '\0');
  if (n) read_raw(is, s.data(), n);
  return s;
}

Matrix read_matrix(std::istream& is, std::size_t max_entries) {
  const std::uint64_t rows = read_u64(is);
  const std::uint64_t cols = read_u64(is);
  if (rows * cols > max_entries)
    throw std::runtime_error("binio: matrix " + std::to_string(rows) + "x" + std::to_string(cols) +
                             " too large");
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  if (m.size() > 0)
    read_raw(is, m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
  return m;
}

namespace {

std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    table[i] = c;
  }
  return table;
}

} // namespace

std::uint32_t crc32(const void* data, std::size_t len) {
  static const std::array<std::uint32_t, 256> table = make_crc_table();
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint32_t c = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i) c = table[(c ^ p[i]) & 0xFFu] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

} // namespace dmn::binio
