#ifndef DMN_BINIO_HPP
#define DMN_BINIO_HPP

#include "dmn/types.hpp"

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

// Little-endian raw readers/writers for the on-disk formats.
static_assert(std::endian::native == std::endian::little,
              "on-disk formats are little-endian; byte swapping is not implemented");

namespace dmn::binio {

void write_u8(std::ostream& os, std::uint8_t v);
void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_f64(std::ostream& os, double v);
void write_string(std::ostream& os, const std::string& s);
void write_matrix(std::ostream& os, const Matrix& m);

std::uint8_t read_u8(std::istream& is);
std::uint32_t read_u32(std::istream& is);
std::uint64_t read_u64(std::istream& is);
double read_f64(std::istream& is);
std::string read_string(std::istream& is, std::size_t max_len = 1u << 20);
Matrix read_matrix(std::istream& is, std::size_t max_entries = 1u << 28);

/// CRC-32 (polynomial 0xEDB88320) of a byte buffer.
std::uint32_t crc32(const void* data, std::size_t len);

} // namespace dmn::binio

#endif
