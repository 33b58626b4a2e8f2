#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

// Explicit little-endian primitives for the binary container formats.
namespace routediff::binio {

inline void write_u8(std::ostream& os, std::uint8_t v) {
  os.put(static_cast<char>(v));
}

inline void write_u16(std::ostream& os, std::uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  os.write(b, 2);
}

inline void write_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

inline void write_f64(std::ostream& os, double v) {
  write_u64(os, std::bit_cast<std::uint64_t>(v));
}

inline void write_string(std::ostream& os, const std::string& s) {
  if (s.size() > 0xffff) throw std::invalid_argument("binio: string too long");
  write_u16(os, static_cast<std::uint16_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

[[noreturn]] inline void fail_truncated(const std::string& what) {
  throw std::runtime_error("truncated file: unexpected end of data while reading " + what);
}

inline std::uint8_t read_u8(std::istream& is, const char* what) {
  char c;
  if (!is.get(c)) fail_truncated(what);
  return static_cast<std::uint8_t>(c);
}

inline std::uint16_t read_u16(std::istream& is, const char* what) {
  char b[2];
  if (!is.read(b, 2)) fail_truncated(what);
  return static_cast<std::uint16_t>(static_cast<std::uint8_t>(b[0])) |
         (static_cast<std::uint16_t>(static_cast<std::uint8_t>(b[1])) << 8);
}

inline std::uint32_t read_u32(std::istream& is, const char* what) {
  char b[4];
  if (!is.read(b, 4)) fail_truncated(what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(b[i])) << (8 * i);
  return v;
}

inline std::uint64_t read_u64(std::istream& is, const char* what) {
  char b[8];
  if (!is.read(b, 8)) fail_truncated(what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(b[i])) << (8 * i);
  return v;
}

inline double read_f64(std::istream& is, const char* what) {
  return std::bit_cast<double>(read_u64(is, what));
}

inline std::string read_string(std::istream& is, const char* what) {
  const std::uint16_t len = read_u16(is, what);
  std::string s(len, '\0');
  if (len > 0 && !is.read(s.data(), len)) fail_truncated(what);
  return s;
}

}  // namespace routediff::binio
