#pragma once

// Little-endian scalar I/O shared by the binary file formats.

#include "qpath/errors.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

namespace qpath::binio {

template <typename T>
T swap_bytes(T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof v);
  std::reverse(b, b + sizeof v);
  std::memcpy(&v, b, sizeof v);
  return v;
}

template <typename T>
void put(std::ostream& out, T v) {
  if constexpr (std::endian::native == std::endian::big) v = swap_bytes(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void put_f64(std::ostream& out, double x) { put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(x)); }

template <typename T>
T get(std::istream& in, const char* what) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw ParseError(std::string("truncated ") + what);
  if constexpr (std::endian::native == std::endian::big) v = swap_bytes(v);
  return v;
}

inline double get_f64(std::istream& in, const char* what) {
  return std::bit_cast<double>(get<std::uint64_t>(in, what));
}

}  // namespace qpath::binio
