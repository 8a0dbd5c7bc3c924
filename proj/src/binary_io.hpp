#pragma once

// Little-endian stream helpers shared by the model and index writers.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "logofuse/error.hpp"

namespace logofuse::bin {

template <typename T>
void put(std::ostream& out, T value) {
  std::uint64_t v;
  if constexpr (std::is_same_v<T, double>) {
    v = std::bit_cast<std::uint64_t>(value);
  } else if constexpr (std::is_same_v<T, float>) {
    v = std::bit_cast<std::uint32_t>(value);
  } else {
    v = static_cast<std::uint64_t>(value);
  }
  char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw IoError("unexpected end of model data");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(v);
  } else if constexpr (std::is_same_v<T, float>) {
    return std::bit_cast<float>(static_cast<std::uint32_t>(v));
  } else {
    return static_cast<T>(v);
  }
}

inline void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), n)) throw IoError("unexpected end of model data");
  return s;
}

}  // namespace logofuse::bin
