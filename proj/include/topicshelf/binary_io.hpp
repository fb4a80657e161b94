#pragma once

// Little-endian primitives shared by the corpus and model containers.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "topicshelf/error.hpp"

namespace topicshelf::binary {

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(std::string_view s) { out_.write(s.data(), static_cast<std::streamsize>(s.size())); }

  void u32(std::uint32_t v) {
    char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out_.write(buf, 4);
  }
  void u64(std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out_.write(buf, 8);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }

  bool ok() const { return static_cast<bool>(out_); }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {}

  std::string bytes(std::size_t n) {
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    check();
    return s;
  }
  std::uint32_t u32() {
    unsigned char buf[4];
    in_.read(reinterpret_cast<char*>(buf), 4);
    check();
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | buf[i];
    return v;
  }
  std::uint64_t u64() {
    unsigned char buf[8];
    in_.read(reinterpret_cast<char*>(buf), 8);
    check();
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | buf[i];
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(std::size_t limit = 1u << 20) {
    const std::uint32_t n = u32();
    if (n > limit) throw Error(ErrorKind::FormatError, what_ + ": string length out of range");
    return bytes(n);
  }

  /// Element count guard against corrupt headers.
  std::uint64_t count(std::uint64_t limit) {
    const std::uint64_t n = u64();
    if (n > limit) throw Error(ErrorKind::FormatError, what_ + ": count out of range");
    return n;
  }

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  void check() {
    if (!in_) throw Error(ErrorKind::FormatError, what_ + ": truncated");
  }

  std::istream& in_;
  std::string what_;
};

/// FNV-1a, 64-bit.
class Fnv1a {
 public:
  void update(std::string_view s) {
    for (unsigned char c : s) {
      hash_ ^= c;
      hash_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace topicshelf::binary
