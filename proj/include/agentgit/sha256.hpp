#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace agentgit {

// Streaming SHA-256 (FIPS 180-4).
class Sha256 {
 public:
  Sha256();

  void update(const void* data, std::size_t len);
  void update(std::string_view s) { update(s.data(), s.size()); }

  // Finalizes; the object must not be updated afterwards.
  std::array<std::uint8_t, 32> digest();

  // One-shot helper returning lowercase hex (64 chars).
  static std::string hex_digest(std::string_view data);

 private:
  void process_block(const std::uint8_t* block);

  std::array<std::uint32_t, 8> state_;
  std::array<std::uint8_t, 64> buffer_;
  std::uint64_t total_len_ = 0;
  std::size_t buffer_len_ = 0;
  bool finalized_ = false;
};

std::string to_hex(const std::array<std::uint8_t, 32>& bytes);

}  // namespace agentgit
