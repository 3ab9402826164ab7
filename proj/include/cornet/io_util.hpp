#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cornet/tensor.hpp"

namespace cornet {

// FNV-1a 64-bit, rendered as 16 hex chars. Used for config digests and the
// synth manifest; stability matters, cryptographic strength does not.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::string hex_digest(std::uint64_t value);
std::string digest_string(const std::string& text);
std::string digest_file(const std::string& path);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

// Tensors as base64 little-endian float64, for checkpoints.
std::string encode_tensor_data(const Tensor& t);
std::vector<double> decode_tensor_data(const std::string& text);

// Per-video feature files: raw little-endian float32, row-major [T, D],
// next to a JSON sidecar {"t": T, "d": D}.
void write_features(const std::string& base_path, const Tensor& features);
Tensor read_features(const std::string& base_path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace cornet
