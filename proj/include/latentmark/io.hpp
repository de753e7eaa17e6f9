#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "latentmark/chacha20.hpp"
#include "latentmark/image.hpp"
#include "latentmark/tensor.hpp"

namespace latentmark {

// ".lat" latent file: three little-endian uint32 dims (c, h, w) followed by
// c*h*w little-endian IEEE doubles, row-major.
void write_latent(const std::filesystem::path& path, const LatentTensor& z);
LatentTensor read_latent(const std::filesystem::path& path);

// Binary PGM (P5), maxval 255.
void write_pgm(const std::filesystem::path& path, const ImageTensor& img);
ImageTensor read_pgm(const std::filesystem::path& path);

std::string to_hex(const std::uint8_t* data, std::size_t n);
std::vector<std::uint8_t> from_hex(const std::string& hex);

// Key file: two lines, "key=<64 hex>" and "nonce=<24 hex>".
struct KeyMaterial {
    ChaChaKey key{};
    ChaChaNonce nonce{};
};
void write_key_file(const std::filesystem::path& path, const KeyMaterial& km);
KeyMaterial read_key_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace latentmark
