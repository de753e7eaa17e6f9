#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "latentmark/chacha20.hpp"
#include "latentmark/normal.hpp"
#include "latentmark/rng.hpp"
#include "latentmark/tensor.hpp"

namespace latentmark {

// Embedding configuration. The watermark payload is replicated f_c times
// along channels and f_hw x f_hw times spatially, then each latent value
// carries l bits, so the payload capacity in bits is
//   l * (c/f_c) * (h/f_hw) * (w/f_hw)
// and every payload symbol has f_c * f_hw^2 replicas.
struct WatermarkConfig {
    std::uint32_t f_c = 1;
    std::uint32_t f_hw = 8;
    std::uint32_t l = 1;  // bits per latent value, 1..8
    ChaChaKey key{};
    ChaChaNonce nonce{};
    Shape latent_shape{4, 64, 64};

    void validate() const;

    std::uint32_t block_c() const { return latent_shape.c / f_c; }
    std::uint32_t block_h() const { return latent_shape.h / f_hw; }
    std::uint32_t block_w() const { return latent_shape.w / f_hw; }
    std::uint64_t symbol_count() const {
        return std::uint64_t(block_c()) * block_h() * block_w();
    }
};

std::uint64_t capacity(const WatermarkConfig& config);  // in bits

// Payload: base-2^l symbols. For l = 1 the symbols are plain bits.
struct Watermark {
    std::vector<std::uint16_t> symbols;
    std::uint32_t bits_per_symbol = 1;
    std::optional<std::uint32_t> owner_id;

    static Watermark random(const WatermarkConfig& config, SeededRng& rng);
    static Watermark from_hex(const std::string& hex, const WatermarkConfig& config);
    std::string to_hex() const;

    std::uint64_t bit_length() const { return symbols.size() * std::uint64_t(bits_per_symbol); }
    bool operator==(const Watermark& other) const {
        return symbols == other.symbols && bits_per_symbol == other.bits_per_symbol;
    }
};

// Replicated (and possibly keystream-encrypted) symbol plane covering every
// latent position, laid out row-major like the latent itself.
struct DiffusedMessage {
    std::vector<std::uint16_t> symbols;
    std::uint32_t bits_per_symbol = 1;
    bool encrypted = false;
};

// Tile the payload across the latent. Latent position (ch, y, x) carries
// payload symbol ((ch % block_c), (y % block_h), (x % block_w)).
DiffusedMessage diffuse(const Watermark& wm, const WatermarkConfig& config);

// XOR with the ChaCha20 keystream, consumed in l-bit chunks MSB-first.
// encrypt expects d.encrypted == false, decrypt the opposite.
DiffusedMessage encrypt_message(const DiffusedMessage& d, const WatermarkConfig& config);
DiffusedMessage decrypt_message(const DiffusedMessage& d, const WatermarkConfig& config);

// Per-dimension embedding: z = Phi^-1((symbol + u) / 2^l) with the CDF
// argument clamped to [1e-12, 1 - 1e-12]. Uniform u keeps z exactly N(0,1).
double embed_symbol_value(std::uint32_t symbol, double u, std::uint32_t l);

// Per-dimension extraction: floor(Phi(z) * 2^l) clamped to [0, 2^l - 1].
std::uint32_t extract_symbol_value(double z, std::uint32_t l);

// Draws one u per latent dimension from rng in row-major order.
LatentTensor embed(const DiffusedMessage& d, const WatermarkConfig& config, SeededRng& rng);

// Inverse of embed up to bucket quantization; the result is still encrypted.
DiffusedMessage extract_symbols(const LatentTensor& z, const WatermarkConfig& config);

// Plurality vote per payload symbol over all replicas; ties resolve to the
// lowest symbol value. Input must be decrypted.
Watermark recover_watermark(const DiffusedMessage& d, const WatermarkConfig& config);

// Fraction of matching bits over the l-bit expansions of both payloads.
double bit_accuracy(const Watermark& a, const Watermark& b);

}  // namespace latentmark
