#include "latentmark/watermark.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "latentmark/io.hpp"

namespace latentmark {

void WatermarkConfig::validate() const {
    if (latent_shape.c == 0 || latent_shape.h == 0 || latent_shape.w == 0) {
        throw ConfigError("latent shape dims must be nonzero");
    }
    if (l < 1 || l > 8) throw ConfigError("l must be in [1, 8]");
    if (f_c == 0 || latent_shape.c % f_c != 0) {
        throw ConfigError("f_c must divide the channel count");
    }
    if (f_hw == 0 || latent_shape.h % f_hw != 0 || latent_shape.w % f_hw != 0) {
        throw ConfigError("f_hw must divide both spatial dims");
    }
}

std::uint64_t capacity(const WatermarkConfig& config) {
    config.validate();
    return std::uint64_t(config.l) * config.symbol_count();
}

namespace {

std::uint32_t symbol_mask(std::uint32_t l) { return (1u << l) - 1u; }

// payload symbol index feeding latent position (ch, y, x)
inline std::size_t source_index(const WatermarkConfig& c, std::uint32_t ch, std::uint32_t y,
                                std::uint32_t x) {
    return (std::size_t(ch % c.block_c()) * c.block_h() + (y % c.block_h())) * c.block_w() +
           (x % c.block_w());
}

// keystream split into count l-bit chunks, bytes consumed MSB-first
std::vector<std::uint16_t> keystream_symbols(const WatermarkConfig& c, std::size_t count) {
    const std::size_t nbits = count * c.l;
    const auto bytes = chacha20_keystream(c.key, c.nonce, (nbits + 7) / 8);
    std::vector<std::uint16_t> out(count);
    std::size_t bit = 0;
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t sym = 0;
        for (std::uint32_t b = 0; b < c.l; ++b, ++bit) {
            sym = (sym << 1) | ((bytes[bit >> 3] >> (7 - (bit & 7))) & 1u);
        }
        out[i] = std::uint16_t(sym);
    }
    return out;
}

std::vector<std::uint8_t> pack_bits_msb(const std::vector<std::uint16_t>& symbols,
                                        std::uint32_t l) {
    const std::size_t nbits = symbols.size() * l;
    std::vector<std::uint8_t> bytes((nbits + 7) / 8, 0);
    std::size_t bit = 0;
    for (std::uint16_t s : symbols) {
        for (std::uint32_t b = 0; b < l; ++b, ++bit) {
            const std::uint32_t v = (s >> (l - 1 - b)) & 1u;
            bytes[bit >> 3] |= std::uint8_t(v << (7 - (bit & 7)));
        }
    }
    return bytes;
}

std::vector<std::uint16_t> unpack_bits_msb(const std::vector<std::uint8_t>& bytes,
                                           std::size_t count, std::uint32_t l) {
    std::vector<std::uint16_t> symbols(count);
    std::size_t bit = 0;
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t sym = 0;
        for (std::uint32_t b = 0; b < l; ++b, ++bit) {
            sym = (sym << 1) | ((bytes[bit >> 3] >> (7 - (bit & 7))) & 1u);
        }
        symbols[i] = std::uint16_t(sym);
    }
    return symbols;
}

}  // namespace

Watermark Watermark::random(const WatermarkConfig& config, SeededRng& rng) {
    config.validate();
    Watermark wm;
    wm.bits_per_symbol = config.l;
    wm.symbols.resize(config.symbol_count());
    // 2^l divides 2^64, so masking is bias-free
    for (auto& s : wm.symbols) s = std::uint16_t(rng.next_u64() & symbol_mask(config.l));
    return wm;
}

Watermark Watermark::from_hex(const std::string& hex, const WatermarkConfig& config) {
    config.validate();
    const std::size_t count = config.symbol_count();
    const std::size_t nbytes = (count * config.l + 7) / 8;
    const auto bytes = latentmark::from_hex(hex);
    if (bytes.size() != nbytes) {
        throw CodecError("watermark hex length mismatch: expected " + std::to_string(2 * nbytes) +
                         " hex chars, got " + std::to_string(hex.size()));
    }
    Watermark wm;
    wm.bits_per_symbol = config.l;
    wm.symbols = unpack_bits_msb(bytes, count, config.l);
    return wm;
}

std::string Watermark::to_hex() const {
    const auto bytes = pack_bits_msb(symbols, bits_per_symbol);
    return latentmark::to_hex(bytes.data(), bytes.size());
}

DiffusedMessage diffuse(const Watermark& wm, const WatermarkConfig& config) {
    config.validate();
    if (wm.bits_per_symbol != config.l || wm.symbols.size() != config.symbol_count()) {
        throw CodecError("watermark does not match config");
    }
    const Shape& s = config.latent_shape;
    DiffusedMessage d;
    d.bits_per_symbol = config.l;
    d.encrypted = false;
    d.symbols.resize(s.size());
    std::size_t i = 0;
    for (std::uint32_t ch = 0; ch < s.c; ++ch) {
        for (std::uint32_t y = 0; y < s.h; ++y) {
            for (std::uint32_t x = 0; x < s.w; ++x, ++i) {
                d.symbols[i] = wm.symbols[source_index(config, ch, y, x)];
            }
        }
    }
    return d;
}

static DiffusedMessage xor_keystream(const DiffusedMessage& d, const WatermarkConfig& config) {
    const auto ks = keystream_symbols(config, d.symbols.size());
    DiffusedMessage out = d;
    for (std::size_t i = 0; i < out.symbols.size(); ++i) out.symbols[i] ^= ks[i];
    return out;
}

DiffusedMessage encrypt_message(const DiffusedMessage& d, const WatermarkConfig& config) {
    config.validate();
    if (d.encrypted) throw CodecError("encrypt_message: input already encrypted");
    if (d.bits_per_symbol != config.l) throw CodecError("bits_per_symbol mismatch");
    DiffusedMessage out = xor_keystream(d, config);
    out.encrypted = true;
    return out;
}

DiffusedMessage decrypt_message(const DiffusedMessage& d, const WatermarkConfig& config) {
    config.validate();
    if (!d.encrypted) throw CodecError("decrypt_message: input not encrypted");
    if (d.bits_per_symbol != config.l) throw CodecError("bits_per_symbol mismatch");
    DiffusedMessage out = xor_keystream(d, config);
    out.encrypted = false;
    return out;
}

double embed_symbol_value(std::uint32_t symbol, double u, std::uint32_t l) {
    const double q = (double(symbol) + u) * std::ldexp(1.0, -int(l));
    return normal_quantile(std::clamp(q, 1e-12, 1.0 - 1e-12));
}

std::uint32_t extract_symbol_value(double z, std::uint32_t l) {
    const double buckets = std::ldexp(1.0, int(l));
    const double y = std::floor(normal_cdf(z) * buckets);
    if (y < 0.0) return 0;
    return std::uint32_t(std::min(y, buckets - 1.0));
}

LatentTensor embed(const DiffusedMessage& d, const WatermarkConfig& config, SeededRng& rng) {
    config.validate();
    if (!d.encrypted) throw CodecError("embed expects an encrypted message");
    if (d.symbols.size() != config.latent_shape.size() || d.bits_per_symbol != config.l) {
        throw CodecError("diffused message does not match latent shape");
    }
    LatentTensor z(config.latent_shape);
    for (std::size_t i = 0; i < d.symbols.size(); ++i) {
        z[i] = embed_symbol_value(d.symbols[i], rng.next_unit(), config.l);
    }
    return z;
}

DiffusedMessage extract_symbols(const LatentTensor& z, const WatermarkConfig& config) {
    config.validate();
    if (!(z.shape() == config.latent_shape)) throw ShapeError("latent shape mismatch");
    DiffusedMessage d;
    d.bits_per_symbol = config.l;
    d.encrypted = true;
    d.symbols.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        d.symbols[i] = std::uint16_t(extract_symbol_value(z[i], config.l));
    }
    return d;
}

Watermark recover_watermark(const DiffusedMessage& d, const WatermarkConfig& config) {
    config.validate();
    if (d.encrypted) throw CodecError("recover_watermark expects a decrypted message");
    if (d.symbols.size() != config.latent_shape.size() || d.bits_per_symbol != config.l) {
        throw CodecError("diffused message does not match latent shape");
    }
    const std::size_t positions = config.symbol_count();
    const std::uint32_t values = 1u << config.l;
    std::vector<std::uint32_t> votes(positions * values, 0);

    const Shape& s = config.latent_shape;
    std::size_t i = 0;
    for (std::uint32_t ch = 0; ch < s.c; ++ch) {
        for (std::uint32_t y = 0; y < s.h; ++y) {
            for (std::uint32_t x = 0; x < s.w; ++x, ++i) {
                votes[source_index(config, ch, y, x) * values + d.symbols[i]]++;
            }
        }
    }

    Watermark wm;
    wm.bits_per_symbol = config.l;
    wm.symbols.resize(positions);
    for (std::size_t pos = 0; pos < positions; ++pos) {
        std::uint32_t best = 0;
        std::uint32_t best_count = votes[pos * values];
        for (std::uint32_t v = 1; v < values; ++v) {
            // strict > keeps the lowest value on ties
            if (votes[pos * values + v] > best_count) {
                best = v;
                best_count = votes[pos * values + v];
            }
        }
        wm.symbols[pos] = std::uint16_t(best);
    }
    return wm;
}

double bit_accuracy(const Watermark& a, const Watermark& b) {
    if (a.bits_per_symbol != b.bits_per_symbol || a.symbols.size() != b.symbols.size()) {
        throw CodecError("bit_accuracy: payload layouts differ");
    }
    if (a.symbols.empty()) throw CodecError("bit_accuracy: empty payload");
    const std::uint32_t l = a.bits_per_symbol;
    std::uint64_t matching = 0;
    for (std::size_t i = 0; i < a.symbols.size(); ++i) {
        const std::uint32_t diff = (a.symbols[i] ^ b.symbols[i]) & symbol_mask(l);
        matching += l - std::popcount(diff);
    }
    return double(matching) / double(a.symbols.size() * std::uint64_t(l));
}

}  // namespace latentmark
