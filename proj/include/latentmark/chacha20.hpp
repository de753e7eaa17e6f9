#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace latentmark {

using ChaChaKey = std::array<std::uint8_t, 32>;
using ChaChaNonce = std::array<std::uint8_t, 12>;

// ChaCha20 block function per RFC 8439: 256-bit key, 96-bit nonce, 32-bit
// block counter; returns the 64-byte keystream block.
std::array<std::uint8_t, 64> chacha20_block(const ChaChaKey& key,
                                            const ChaChaNonce& nonce,
                                            std::uint32_t counter);

// Keystream of n bytes, block counter starting at 0.
std::vector<std::uint8_t> chacha20_keystream(const ChaChaKey& key,
                                             const ChaChaNonce& nonce,
                                             std::size_t n);

}  // namespace latentmark
