#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>

#include "latentmark/chacha20.hpp"

using namespace latentmark;

namespace {

ChaChaKey sequential_key() {
    ChaChaKey k{};
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = std::uint8_t(i);
    return k;
}

}  // namespace

TEST_CASE("RFC 8439 block function test vector") {
    // key 00..1f, nonce 00:00:00:09:00:00:00:4a:00:00:00:00, counter 1
    const ChaChaKey key = sequential_key();
    const ChaChaNonce nonce{0x00, 0x00, 0x00, 0x09, 0x00, 0x00,
                            0x00, 0x4a, 0x00, 0x00, 0x00, 0x00};
    const std::uint8_t expected[64] = {
        0x10, 0xf1, 0xe7, 0xe4, 0xd1, 0x3b, 0x59, 0x15, 0x50, 0x0f, 0xdd, 0x1f, 0xa3,
        0x20, 0x71, 0xc4, 0xc7, 0xd1, 0xf4, 0xc7, 0x33, 0xc0, 0x68, 0x03, 0x04, 0x22,
        0xaa, 0x9a, 0xc3, 0xd4, 0x6c, 0x4e, 0xd2, 0x82, 0x64, 0x46, 0x07, 0x9f, 0xaa,
        0x09, 0x14, 0xc2, 0xd7, 0x05, 0xd9, 0x8b, 0x02, 0xa2, 0xb5, 0x12, 0x9c, 0xd1,
        0xde, 0x16, 0x4e, 0xb9, 0xcb, 0xd0, 0x83, 0xe8, 0xa2, 0x50, 0x3c, 0x4e,
    };
    const auto block = chacha20_block(key, nonce, 1);
    for (int i = 0; i < 64; ++i) CHECK(block[std::size_t(i)] == expected[i]);
}

TEST_CASE("keystream concatenates blocks from counter 0") {
    const ChaChaKey key = sequential_key();
    const ChaChaNonce nonce{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    const auto ks = chacha20_keystream(key, nonce, 150);
    REQUIRE(ks.size() == 150);
    const auto b0 = chacha20_block(key, nonce, 0);
    const auto b1 = chacha20_block(key, nonce, 1);
    const auto b2 = chacha20_block(key, nonce, 2);
    for (int i = 0; i < 64; ++i) {
        CHECK(ks[std::size_t(i)] == b0[std::size_t(i)]);
        CHECK(ks[std::size_t(64 + i)] == b1[std::size_t(i)]);
    }
    for (int i = 0; i < 22; ++i) CHECK(ks[std::size_t(128 + i)] == b2[std::size_t(i)]);

    CHECK(chacha20_keystream(key, nonce, 0).empty());
    CHECK(chacha20_keystream(key, nonce, 150) == ks);
}

TEST_CASE("keystream reacts to key, nonce, and counter") {
    const ChaChaKey key = sequential_key();
    const ChaChaNonce nonce{};
    const auto base = chacha20_block(key, nonce, 0);

    CHECK(chacha20_block(key, nonce, 1) != base);

    ChaChaKey key2 = key;
    key2[31] ^= 1;
    CHECK(chacha20_block(key2, nonce, 0) != base);

    ChaChaNonce nonce2 = nonce;
    nonce2[0] ^= 1;
    CHECK(chacha20_block(key, nonce2, 0) != base);
}
