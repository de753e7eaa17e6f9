#include "latentmark/io.hpp"

#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

#include "latentmark/errors.hpp"

namespace latentmark {

namespace {

void put_u32_le(std::ostream& os, std::uint32_t v) {
    const unsigned char b[4] = {(unsigned char)(v & 0xff), (unsigned char)((v >> 8) & 0xff),
                                (unsigned char)((v >> 16) & 0xff),
                                (unsigned char)((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32_le(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw IoError("truncated latent file header");
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
}

void put_f64_le(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = (unsigned char)((bits >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64_le(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw IoError("truncated latent file payload");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
    std::ofstream os(path, mode);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    return os;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode) {
    std::ifstream is(path, mode);
    if (!is) throw IoError("cannot open for reading: " + path.string());
    return is;
}

}  // namespace

void write_latent(const std::filesystem::path& path, const LatentTensor& z) {
    auto os = open_out(path, std::ios::binary);
    put_u32_le(os, z.shape().c);
    put_u32_le(os, z.shape().h);
    put_u32_le(os, z.shape().w);
    for (double v : z.values()) put_f64_le(os, v);
    if (!os) throw IoError("write failed: " + path.string());
}

LatentTensor read_latent(const std::filesystem::path& path) {
    auto is = open_in(path, std::ios::binary);
    const std::uint32_t c = get_u32_le(is);
    const std::uint32_t h = get_u32_le(is);
    const std::uint32_t w = get_u32_le(is);
    if (c == 0 || h == 0 || w == 0 || std::uint64_t(c) * h * w > (1u << 28)) {
        throw IoError("implausible latent dimensions in " + path.string());
    }
    LatentTensor z(Shape{c, h, w});
    for (double& v : z.values()) v = get_f64_le(is);
    is.peek();
    if (!is.eof()) throw IoError("trailing bytes in latent file " + path.string());
    return z;
}

void write_pgm(const std::filesystem::path& path, const ImageTensor& img) {
    auto os = open_out(path, std::ios::binary);
    os << "P5\n" << img.w << ' ' << img.h << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.pix.data()),
             std::streamsize(img.pix.size()));
    if (!os) throw IoError("write failed: " + path.string());
}

ImageTensor read_pgm(const std::filesystem::path& path) {
    auto is = open_in(path, std::ios::binary);
    std::string magic;
    is >> magic;
    if (magic != "P5") throw IoError("not a binary PGM (P5): " + path.string());
    // header tokens may be separated by whitespace and '#' comment lines
    auto next_int = [&]() -> std::uint32_t {
        for (;;) {
            const int ch = is.peek();
            if (ch == '#') {
                std::string comment;
                std::getline(is, comment);
            } else if (std::isspace(ch)) {
                is.get();
            } else {
                break;
            }
        }
        std::uint32_t v;
        if (!(is >> v)) throw IoError("bad PGM header in " + path.string());
        return v;
    };
    const std::uint32_t w = next_int();
    const std::uint32_t h = next_int();
    const std::uint32_t maxval = next_int();
    if (maxval != 255) throw IoError("PGM maxval must be 255: " + path.string());
    is.get();  // single whitespace byte before the raster
    ImageTensor img(h, w);
    is.read(reinterpret_cast<char*>(img.pix.data()), std::streamsize(img.pix.size()));
    if (!is) throw IoError("truncated PGM raster in " + path.string());
    return img;
}

std::string to_hex(const std::uint8_t* data, std::size_t n) {
    static const char* digits = "0123456789abcdef";
    std::string out(n * 2, '0');
    for (std::size_t i = 0; i < n; ++i) {
        out[2 * i] = digits[data[i] >> 4];
        out[2 * i + 1] = digits[data[i] & 0xf];
    }
    return out;
}

std::vector<std::uint8_t> from_hex(const std::string& hex) {
    if (hex.size() % 2 != 0) throw IoError("hex string has odd length");
    auto nibble = [](char ch) -> int {
        if (ch >= '0' && ch <= '9') return ch - '0';
        if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
        if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
        throw IoError(std::string("invalid hex digit '") + ch + "'");
    };
    std::vector<std::uint8_t> out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::uint8_t(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    }
    return out;
}

void write_key_file(const std::filesystem::path& path, const KeyMaterial& km) {
    auto os = open_out(path, std::ios::out);
    os << "key=" << to_hex(km.key.data(), km.key.size()) << '\n'
       << "nonce=" << to_hex(km.nonce.data(), km.nonce.size()) << '\n';
    if (!os) throw IoError("write failed: " + path.string());
}

KeyMaterial read_key_file(const std::filesystem::path& path) {
    auto is = open_in(path, std::ios::in);
    KeyMaterial km;
    bool have_key = false, have_nonce = false;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw IoError("bad key file line: " + line);
        const std::string name = line.substr(0, eq);
        const std::vector<std::uint8_t> raw = from_hex(line.substr(eq + 1));
        if (name == "key") {
            if (raw.size() != km.key.size()) throw IoError("key must be 32 bytes of hex");
            std::copy(raw.begin(), raw.end(), km.key.begin());
            have_key = true;
        } else if (name == "nonce") {
            if (raw.size() != km.nonce.size()) throw IoError("nonce must be 12 bytes of hex");
            std::copy(raw.begin(), raw.end(), km.nonce.begin());
            have_nonce = true;
        } else {
            throw IoError("unknown key file entry: " + name);
        }
    }
    if (!have_key || !have_nonce) {
        throw IoError("key file needs both key= and nonce= lines: " + path.string());
    }
    return km;
}

std::string read_text_file(const std::filesystem::path& path) {
    auto is = open_in(path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    auto os = open_out(path, std::ios::binary);
    os.write(text.data(), std::streamsize(text.size()));
    if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace latentmark
