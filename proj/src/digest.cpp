#include "lfqa/digest.hpp"

#include <array>

#include <openssl/sha.h>

namespace lfqa {

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, SHA256_DIGEST_LENGTH> md{};
    SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), md.data());
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(md.size() * 2);
    for (auto b : md) {
        out.push_back(hex[b >> 4]);
        out.push_back(hex[b & 0x0f]);
    }
    return out;
}

} // namespace lfqa
