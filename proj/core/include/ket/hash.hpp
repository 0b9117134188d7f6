#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ket {

// FNV-1a, 64-bit. Used for content addressing (provenance, run manifests,
// transform caches), not for anything adversarial.
constexpr std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::string_view data);

// Hash of a file's bytes; throws FormatError if the file cannot be read.
std::string hash_file(const std::string& path);

}  // namespace ket
