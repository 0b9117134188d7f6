#include "ket/hash.hpp"

#include <fstream>
#include <sstream>

#include "ket/errors.hpp"

namespace ket {

std::string hash_hex(std::string_view data) {
    std::uint64_t h = fnv1a64(data);
    char buf[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = digits[h & 0xf];
        h >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf);
}

std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return hash_hex(ss.str());
}

}  // namespace ket
