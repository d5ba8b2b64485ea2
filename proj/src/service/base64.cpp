#include <boost/beast/core/detail/base64.hpp>

#include "scefis/service.hpp"

namespace scefis {

namespace b64 = boost::beast::detail::base64;

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out(b64::encoded_size(bytes.size()), '\0');
    out.resize(b64::encode(out.data(), bytes.data(), bytes.size()));
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    std::string clean;
    clean.reserve(text.size());
    for (char c : text)
        if (c != '\n' && c != '\r' && c != ' ') clean.push_back(c);
    std::vector<std::uint8_t> out(b64::decoded_size(clean.size()));
    const auto [written, read] = b64::decode(out.data(), clean.data(), clean.size());
    // Decoding stops at the first '=' or invalid character; only padding may follow.
    if (clean.find_first_not_of('=', read) != std::string::npos || clean.size() - read > 2)
        throw ServiceError(422, "invalid base64 payload");
    out.resize(written);
    return out;
}

}  // namespace scefis
