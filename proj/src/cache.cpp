#include "echlab/cache.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>

namespace echlab {

namespace {

constexpr char kMagic[8] = {'E', 'C', 'H', 'L', 'A', 'B', 'S', 'P'};

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;

    bool take(std::size_t n) { return pos + n <= buf.size(); }
    std::uint64_t get(int bytes) {
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += static_cast<std::size_t>(bytes);
        return v;
    }
};

std::string digits21(long double x) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 21);
    return std::string(buf, r.ptr);
}

}  // namespace

std::optional<std::filesystem::path> cache_dir_from_env() {
    const char* v = std::getenv("ECHLAB_CACHE_DIR");
    if (!v || !*v) return std::nullopt;
    return std::filesystem::path(v);
}

std::string spectrum_cache_key(const Ellipsoid& e, bool formal) {
    return "a=" + digits21(e.a) + ";b=" + digits21(e.b) + ";formal=" + (formal ? "1" : "0");
}

std::filesystem::path spectrum_cache_path(const std::filesystem::path& dir, const std::string& key) {
    char hex[17];
    auto r = std::to_chars(hex, hex + 16, fnv1a(key), 16);
    std::string h(hex, r.ptr);
    h.insert(0, 16 - h.size(), '0');
    return dir / ("spectrum-v" + std::to_string(kSpectrumCacheVersion) + "-" + h + ".bin");
}

void write_spectrum_file(const std::filesystem::path& p, const std::string& key, bool formal,
                         const std::vector<SpectrumEntry>& entries) {
    std::string out(kMagic, kMagic + 8);
    put_u32(out, kSpectrumCacheVersion);
    put_u32(out, formal ? 1u : 0u);
    put_u32(out, static_cast<std::uint32_t>(key.size()));
    out += key;
    put_u64(out, entries.size());
    for (const auto& s : entries) {
        put_u64(out, static_cast<std::uint64_t>(s.m));
        put_u64(out, static_cast<std::uint64_t>(s.n));
    }
    put_u64(out, fnv1a(out));
    std::filesystem::create_directories(p.parent_path());
    auto tmp = p;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write cache file " + tmp.string());
        os.write(out.data(), static_cast<std::streamsize>(out.size()));
    }
    std::filesystem::rename(tmp, p);
}

std::optional<std::vector<SpectrumEntry>> read_spectrum_file(const std::filesystem::path& p, const Ellipsoid& e,
                                                             const std::string& key) {
    std::ifstream is(p, std::ios::binary);
    if (!is) return std::nullopt;
    std::string buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    Reader r{buf};
    if (!r.take(8 + 12) || std::memcmp(buf.data(), kMagic, 8) != 0) return std::nullopt;
    r.pos = 8;
    if (r.get(4) != kSpectrumCacheVersion) return std::nullopt;
    r.get(4);
    auto klen = static_cast<std::size_t>(r.get(4));
    if (!r.take(klen) || buf.compare(r.pos, klen, key) != 0) return std::nullopt;
    r.pos += klen;
    if (!r.take(8)) return std::nullopt;
    std::uint64_t count = r.get(8);
    if (count > (buf.size() - r.pos) / 16 || !r.take(count * 16 + 8)) return std::nullopt;
    std::size_t body_end = r.pos + count * 16;
    if (body_end + 8 != buf.size()) return std::nullopt;
    Reader tail{buf, body_end};
    if (tail.get(8) != fnv1a(buf.substr(0, body_end))) return std::nullopt;
    std::vector<SpectrumEntry> out;
    out.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) {
        auto m = static_cast<std::int64_t>(r.get(8));
        auto n = static_cast<std::int64_t>(r.get(8));
        auto ki = static_cast<std::int64_t>(k);
        out.push_back({ki, m * e.a + n * e.b, 2 * ki, m, n});
    }
    return out;
}

std::vector<SpectrumEntry> cached_spectrum_prefix(const Ellipsoid& e, std::size_t count, const SpectrumOptions& opt,
                                                  const std::optional<std::filesystem::path>& dir) {
    if (!dir) return spectrum_prefix(e, count, opt);
    const std::string key = spectrum_cache_key(e, opt.formal);
    const auto path = spectrum_cache_path(*dir, key);
    if (auto hit = read_spectrum_file(path, e, key); hit && hit->size() >= count) {
        hit->resize(count);
        return *hit;
    }
    auto fresh = spectrum_prefix(e, count, opt);
    write_spectrum_file(path, key, opt.formal, fresh);
    return fresh;
}

}  // namespace echlab
