#include "fastsvd/bundle.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fastsvd {

namespace {

constexpr char kMagic[4] = {'F', 'S', 'V', 'B'};
constexpr std::uint32_t kBundleVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "bundle container assumes a little-endian host");

template <typename T>
void append_raw(std::string& buf, T value) {
    buf.append(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T take_raw(const std::string& buf, std::size_t& pos, const char* what) {
    if (pos + sizeof(T) > buf.size()) {
        throw std::runtime_error(std::string("bundle truncated while reading ") + what);
    }
    T value{};
    std::memcpy(&value, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return value;
}

}  // namespace

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t hash = seed;
    for (std::size_t i = 0; i < bytes; ++i) {
        hash ^= p[i];
        hash *= 1099511628211ull;
    }
    return hash;
}

bool BundleFile::has_tensor(const std::string& name) const {
    for (const auto& t : tensors) {
        if (t.name == name) return true;
    }
    return false;
}

const NamedTensor& BundleFile::tensor(const std::string& name) const {
    for (const auto& t : tensors) {
        if (t.name == name) return t;
    }
    throw std::runtime_error("bundle is missing tensor section: " + name);
}

const std::string& BundleFile::value(const std::string& key) const {
    const auto it = config.find(key);
    if (it == config.end()) {
        throw std::runtime_error("bundle is missing config key: " + key);
    }
    return it->second;
}

void write_bundle_file(const std::string& path, const BundleFile& bundle) {
    std::string buf;
    buf.append(kMagic, 4);
    append_raw<std::uint32_t>(buf, kBundleVersion);

    std::string config_text;
    for (const auto& [key, value] : bundle.config) {
        if (key.find('\n') != std::string::npos || value.find('\n') != std::string::npos) {
            throw std::invalid_argument("bundle config entries must be single-line");
        }
        config_text += key + "=" + value + "\n";
    }
    append_raw<std::uint64_t>(buf, config_text.size());
    buf += config_text;

    append_raw<std::uint32_t>(buf, static_cast<std::uint32_t>(bundle.tensors.size()));
    for (const NamedTensor& t : bundle.tensors) {
        append_raw<std::uint16_t>(buf, static_cast<std::uint16_t>(t.name.size()));
        buf += t.name;
        append_raw<std::uint8_t>(buf, static_cast<std::uint8_t>(t.shape.size()));
        std::size_t count = 1;
        for (std::size_t d : t.shape) {
            append_raw<std::uint64_t>(buf, d);
            count *= d;
        }
        if (count != t.data.size()) {
            throw std::invalid_argument("bundle tensor " + t.name + " has inconsistent shape");
        }
        buf.append(reinterpret_cast<const char*>(t.data.data()), t.data.size() * sizeof(double));
    }
    append_raw<std::uint64_t>(buf, fnv1a(buf.data(), buf.size()));

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_bundle_file: cannot open " + path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("write_bundle_file: write failed for " + path);
}

BundleFile read_bundle_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_bundle_file: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string buf = ss.str();

    if (buf.size() < 4 + sizeof(std::uint32_t) + sizeof(std::uint64_t)) {
        throw std::runtime_error("read_bundle_file: file too short: " + path);
    }
    if (std::memcmp(buf.data(), kMagic, 4) != 0) {
        throw std::runtime_error("read_bundle_file: bad magic bytes in " + path);
    }

    const std::size_t checksum_pos = buf.size() - sizeof(std::uint64_t);
    std::uint64_t stored = 0;
    std::memcpy(&stored, buf.data() + checksum_pos, sizeof(stored));
    if (fnv1a(buf.data(), checksum_pos) != stored) {
        throw std::runtime_error("read_bundle_file: checksum mismatch in " + path);
    }

    std::size_t pos = 4;
    const auto version = take_raw<std::uint32_t>(buf, pos, "version");
    if (version != kBundleVersion) {
        throw std::runtime_error("read_bundle_file: unsupported bundle version " +
                                 std::to_string(version));
    }

    BundleFile bundle;
    const auto config_len = take_raw<std::uint64_t>(buf, pos, "config length");
    if (pos + config_len > checksum_pos) {
        throw std::runtime_error("read_bundle_file: truncated config section");
    }
    std::stringstream config_stream(buf.substr(pos, config_len));
    pos += config_len;
    std::string line;
    while (std::getline(config_stream, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("read_bundle_file: malformed config line: " + line);
        }
        bundle.config[line.substr(0, eq)] = line.substr(eq + 1);
    }

    const auto n_tensors = take_raw<std::uint32_t>(buf, pos, "tensor count");
    for (std::uint32_t i = 0; i < n_tensors; ++i) {
        NamedTensor t;
        const auto name_len = take_raw<std::uint16_t>(buf, pos, "tensor name length");
        if (pos + name_len > checksum_pos) {
            throw std::runtime_error("read_bundle_file: truncated tensor name");
        }
        t.name = buf.substr(pos, name_len);
        pos += name_len;
        const auto ndim = take_raw<std::uint8_t>(buf, pos, "tensor rank");
        std::size_t count = 1;
        for (std::uint8_t d = 0; d < ndim; ++d) {
            t.shape.push_back(take_raw<std::uint64_t>(buf, pos, "tensor dimension"));
            count *= t.shape.back();
        }
        if (pos + count * sizeof(double) > checksum_pos) {
            throw std::runtime_error("read_bundle_file: truncated tensor data for " + t.name);
        }
        t.data.resize(count);
        std::memcpy(t.data.data(), buf.data() + pos, count * sizeof(double));
        pos += count * sizeof(double);
        bundle.tensors.push_back(std::move(t));
    }
    return bundle;
}

}  // namespace fastsvd
