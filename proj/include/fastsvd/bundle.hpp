#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fastsvd {

struct NamedTensor {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> data;
};

/// Single-file container: a human-readable key=value config section plus a
/// table of named, shape-tagged f64 little-endian tensors, closed by an
/// FNV-1a checksum. Round trips are byte-exact.
struct BundleFile {
    std::map<std::string, std::string> config;
    std::vector<NamedTensor> tensors;

    bool has_tensor(const std::string& name) const;
    const NamedTensor& tensor(const std::string& name) const;
    const std::string& value(const std::string& key) const;
    bool has_value(const std::string& key) const { return config.count(key) > 0; }
};

void write_bundle_file(const std::string& path, const BundleFile& bundle);
BundleFile read_bundle_file(const std::string& path);

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t seed = 14695981039346656037ull);

}  // namespace fastsvd
