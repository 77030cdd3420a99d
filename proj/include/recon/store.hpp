#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "recon/errors.hpp"

namespace recon {

/// Filesystem-backed blob store with bucket/key semantics: a written key is
/// immediately readable, digests match content, and puts are atomic (readers
/// never observe partial writes).
class ObjectStore {
public:
    explicit ObjectStore(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    /// Atomic write (temp file + rename within the bucket).
    void put(const std::string& bucket, const std::string& key,
             const std::vector<std::uint8_t>& bytes);
    void put_text(const std::string& bucket, const std::string& key,
                  const std::string& text);

    std::vector<std::uint8_t> get(const std::string& bucket, const std::string& key) const;
    std::string get_text(const std::string& bucket, const std::string& key) const;

    bool exists(const std::string& bucket, const std::string& key) const;

    /// Keys under the prefix, lexicographically sorted.
    std::vector<std::string> list(const std::string& bucket,
                                  const std::string& prefix = "") const;

    /// FNV-1a 64-bit content digest as a hex string.
    std::string digest(const std::string& bucket, const std::string& key) const;

private:
    std::filesystem::path object_path(const std::string& bucket,
                                      const std::string& key) const;
    std::filesystem::path root_;
};

std::string fnv1a_hex(const std::vector<std::uint8_t>& bytes);

} // namespace recon
