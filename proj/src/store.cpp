#include "recon/store.hpp"

#include <unistd.h>

#include <atomic>
#include <fstream>

namespace recon {

namespace fs = std::filesystem;

std::string fnv1a_hex(const std::vector<std::uint8_t>& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ObjectStore::ObjectStore(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw IoError("store: cannot create root " + root_.string());
}

fs::path ObjectStore::object_path(const std::string& bucket, const std::string& key) const {
    if (bucket.empty() || key.empty())
        throw InvalidInput("store: bucket and key must be non-empty");
    if (bucket.find('/') != std::string::npos)
        throw InvalidInput("store: bucket name cannot contain '/'");
    if (key.front() == '/' || key.find("..") != std::string::npos)
        throw InvalidInput("store: key may not be absolute or contain '..'");
    return root_ / bucket / key;
}

void ObjectStore::put(const std::string& bucket, const std::string& key,
                      const std::vector<std::uint8_t>& bytes) {
    static std::atomic<std::uint64_t> counter{0};
    const fs::path target = object_path(bucket, key);
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw IoError("store: cannot create directories for " + target.string());

    // pid in the temp name keeps concurrent processes off each other's files
    const fs::path tmp =
        target.parent_path() /
        (".put-" + std::to_string(::getpid()) + "-" +
         std::to_string(counter.fetch_add(1)) + "-" + target.filename().string());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("store: cannot open temp file " + tmp.string());
        f.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
        if (!f) throw IoError("store: write failed for " + tmp.string());
    }
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("store: atomic rename failed for " + target.string());
    }
}

void ObjectStore::put_text(const std::string& bucket, const std::string& key,
                           const std::string& text) {
    put(bucket, key, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::vector<std::uint8_t> ObjectStore::get(const std::string& bucket,
                                           const std::string& key) const {
    const fs::path p = object_path(bucket, key);
    std::ifstream f(p, std::ios::binary);
    if (!f) throw NotFoundError("store: no object " + bucket + "/" + key);
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(f)),
                                     std::istreambuf_iterator<char>());
}

std::string ObjectStore::get_text(const std::string& bucket, const std::string& key) const {
    const std::vector<std::uint8_t> bytes = get(bucket, key);
    return std::string(bytes.begin(), bytes.end());
}

bool ObjectStore::exists(const std::string& bucket, const std::string& key) const {
    std::error_code ec;
    return fs::is_regular_file(object_path(bucket, key), ec);
}

std::vector<std::string> ObjectStore::list(const std::string& bucket,
                                           const std::string& prefix) const {
    std::vector<std::string> keys;
    const fs::path dir = root_ / bucket;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) return keys;
    for (const auto& entry : fs::recursive_directory_iterator(dir, ec)) {
        if (!entry.is_regular_file()) continue;
        std::string key = fs::relative(entry.path(), dir).generic_string();
        if (entry.path().filename().string().starts_with(".put-")) continue;
        if (key.compare(0, prefix.size(), prefix) == 0) keys.push_back(std::move(key));
    }
    std::sort(keys.begin(), keys.end());
    return keys;
}

std::string ObjectStore::digest(const std::string& bucket, const std::string& key) const {
    return fnv1a_hex(get(bucket, key));
}

} // namespace recon
