#include "recon/zip.hpp"

#include <cstring>

#include "recon/errors.hpp"
#include "recon/flate.hpp"

namespace recon {

namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEocdSig = 0x06054b50;
// 1980-01-01 00:00:00 in DOS date/time encoding.
constexpr std::uint16_t kDosDate = (1 << 5) | 1;
constexpr std::uint16_t kDosTime = 0;

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    put16(out, static_cast<std::uint16_t>(v & 0xffff));
    put16(out, static_cast<std::uint16_t>(v >> 16));
}

std::uint16_t get16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

} // namespace

std::vector<std::uint8_t> zip_pack(const std::vector<ZipEntry>& entries) {
    std::vector<std::uint8_t> out;
    std::vector<std::uint32_t> offsets;
    std::vector<std::uint32_t> crcs;
    offsets.reserve(entries.size());
    crcs.reserve(entries.size());

    for (const ZipEntry& e : entries) {
        offsets.push_back(static_cast<std::uint32_t>(out.size()));
        const std::uint32_t crc = crc32(e.data.data(), e.data.size());
        crcs.push_back(crc);
        put32(out, kLocalSig);
        put16(out, 20);          // version needed
        put16(out, 0);           // flags
        put16(out, 0);           // method: stored
        put16(out, kDosTime);
        put16(out, kDosDate);
        put32(out, crc);
        put32(out, static_cast<std::uint32_t>(e.data.size()));  // compressed
        put32(out, static_cast<std::uint32_t>(e.data.size()));  // uncompressed
        put16(out, static_cast<std::uint16_t>(e.name.size()));
        put16(out, 0);           // extra length
        out.insert(out.end(), e.name.begin(), e.name.end());
        out.insert(out.end(), e.data.begin(), e.data.end());
    }

    const std::uint32_t cd_offset = static_cast<std::uint32_t>(out.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const ZipEntry& e = entries[i];
        put32(out, kCentralSig);
        put16(out, 20);          // version made by
        put16(out, 20);          // version needed
        put16(out, 0);
        put16(out, 0);
        put16(out, kDosTime);
        put16(out, kDosDate);
        put32(out, crcs[i]);
        put32(out, static_cast<std::uint32_t>(e.data.size()));
        put32(out, static_cast<std::uint32_t>(e.data.size()));
        put16(out, static_cast<std::uint16_t>(e.name.size()));
        put16(out, 0);           // extra
        put16(out, 0);           // comment
        put16(out, 0);           // disk number
        put16(out, 0);           // internal attrs
        put32(out, 0);           // external attrs
        put32(out, offsets[i]);
        out.insert(out.end(), e.name.begin(), e.name.end());
    }
    const std::uint32_t cd_size = static_cast<std::uint32_t>(out.size()) - cd_offset;

    put32(out, kEocdSig);
    put16(out, 0);
    put16(out, 0);
    put16(out, static_cast<std::uint16_t>(entries.size()));
    put16(out, static_cast<std::uint16_t>(entries.size()));
    put32(out, cd_size);
    put32(out, cd_offset);
    put16(out, 0);               // comment length
    return out;
}

std::vector<ZipEntry> zip_unpack(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 22) throw FormatError("zip: too short for an end-of-directory record");

    // EOCD is the last record; scan backwards past any archive comment.
    std::size_t eocd = std::string::npos;
    const std::size_t lo = bytes.size() >= 22 + 65535 ? bytes.size() - 22 - 65535 : 0;
    for (std::size_t i = bytes.size() - 22 + 1; i-- > lo;) {
        if (get32(bytes.data() + i) == kEocdSig) {
            eocd = i;
            break;
        }
    }
    if (eocd == std::string::npos) throw FormatError("zip: end-of-directory record not found");

    const std::uint16_t count = get16(bytes.data() + eocd + 10);
    std::size_t pos = get32(bytes.data() + eocd + 16);

    std::vector<ZipEntry> entries;
    entries.reserve(count);
    for (int i = 0; i < count; ++i) {
        if (pos + 46 > bytes.size() || get32(bytes.data() + pos) != kCentralSig)
            throw FormatError("zip: corrupt central directory");
        const std::uint16_t method = get16(bytes.data() + pos + 10);
        const std::uint32_t crc = get32(bytes.data() + pos + 16);
        const std::uint32_t csize = get32(bytes.data() + pos + 20);
        const std::uint32_t usize = get32(bytes.data() + pos + 24);
        const std::uint16_t name_len = get16(bytes.data() + pos + 28);
        const std::uint16_t extra_len = get16(bytes.data() + pos + 30);
        const std::uint16_t comment_len = get16(bytes.data() + pos + 32);
        const std::uint32_t local_off = get32(bytes.data() + pos + 42);
        if (pos + 46 + name_len > bytes.size())
            throw FormatError("zip: central directory name runs past end of file");
        const std::string name(bytes.begin() + pos + 46, bytes.begin() + pos + 46 + name_len);
        pos += 46u + name_len + extra_len + comment_len;

        if (method != 0)
            throw UnsupportedLayout("zip: member '" + name + "' uses compression method " +
                                    std::to_string(method) + "; only stored is supported");
        if (csize != usize) throw FormatError("zip: stored member size mismatch for " + name);

        if (local_off + 30 > bytes.size() || get32(bytes.data() + local_off) != kLocalSig)
            throw FormatError("zip: bad local header for " + name);
        const std::uint16_t lname = get16(bytes.data() + local_off + 26);
        const std::uint16_t lextra = get16(bytes.data() + local_off + 28);
        const std::size_t data_off = local_off + 30u + lname + lextra;
        if (data_off + usize > bytes.size()) throw IoError("zip: truncated member " + name);

        ZipEntry e;
        e.name = name;
        e.data.assign(bytes.begin() + data_off, bytes.begin() + data_off + usize);
        if (crc32(e.data.data(), e.data.size()) != crc)
            throw FormatError("zip: crc mismatch for " + name);
        entries.push_back(std::move(e));
    }
    return entries;
}

} // namespace recon
