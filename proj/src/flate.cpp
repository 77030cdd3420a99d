#include "recon/flate.hpp"

#include <array>
#include <cstring>

#include "recon/errors.hpp"

namespace recon {

namespace {

std::array<std::uint32_t, 256> make_crc_table() {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t n = 0; n < 256; ++n) {
        std::uint32_t c = n;
        for (int k = 0; k < 8; ++k)
            c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
        t[n] = c;
    }
    return t;
}

const std::array<std::uint32_t, 256> kCrcTable = make_crc_table();

} // namespace

std::uint32_t crc32(const std::uint8_t* data, std::size_t len, std::uint32_t seed) {
    std::uint32_t c = seed ^ 0xffffffffu;
    for (std::size_t i = 0; i < len; ++i)
        c = kCrcTable[(c ^ data[i]) & 0xff] ^ (c >> 8);
    return c ^ 0xffffffffu;
}

std::uint32_t adler32(const std::uint8_t* data, std::size_t len) {
    std::uint32_t a = 1, b = 0;
    for (std::size_t i = 0; i < len; ++i) {
        a = (a + data[i]) % 65521u;
        b = (b + a) % 65521u;
    }
    return (b << 16) | a;
}

std::vector<std::uint8_t> zlib_store(const std::vector<std::uint8_t>& raw) {
    std::vector<std::uint8_t> out;
    out.reserve(raw.size() + raw.size() / 65535 * 5 + 16);
    out.push_back(0x78);  // CM=8, CINFO=7
    out.push_back(0x01);  // no dict, fastest-compression flag, FCHECK valid

    std::size_t pos = 0;
    do {
        const std::size_t n = std::min<std::size_t>(raw.size() - pos, 65535);
        const bool final = pos + n == raw.size();
        out.push_back(final ? 1 : 0);  // BFINAL, BTYPE=00 stored
        out.push_back(static_cast<std::uint8_t>(n & 0xff));
        out.push_back(static_cast<std::uint8_t>(n >> 8));
        out.push_back(static_cast<std::uint8_t>(~n & 0xff));
        out.push_back(static_cast<std::uint8_t>((~n >> 8) & 0xff));
        out.insert(out.end(), raw.begin() + pos, raw.begin() + pos + n);
        pos += n;
    } while (pos < raw.size());

    const std::uint32_t ad = adler32(raw.data(), raw.size());
    out.push_back(static_cast<std::uint8_t>(ad >> 24));
    out.push_back(static_cast<std::uint8_t>(ad >> 16));
    out.push_back(static_cast<std::uint8_t>(ad >> 8));
    out.push_back(static_cast<std::uint8_t>(ad));
    return out;
}

namespace {

struct BitReader {
    const std::uint8_t* data;
    std::size_t len;
    std::size_t byte = 0;
    int bit = 0;

    std::uint32_t bits(int count) {
        std::uint32_t v = 0;
        for (int i = 0; i < count; ++i) {
            if (byte >= len) throw IoError("inflate: unexpected end of stream");
            v |= static_cast<std::uint32_t>((data[byte] >> bit) & 1) << i;
            if (++bit == 8) {
                bit = 0;
                ++byte;
            }
        }
        return v;
    }

    void align() {
        if (bit != 0) {
            bit = 0;
            ++byte;
        }
    }
};

// Canonical Huffman decoder built from code lengths.
struct Huffman {
    // count[l] = number of codes of length l; symbols sorted by (length, value)
    std::array<std::uint16_t, 16> count{};
    std::vector<std::uint16_t> symbols;

    void build(const std::uint8_t* lengths, int n) {
        count.fill(0);
        for (int i = 0; i < n; ++i) ++count[lengths[i]];
        count[0] = 0;
        std::array<std::uint16_t, 16> offs{};
        for (int l = 1; l < 16; ++l) offs[l] = offs[l - 1] + count[l - 1];
        symbols.assign(offs[15] + count[15], 0);
        for (int i = 0; i < n; ++i)
            if (lengths[i] != 0) symbols[offs[lengths[i]]++] = static_cast<std::uint16_t>(i);
    }

    int decode(BitReader& br) const {
        int code = 0, first = 0, index = 0;
        for (int l = 1; l < 16; ++l) {
            code |= static_cast<int>(br.bits(1));
            const int cnt = count[l];
            if (code - first < cnt) return symbols[index + (code - first)];
            index += cnt;
            first = (first + cnt) << 1;
            code <<= 1;
        }
        throw FormatError("inflate: invalid Huffman code");
    }
};

constexpr std::uint16_t kLenBase[29] = {3,  4,  5,  6,  7,  8,  9,  10, 11,  13,
                                        15, 17, 19, 23, 27, 31, 35, 43, 51,  59,
                                        67, 83, 99, 115, 131, 163, 195, 227, 258};
constexpr std::uint8_t kLenExtra[29] = {0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2,
                                        2, 3, 3, 3, 3, 4, 4, 4, 4, 5, 5, 5, 5, 0};
constexpr std::uint16_t kDistBase[30] = {1,    2,    3,    4,    5,    7,    9,    13,
                                         17,   25,   33,   49,   65,   97,   129,  193,
                                         257,  385,  513,  769,  1025, 1537, 2049, 3073,
                                         4097, 6145, 8193, 12289, 16385, 24577};
constexpr std::uint8_t kDistExtra[30] = {0, 0, 0, 0, 1, 1, 2, 2,  3,  3,  4,  4,  5,  5, 6,
                                         6, 7, 7, 8, 8, 9, 9, 10, 10, 11, 11, 12, 12, 13, 13};

void inflate_block(BitReader& br, const Huffman& lit, const Huffman& dist,
                   std::vector<std::uint8_t>& out) {
    while (true) {
        const int sym = lit.decode(br);
        if (sym < 256) {
            out.push_back(static_cast<std::uint8_t>(sym));
        } else if (sym == 256) {
            return;
        } else {
            if (sym > 285) throw FormatError("inflate: invalid length symbol");
            const int li = sym - 257;
            const std::size_t length = kLenBase[li] + br.bits(kLenExtra[li]);
            const int ds = dist.decode(br);
            if (ds > 29) throw FormatError("inflate: invalid distance symbol");
            const std::size_t distance = kDistBase[ds] + br.bits(kDistExtra[ds]);
            if (distance > out.size()) throw FormatError("inflate: distance too far back");
            for (std::size_t i = 0; i < length; ++i)
                out.push_back(out[out.size() - distance]);
        }
    }
}

} // namespace

std::vector<std::uint8_t> zlib_inflate(const std::uint8_t* data, std::size_t len) {
    if (len < 6) throw FormatError("inflate: stream too short for zlib framing");
    if ((data[0] & 0x0f) != 8) throw FormatError("inflate: not a deflate stream");
    if (((data[0] << 8) | data[1]) % 31 != 0) throw FormatError("inflate: bad zlib header check");
    if (data[1] & 0x20) throw UnsupportedLayout("inflate: preset dictionaries unsupported");

    BitReader br{data + 2, len - 6};
    std::vector<std::uint8_t> out;

    bool final = false;
    while (!final) {
        final = br.bits(1) != 0;
        const std::uint32_t type = br.bits(2);
        if (type == 0) {
            br.align();
            if (br.byte + 4 > br.len) throw IoError("inflate: truncated stored block");
            const std::size_t n = br.data[br.byte] | (br.data[br.byte + 1] << 8);
            const std::size_t nn = br.data[br.byte + 2] | (br.data[br.byte + 3] << 8);
            if ((n ^ nn) != 0xffff) throw FormatError("inflate: stored block length mismatch");
            br.byte += 4;
            if (br.byte + n > br.len) throw IoError("inflate: truncated stored block data");
            out.insert(out.end(), br.data + br.byte, br.data + br.byte + n);
            br.byte += n;
        } else if (type == 1) {
            static Huffman fixed_lit, fixed_dist;
            static const bool built = [] {
                std::uint8_t ll[288];
                for (int i = 0; i < 144; ++i) ll[i] = 8;
                for (int i = 144; i < 256; ++i) ll[i] = 9;
                for (int i = 256; i < 280; ++i) ll[i] = 7;
                for (int i = 280; i < 288; ++i) ll[i] = 8;
                fixed_lit.build(ll, 288);
                std::uint8_t dl[30];
                for (int i = 0; i < 30; ++i) dl[i] = 5;
                fixed_dist.build(dl, 30);
                return true;
            }();
            (void)built;
            inflate_block(br, fixed_lit, fixed_dist, out);
        } else if (type == 2) {
            const int hlit = static_cast<int>(br.bits(5)) + 257;
            const int hdist = static_cast<int>(br.bits(5)) + 1;
            const int hclen = static_cast<int>(br.bits(4)) + 4;
            static const int kOrder[19] = {16, 17, 18, 0, 8,  7, 9,  6, 10, 5,
                                           11, 4,  12, 3, 13, 2, 14, 1, 15};
            std::uint8_t clens[19] = {};
            for (int i = 0; i < hclen; ++i)
                clens[kOrder[i]] = static_cast<std::uint8_t>(br.bits(3));
            Huffman cl;
            cl.build(clens, 19);

            std::uint8_t lens[288 + 32] = {};
            const int total = hlit + hdist;
            int n = 0;
            while (n < total) {
                const int sym = cl.decode(br);
                if (sym < 16) {
                    lens[n++] = static_cast<std::uint8_t>(sym);
                } else if (sym == 16) {
                    if (n == 0) throw FormatError("inflate: repeat with no previous length");
                    const int rep = 3 + static_cast<int>(br.bits(2));
                    if (n + rep > total) throw FormatError("inflate: code length overflow");
                    for (int i = 0; i < rep; ++i, ++n) lens[n] = lens[n - 1];
                } else if (sym == 17) {
                    n += 3 + static_cast<int>(br.bits(3));
                } else {
                    n += 11 + static_cast<int>(br.bits(7));
                }
                if (n > total) throw FormatError("inflate: code length overflow");
            }
            Huffman lit, dist;
            lit.build(lens, hlit);
            dist.build(lens + hlit, hdist);
            inflate_block(br, lit, dist, out);
        } else {
            throw FormatError("inflate: reserved block type");
        }
    }

    br.align();
    if (2 + br.byte + 4 > len) throw IoError("inflate: missing adler32 trailer");
    const std::uint8_t* tr = data + 2 + br.byte;
    const std::uint32_t expected = (static_cast<std::uint32_t>(tr[0]) << 24) |
                                   (static_cast<std::uint32_t>(tr[1]) << 16) |
                                   (static_cast<std::uint32_t>(tr[2]) << 8) | tr[3];
    if (adler32(out.data(), out.size()) != expected)
        throw FormatError("inflate: adler32 mismatch");
    return out;
}

} // namespace recon
