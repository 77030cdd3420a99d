#include "recon/npy.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

namespace recon {

namespace {

constexpr char kMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

void put_f64_le(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    if constexpr (std::endian::native == std::endian::big)
        bits = __builtin_bswap64(bits);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

double get_f64_le(const std::uint8_t* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    if constexpr (std::endian::native == std::endian::big)
        bits = __builtin_bswap64(bits);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

// Find the value following `'key':` in the header dict; tolerant of the
// spacing and quoting choices of other writers.
std::string dict_value(const std::string& header, const std::string& key) {
    std::size_t pos = header.find("'" + key + "'");
    if (pos == std::string::npos) pos = header.find("\"" + key + "\"");
    if (pos == std::string::npos)
        throw FormatError("npy: header missing '" + key + "' field");
    pos = header.find(':', pos);
    if (pos == std::string::npos)
        throw FormatError("npy: malformed header near '" + key + "'");
    ++pos;
    while (pos < header.size() && header[pos] == ' ') ++pos;
    return header.substr(pos);
}

} // namespace

std::size_t write_npy(const PoseBoundsTable& table, std::vector<std::uint8_t>& out) {
    if (table.rows.empty())
        throw ValidationError("npy: refusing to write an empty table");

    std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (" +
                       std::to_string(table.rows.size()) + ", 17), }";
    // magic(6) + version(2) + length field(2) + header text must be a
    // multiple of 64; the header text ends in a newline.
    const std::size_t unpadded = 10 + dict.size() + 1;
    const std::size_t total = (unpadded + 63) / 64 * 64;
    const std::size_t header_len = total - 10;
    dict.resize(header_len - 1, ' ');
    dict.push_back('\n');

    const std::size_t before = out.size();
    out.insert(out.end(), kMagic, kMagic + 6);
    out.push_back(1);
    out.push_back(0);
    out.push_back(static_cast<std::uint8_t>(header_len & 0xff));
    out.push_back(static_cast<std::uint8_t>(header_len >> 8));
    out.insert(out.end(), dict.begin(), dict.end());

    for (const PoseRow17& row : table.rows)
        for (double v : row) put_f64_le(out, v);
    return out.size() - before;
}

PoseBoundsTable read_npy(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 10 || std::memcmp(bytes.data(), kMagic, 6) != 0)
        throw FormatError("npy: bad magic bytes");
    const int major = bytes[6], minor = bytes[7];
    if (major != 1 || minor != 0)
        throw FormatError("npy: unsupported version " + std::to_string(major) + "." +
                          std::to_string(minor) + " (only 1.0 is handled)");

    const std::size_t header_len = bytes[8] | (static_cast<std::size_t>(bytes[9]) << 8);
    if (bytes.size() < 10 + header_len) throw IoError("npy: truncated header");
    const std::string header(bytes.begin() + 10, bytes.begin() + 10 + header_len);

    const std::string descr = dict_value(header, "descr");
    if (descr.compare(0, 5, "'<f8'") != 0 && descr.compare(0, 5, "\"<f8\"") != 0)
        throw UnsupportedLayout("npy: unsupported descr " + descr.substr(0, 8) +
                                " (need little-endian 8-byte float '<f8')");

    const std::string order = dict_value(header, "fortran_order");
    if (order.compare(0, 5, "False") != 0) {
        if (order.compare(0, 4, "True") == 0)
            throw UnsupportedLayout("npy: fortran_order True is not supported");
        throw FormatError("npy: malformed fortran_order field");
    }

    std::string shape = dict_value(header, "shape");
    if (shape.empty() || shape[0] != '(')
        throw FormatError("npy: malformed shape field");
    shape = shape.substr(1, shape.find(')') - 1);
    std::size_t comma = shape.find(',');
    if (comma == std::string::npos)
        throw UnsupportedLayout("npy: shape " + shape + " is not two-dimensional");
    std::size_t n = 0, cols = 0;
    try {
        n = std::stoul(shape.substr(0, comma));
        const std::string rest = shape.substr(comma + 1);
        cols = std::stoul(rest);
        if (rest.find(',') != std::string::npos &&
            rest.find_first_not_of(" \t", rest.find(',') + 1) != std::string::npos)
            throw UnsupportedLayout("npy: shape (" + shape + ") is not two-dimensional");
    } catch (const std::logic_error&) {
        throw FormatError("npy: unparseable shape (" + shape + ")");
    }
    if (cols != 17)
        throw UnsupportedLayout("npy: shape (" + std::to_string(n) + ", " +
                                std::to_string(cols) + ") does not match (N, 17)");
    if (n < 1) throw UnsupportedLayout("npy: empty table (N = 0)");

    const std::size_t data_off = 10 + header_len;
    if (bytes.size() < data_off + n * 17 * 8)
        throw IoError("npy: truncated data block");

    PoseBoundsTable table;
    table.rows.resize(n);
    const std::uint8_t* p = bytes.data() + data_off;
    for (std::size_t i = 0; i < n; ++i)
        for (int j = 0; j < 17; ++j, p += 8) table.rows[i][j] = get_f64_le(p);
    return table;
}

std::size_t write_npy_file(const PoseBoundsTable& table, const std::filesystem::path& path) {
    std::vector<std::uint8_t> bytes;
    write_npy(table, bytes);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("npy: cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("npy: write failed for " + path.string());
    return bytes.size();
}

PoseBoundsTable read_npy_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("npy: cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    return read_npy(bytes);
}

} // namespace recon
