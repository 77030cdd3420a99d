#include <doctest.h>

#include <cstring>
#include <string>

#include "recon/npy.hpp"
#include "recon/rng.hpp"

using namespace recon;

namespace {

// numpy.save output for arange(51).reshape(3,17) * 0.25 - 3.0, dtype <f8.
// Frozen here as the independent-implementation fixture.
const char* kNumpyFixtureHex =
    "934e554d5059010076007b276465736372273a20273c6638272c2027666f727472616e5f6f72646572273a2046616c73"
    "652c20277368617065273a2028332c203137292c207d2020202020202020202020202020202020202020202020202020"
    "202020202020202020202020202020202020202020202020202020202020200a00000000000008c000000000000006c0"
    "00000000000004c000000000000002c000000000000000c0000000000000fcbf000000000000f8bf000000000000f4bf"
    "000000000000f0bf000000000000e8bf000000000000e0bf000000000000d0bf0000000000000000000000000000d03f"
    "000000000000e03f000000000000e83f000000000000f03f000000000000f43f000000000000f83f000000000000fc3f"
    "000000000000004000000000000002400000000000000440000000000000064000000000000008400000000000000a40"
    "0000000000000c400000000000000e400000000000001040000000000000114000000000000012400000000000001340"
    "000000000000144000000000000015400000000000001640000000000000174000000000000018400000000000001940"
    "0000000000001a400000000000001b400000000000001c400000000000001d400000000000001e400000000000001f40"
    "000000000000204000000000008020400000000000002140000000000080214000000000000022400000000000802240"
    "0000000000002340";

std::vector<std::uint8_t> from_hex(const std::string& hex) {
    std::vector<std::uint8_t> out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i + 1 < hex.size(); i += 2)
        out.push_back(static_cast<std::uint8_t>(std::stoi(hex.substr(i, 2), nullptr, 16)));
    return out;
}

PoseBoundsTable random_table(int rows, std::uint64_t seed) {
    Rng rng(seed);
    PoseBoundsTable t;
    t.rows.resize(rows);
    for (auto& row : t.rows)
        for (double& v : row) v = rng.uniform(-10, 10);
    return t;
}

} // namespace

TEST_SUITE("npy") {

TEST_CASE("one-row table writes 128 header bytes plus 136 data bytes") {
    PoseBoundsTable t;
    t.rows.push_back({1, 0, 0, 0, 512, 0, 1, 0, 0, 512, 0, 0, 1, 0, 500, 0.5, 2});
    std::vector<std::uint8_t> bytes;
    const std::size_t n = write_npy(t, bytes);
    CHECK(n == 264);
    CHECK(bytes.size() == 264);

    // magic, version 1.0, little-endian header length 118
    const std::uint8_t expect_prefix[10] = {0x93, 'N', 'U', 'M', 'P', 'Y', 1, 0, 0x76, 0};
    CHECK(std::memcmp(bytes.data(), expect_prefix, 10) == 0);
    CHECK(bytes[127] == '\n');
    const std::string header(bytes.begin() + 10, bytes.begin() + 128);
    CHECK(header.find("{'descr': '<f8', 'fortran_order': False, 'shape': (1, 17), }") == 0);
}

TEST_CASE("header arithmetic: prefix through newline is a multiple of 64") {
    for (int n : {1, 2, 9, 10, 99, 100, 512, 1234}) {
        PoseBoundsTable t;
        t.rows.resize(n);
        std::vector<std::uint8_t> bytes;
        write_npy(t, bytes);
        const std::size_t header_len = bytes[8] | (static_cast<std::size_t>(bytes[9]) << 8);
        CHECK((10 + header_len) % 64 == 0);
        CHECK(bytes[10 + header_len - 1] == '\n');
        CHECK(bytes.size() == 10 + header_len + static_cast<std::size_t>(n) * 17 * 8);
    }
}

TEST_CASE("write/read round trips and is deterministic") {
    const PoseBoundsTable t = random_table(7, 42);
    std::vector<std::uint8_t> a, b;
    write_npy(t, a);
    write_npy(t, b);
    CHECK(a == b);

    const PoseBoundsTable back = read_npy(a);
    CHECK(back == t);

    std::vector<std::uint8_t> again;
    write_npy(back, again);
    CHECK(again == a);
}

TEST_CASE("independent numpy fixture parses to the exact values") {
    const std::vector<std::uint8_t> fixture = from_hex(kNumpyFixtureHex);
    const PoseBoundsTable t = read_npy(fixture);
    REQUIRE(t.size() == 3);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 17; ++c)
            CHECK(t.rows[r][c] == 0.25 * (r * 17 + c) - 3.0);

    // Our writer agrees byte for byte with the reference implementation.
    std::vector<std::uint8_t> rewritten;
    write_npy(t, rewritten);
    CHECK(rewritten == fixture);
}

TEST_CASE("malformed inputs are rejected with the offending field named") {
    const PoseBoundsTable t = random_table(2, 7);
    std::vector<std::uint8_t> good;
    write_npy(t, good);

    SUBCASE("bad magic") {
        std::vector<std::uint8_t> bad = good;
        bad[0] = 'X';
        CHECK_THROWS_AS(read_npy(bad), FormatError);
    }
    SUBCASE("version 2 is out of scope") {
        std::vector<std::uint8_t> bad = good;
        bad[6] = 2;
        CHECK_THROWS_AS(read_npy(bad), FormatError);
    }
    SUBCASE("wrong column count") {
        std::vector<std::uint8_t> bad = good;
        // header says (2, 17); patch to (2, 16)
        const std::string s(bad.begin(), bad.end());
        const std::size_t pos = s.find("17)");
        REQUIRE(pos != std::string::npos);
        bad[pos] = '1';
        bad[pos + 1] = '6';
        CHECK_THROWS_AS(read_npy(bad), UnsupportedLayout);
    }
    SUBCASE("fortran order") {
        std::vector<std::uint8_t> bad = good;
        const std::string s(bad.begin(), bad.end());
        const std::size_t pos = s.find("False");
        REQUIRE(pos != std::string::npos);
        const char* t_str = "True,";
        std::memcpy(bad.data() + pos, t_str, 5);
        CHECK_THROWS_AS(read_npy(bad), UnsupportedLayout);
    }
    SUBCASE("wrong dtype") {
        std::vector<std::uint8_t> bad = good;
        const std::string s(bad.begin(), bad.end());
        const std::size_t pos = s.find("<f8");
        REQUIRE(pos != std::string::npos);
        bad[pos + 2] = '4';
        CHECK_THROWS_AS(read_npy(bad), UnsupportedLayout);
    }
    SUBCASE("truncated data block") {
        std::vector<std::uint8_t> bad = good;
        bad.resize(bad.size() - 9);
        CHECK_THROWS_AS(read_npy(bad), IoError);
    }
}

TEST_CASE("random corruption never escapes the error types") {
    const PoseBoundsTable t = random_table(3, 77);
    std::vector<std::uint8_t> good;
    write_npy(t, good);

    Rng rng(78);
    for (int trial = 0; trial < 400; ++trial) {
        std::vector<std::uint8_t> bad = good;
        const int mode = static_cast<int>(rng.next() % 3);
        if (mode == 0) {
            bad[rng.next() % bad.size()] ^= static_cast<std::uint8_t>(1 + rng.next() % 255);
        } else if (mode == 1) {
            bad.resize(rng.next() % bad.size());
        } else {
            bad[rng.next() % 30] ^= 0xff;  // header-area damage
        }
        try {
            read_npy(bad);  // surviving a data-only flip is fine
        } catch (const Error&) {
            // any recon error type is acceptable
        }
    }
}

TEST_CASE("empty table refuses to serialize") {
    PoseBoundsTable t;
    std::vector<std::uint8_t> out;
    CHECK_THROWS_AS(write_npy(t, out), ValidationError);
}

} // TEST_SUITE
