#include <doctest.h>

#include <filesystem>
#include <thread>

#include "recon/latency.hpp"
#include "recon/store.hpp"

using namespace recon;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    return dir;
}

} // namespace

TEST_SUITE("store") {

TEST_CASE("put/get round trip is byte identical") {
    ObjectStore store(fresh_dir("recon-store-basic"));
    const std::vector<std::uint8_t> payload = {0, 1, 2, 3, 255, 254, 7};
    store.put("pipeline", "datasets/a.bin", payload);
    CHECK(store.get("pipeline", "datasets/a.bin") == payload);
    CHECK(store.exists("pipeline", "datasets/a.bin"));
    CHECK_FALSE(store.exists("pipeline", "datasets/b.bin"));

    // overwrite is atomic and visible
    store.put("pipeline", "datasets/a.bin", {9});
    CHECK(store.get("pipeline", "datasets/a.bin") == std::vector<std::uint8_t>{9});
}

TEST_CASE("get on a missing key is not-found") {
    ObjectStore store(fresh_dir("recon-store-missing"));
    CHECK_THROWS_AS(store.get("pipeline", "nope"), NotFoundError);
    CHECK_THROWS_AS(store.digest("pipeline", "nope"), NotFoundError);
}

TEST_CASE("list honors prefixes and sorts lexicographically") {
    ObjectStore store(fresh_dir("recon-store-list"));
    store.put_text("pipeline", "a/2", "x");
    store.put_text("pipeline", "a/10", "x");
    store.put_text("pipeline", "b/x", "x");
    store.put_text("pipeline", "a/1", "x");

    const std::vector<std::string> a = store.list("pipeline", "a/");
    REQUIRE(a.size() == 3);
    CHECK(a[0] == "a/1");
    CHECK(a[1] == "a/10");
    CHECK(a[2] == "a/2");

    const std::vector<std::string> all = store.list("pipeline");
    CHECK(all.size() == 4);
    CHECK(store.list("pipeline", "c/").empty());
    CHECK(store.list("otherbucket").empty());
}

TEST_CASE("digest matches content, not key") {
    ObjectStore store(fresh_dir("recon-store-digest"));
    store.put_text("pipeline", "x", "same-bytes");
    store.put_text("pipeline", "y", "same-bytes");
    store.put_text("pipeline", "z", "other-bytes");
    CHECK(store.digest("pipeline", "x") == store.digest("pipeline", "y"));
    CHECK(store.digest("pipeline", "x") != store.digest("pipeline", "z"));
}

TEST_CASE("keys are validated") {
    ObjectStore store(fresh_dir("recon-store-keys"));
    CHECK_THROWS_AS(store.put_text("pipeline", "../escape", "x"), InvalidInput);
    CHECK_THROWS_AS(store.put_text("", "k", "x"), InvalidInput);
    CHECK_THROWS_AS(store.put_text("bu/cket", "k", "x"), InvalidInput);
}

TEST_CASE("64 concurrent writers to distinct keys all land") {
    ObjectStore store(fresh_dir("recon-store-concurrent"));
    std::vector<std::thread> writers;
    for (int i = 0; i < 64; ++i) {
        writers.emplace_back([&store, i] {
            const std::string key = "burst/key-" + std::to_string(i);
            store.put_text("pipeline", key, "payload-" + std::to_string(i));
        });
    }
    for (std::thread& t : writers) t.join();

    CHECK(store.list("pipeline", "burst/").size() == 64);
    for (int i = 0; i < 64; ++i)
        CHECK(store.get_text("pipeline", "burst/key-" + std::to_string(i)) ==
              "payload-" + std::to_string(i));
}

TEST_CASE("latency formula: simplified and full forms") {
    LatencyReport zero;
    CHECK(latency_total(zero) == 0.0);
    CHECK(latency_total(zero, true) == 0.0);

    LatencyReport paper;
    paper.scan = 120;
    paper.preprocessing = 30;
    paper.reconstruction = 9000;
    CHECK(latency_total(paper, true) == 9150.0);

    LatencyReport full = paper;
    full.upload = 5;
    full.signal = 1;
    full.download = 3;
    // scan + 2*upload + 2*signal + pre + rec + download
    CHECK(latency_total(full) == 120 + 10 + 2 + 30 + 9000 + 3);
    CHECK(latency_total(full, true) == 9150.0);

    LatencyReport bad = paper;
    bad.upload = -1;
    CHECK_THROWS_AS(latency_total(bad), ValidationError);
    bad.upload = std::nan("");
    CHECK_THROWS_AS(latency_total(bad), ValidationError);
}

} // TEST_SUITE
