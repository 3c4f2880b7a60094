#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "dyntok/error.hpp"
#include "dyntok/synth.hpp"
#include "dyntok/tensor_io.hpp"

using namespace dyntok;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path dir = fs::current_path() / "scratch_io";
    fs::create_directories(dir);
    return dir / name;
}

std::vector<std::uint8_t> slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

// Forges an npy file from an arbitrary header dict, padded the canonical way.
std::vector<std::uint8_t> forge_npy(const std::string& dict,
                                    const std::vector<std::uint8_t>& payload) {
    std::string header = dict;
    std::size_t unpadded = 10 + header.size() + 1;
    std::size_t padded = (unpadded + 63) / 64 * 64;
    header.append(padded - unpadded, ' ');
    header.push_back('\n');
    std::vector<std::uint8_t> bytes{0x93, 'N', 'U', 'M', 'P', 'Y', 0x01, 0x00};
    bytes.push_back(static_cast<std::uint8_t>(header.size() & 0xff));
    bytes.push_back(static_cast<std::uint8_t>(header.size() >> 8));
    bytes.insert(bytes.end(), header.begin(), header.end());
    bytes.insert(bytes.end(), payload.begin(), payload.end());
    return bytes;
}

}  // namespace

TEST_SUITE("tensor_io") {

TEST_CASE("written file matches the reference container byte-for-byte") {
    io::TensorFile t;
    t.shape = {2, 3};
    t.data = {0.0f, 1.0f, 2.0f, 3.0f, 4.0f, 5.0f};
    fs::path path = scratch("golden.npy");
    io::write_tensor(t, path);

    // Frozen bytes produced by the reference numpy writer for this tensor.
    std::vector<std::uint8_t> expected{0x93, 'N', 'U', 'M', 'P', 'Y', 0x01, 0x00, 0x76, 0x00};
    std::string dict = "{'descr': '<f4', 'fortran_order': False, 'shape': (2, 3), }";
    std::string tail = dict + std::string(57, ' ') + "\n";
    expected.insert(expected.end(), tail.begin(), tail.end());
    const std::uint8_t payload[] = {0, 0, 0,  0,  0, 0, 128, 63, 0, 0, 0,   64,
                                    0, 0, 64, 64, 0, 0, 128, 64, 0, 0, 160, 64};
    expected.insert(expected.end(), payload, payload + sizeof(payload));

    CHECK(slurp(path) == expected);
}

TEST_CASE("read returns shape and values exactly as stored") {
    io::TensorFile t;
    t.shape = {2, 3};
    t.data = {0.0f, 1.0f, 2.0f, 3.0f, 4.0f, 5.0f};
    fs::path path = scratch("identity.npy");
    io::write_tensor(t, path);
    io::TensorFile back = io::read_tensor(path);
    CHECK(back.shape == t.shape);
    CHECK(back.data == t.data);
}

TEST_CASE("empty tensors round-trip") {
    io::TensorFile t;
    t.shape = {0, 4};
    fs::path path = scratch("empty.npy");
    io::write_tensor(t, path);
    io::TensorFile back = io::read_tensor(path);
    CHECK(back.shape == std::vector<std::size_t>{0, 4});
    CHECK(back.data.empty());
}

TEST_CASE("rank-0 and rank-1 shapes round-trip") {
    io::TensorFile scalar;
    scalar.shape = {};
    scalar.data = {3.5f};
    fs::path p0 = scratch("scalar.npy");
    io::write_tensor(scalar, p0);
    io::TensorFile back0 = io::read_tensor(p0);
    CHECK(back0.shape.empty());
    CHECK(back0.data == std::vector<float>{3.5f});

    io::TensorFile vec;
    vec.shape = {7};
    vec.data = {0, 1, 2, 3, 4, 5, 6};
    fs::path p1 = scratch("vec.npy");
    io::write_tensor(vec, p1);
    io::TensorFile back1 = io::read_tensor(p1);
    CHECK(back1.shape == std::vector<std::size_t>{7});
    CHECK(back1.data == vec.data);
}

TEST_CASE("single-element tensor round-trips") {
    io::TensorFile t;
    t.shape = {1, 1};
    t.data = {0.0f};
    fs::path path = scratch("one.npy");
    io::write_tensor(t, path);
    io::TensorFile back = io::read_tensor(path);
    CHECK(back.shape == t.shape);
    CHECK(back.data == t.data);
}

TEST_CASE("large token dump survives bit-exactly") {
    synth::Rng rng(101);
    io::TensorFile t;
    t.shape = {256, 1024};
    t.data.resize(256 * 1024);
    for (float& v : t.data) {
        v = static_cast<float>(rng.next_gauss());
    }
    fs::path path = scratch("dump.npy");
    io::write_tensor(t, path);
    io::TensorFile back = io::read_tensor(path);
    REQUIRE(back.data.size() == t.data.size());
    CHECK(std::memcmp(back.data.data(), t.data.data(), t.data.size() * sizeof(float)) == 0);
}

TEST_CASE("seeded random round-trip is bit-identical") {
    synth::Rng rng(102);
    io::TensorFile t;
    t.shape = {7, 5};
    t.data.resize(35);
    for (float& v : t.data) {
        v = static_cast<float>(rng.next_gauss());
    }
    fs::path path = scratch("rand75.npy");
    io::write_tensor(t, path);
    io::TensorFile back = io::read_tensor(path);
    CHECK(back.shape == t.shape);
    CHECK(std::memcmp(back.data.data(), t.data.data(), t.data.size() * sizeof(float)) == 0);
}

TEST_CASE("writing the same tensor twice yields identical files") {
    io::TensorFile t;
    t.shape = {3, 2};
    t.data = {1, 2, 3, 4, 5, 6};
    fs::path a = scratch("canon_a.npy");
    fs::path b = scratch("canon_b.npy");
    io::write_tensor(t, a);
    io::write_tensor(t, b);
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("inconsistent shape and data are rejected") {
    io::TensorFile t;
    t.shape = {2, 2};
    t.data = {1, 2, 3};
    CHECK_THROWS_AS(io::write_tensor(t, scratch("bad.npy")), Error);
}

TEST_CASE("bad magic is a format error") {
    fs::path path = scratch("magic.npy");
    spit(path, {'N', 'O', 'P', 'E', 0, 0, 0, 0, 0, 0});
    try {
        io::read_tensor(path);
        FAIL("expected a format error");
    } catch (const Error& e) {
        CHECK(e.kind() == "format");
    }
}

TEST_CASE("unsupported version is a format error") {
    auto bytes = forge_npy("{'descr': '<f4', 'fortran_order': False, 'shape': (1,), }",
                           {0, 0, 0, 0});
    bytes[6] = 0x02;  // version 2.0
    fs::path path = scratch("version.npy");
    spit(path, bytes);
    try {
        io::read_tensor(path);
        FAIL("expected a format error");
    } catch (const Error& e) {
        CHECK(e.kind() == "format");
    }
}

TEST_CASE("non-float32 dtypes are rejected, not converted") {
    fs::path path = scratch("f8.npy");
    spit(path, forge_npy("{'descr': '<f8', 'fortran_order': False, 'shape': (1,), }",
                         {0, 0, 0, 0, 0, 0, 0, 0}));
    try {
        io::read_tensor(path);
        FAIL("expected a dtype error");
    } catch (const Error& e) {
        CHECK(e.kind() == "dtype");
    }
}

TEST_CASE("fortran order is rejected") {
    fs::path path = scratch("fortran.npy");
    spit(path, forge_npy("{'descr': '<f4', 'fortran_order': True, 'shape': (1,), }",
                         {0, 0, 0, 0}));
    try {
        io::read_tensor(path);
        FAIL("expected a format error");
    } catch (const Error& e) {
        CHECK(e.kind() == "format");
    }
}

TEST_CASE("truncated payload is a length error") {
    io::TensorFile t;
    t.shape = {4};
    t.data = {1, 2, 3, 4};
    fs::path path = scratch("trunc.npy");
    io::write_tensor(t, path);
    auto bytes = slurp(path);
    bytes.resize(bytes.size() - 4);
    spit(path, bytes);
    try {
        io::read_tensor(path);
        FAIL("expected a length error");
    } catch (const Error& e) {
        CHECK(e.kind() == "length");
    }
}

TEST_CASE("surplus payload is a length error") {
    io::TensorFile t;
    t.shape = {4};
    t.data = {1, 2, 3, 4};
    fs::path path = scratch("extra.npy");
    io::write_tensor(t, path);
    auto bytes = slurp(path);
    bytes.insert(bytes.end(), {0, 0, 0, 0});
    spit(path, bytes);
    try {
        io::read_tensor(path);
        FAIL("expected a length error");
    } catch (const Error& e) {
        CHECK(e.kind() == "length");
    }
}

TEST_CASE("reader accepts permuted header keys") {
    fs::path path = scratch("permuted.npy");
    spit(path, forge_npy("{'shape': (2,), 'descr': '<f4', 'fortran_order': False}",
                         {0, 0, 0, 0, 0, 0, 128, 63}));
    io::TensorFile t = io::read_tensor(path);
    CHECK(t.shape == std::vector<std::size_t>{2});
    CHECK(t.data == std::vector<float>{0.0f, 1.0f});
}

TEST_CASE("meta sidecar round-trips") {
    io::TokenMeta meta{16, 16, 64, 1024};
    fs::path tensor_path = scratch("meta_host.npy");
    io::write_meta(meta, tensor_path);
    io::TokenMeta back = io::read_meta(tensor_path);
    CHECK(back.grid_h == 16);
    CHECK(back.grid_w == 16);
    CHECK(back.num_frames == 64);
    CHECK(back.feature_dim == 1024);
}

TEST_CASE("missing sidecar reports meta-missing") {
    try {
        io::read_meta(scratch("never_written.npy"));
        FAIL("expected meta-missing");
    } catch (const Error& e) {
        CHECK(e.kind() == "meta-missing");
    }
}

TEST_CASE("malformed sidecar is a format error") {
    fs::path tensor_path = scratch("garbled.npy");
    std::ofstream out(io::meta_path_for(tensor_path));
    out << "{not json";
    out.close();
    try {
        io::read_meta(tensor_path);
        FAIL("expected a format error");
    } catch (const Error& e) {
        CHECK(e.kind() == "format");
    }
}

}  // TEST_SUITE
