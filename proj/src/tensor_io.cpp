#include "dyntok/tensor_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "dyntok/error.hpp"

namespace dyntok::io {

namespace {

constexpr char kMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};
constexpr std::size_t kHeaderAlign = 64;

std::string format_shape(const std::vector<std::size_t>& shape) {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        out << shape[i];
        if (i + 1 < shape.size() || shape.size() == 1) {
            out << ',';
        }
        if (i + 1 < shape.size()) {
            out << ' ';
        }
    }
    out << ')';
    return out.str();
}

// Header dict in the exact serialization the reference numpy writer emits,
// padded with spaces so the full header block is 64-byte aligned.
std::string build_header(const std::vector<std::size_t>& shape) {
    std::string dict = "{'descr': '<f4', 'fortran_order': False, 'shape': " +
                       format_shape(shape) + ", }";
    std::size_t unpadded = 6 + 2 + 2 + dict.size() + 1;
    std::size_t padded = (unpadded + kHeaderAlign - 1) / kHeaderAlign * kHeaderAlign;
    dict.append(padded - unpadded, ' ');
    dict.push_back('\n');
    return dict;
}

void skip_spaces(const std::string& s, std::size_t& pos) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\n')) {
        ++pos;
    }
}

std::string parse_py_string(const std::string& s, std::size_t& pos) {
    if (pos >= s.size() || (s[pos] != '\'' && s[pos] != '"')) {
        fail("format", "npy header: expected quoted string");
    }
    char quote = s[pos++];
    std::size_t start = pos;
    while (pos < s.size() && s[pos] != quote) {
        ++pos;
    }
    if (pos >= s.size()) {
        fail("format", "npy header: unterminated string");
    }
    return s.substr(start, pos++ - start);
}

struct HeaderFields {
    std::string descr;
    bool fortran_order = false;
    std::vector<std::size_t> shape;
};

// Minimal parser for the python dict literal used by the container. Accepts
// arbitrary key order and whitespace; rejects anything else.
HeaderFields parse_header_dict(const std::string& header) {
    HeaderFields fields;
    bool saw_descr = false, saw_order = false, saw_shape = false;
    std::size_t pos = 0;
    skip_spaces(header, pos);
    if (pos >= header.size() || header[pos] != '{') {
        fail("format", "npy header: expected dict literal");
    }
    ++pos;
    while (true) {
        skip_spaces(header, pos);
        if (pos < header.size() && header[pos] == '}') {
            break;
        }
        std::string key = parse_py_string(header, pos);
        skip_spaces(header, pos);
        if (pos >= header.size() || header[pos] != ':') {
            fail("format", "npy header: expected ':' after key");
        }
        ++pos;
        skip_spaces(header, pos);
        if (key == "descr") {
            fields.descr = parse_py_string(header, pos);
            saw_descr = true;
        } else if (key == "fortran_order") {
            if (header.compare(pos, 5, "False") == 0) {
                fields.fortran_order = false;
                pos += 5;
            } else if (header.compare(pos, 4, "True") == 0) {
                fields.fortran_order = true;
                pos += 4;
            } else {
                fail("format", "npy header: bad fortran_order value");
            }
            saw_order = true;
        } else if (key == "shape") {
            if (pos >= header.size() || header[pos] != '(') {
                fail("format", "npy header: expected shape tuple");
            }
            ++pos;
            while (true) {
                skip_spaces(header, pos);
                if (pos < header.size() && header[pos] == ')') {
                    ++pos;
                    break;
                }
                std::size_t dim = 0;
                bool any_digit = false;
                while (pos < header.size() && header[pos] >= '0' && header[pos] <= '9') {
                    dim = dim * 10 + static_cast<std::size_t>(header[pos] - '0');
                    ++pos;
                    any_digit = true;
                }
                if (!any_digit) {
                    fail("format", "npy header: bad shape entry");
                }
                fields.shape.push_back(dim);
                skip_spaces(header, pos);
                if (pos < header.size() && header[pos] == ',') {
                    ++pos;
                }
            }
            saw_shape = true;
        } else {
            fail("format", "npy header: unknown key '" + key + "'");
        }
        skip_spaces(header, pos);
        if (pos < header.size() && header[pos] == ',') {
            ++pos;
        }
    }
    if (!saw_descr || !saw_order || !saw_shape) {
        fail("format", "npy header: missing required key");
    }
    return fields;
}

}  // namespace

std::size_t TensorFile::element_count() const {
    std::size_t n = 1;
    for (std::size_t dim : shape) {
        n *= dim;
    }
    return n;
}

void TensorFile::validate() const {
    if (element_count() != data.size()) {
        fail("validation", "tensor shape declares " + std::to_string(element_count()) +
                               " elements but " + std::to_string(data.size()) + " provided");
    }
}

std::size_t TokenMeta::tokens_per_frame() const {
    return static_cast<std::size_t>(grid_h) * static_cast<std::size_t>(grid_w);
}

void TokenMeta::validate() const {
    if (grid_h < 1 || grid_w < 1) {
        fail("validation", "token meta: grid dimensions must be positive");
    }
    if (feature_dim < 1) {
        fail("validation", "token meta: feature_dim must be positive");
    }
}

TensorFile read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail("io", "cannot open tensor file: " + path.string());
    }
    char magic[6];
    if (!in.read(magic, 6) || std::memcmp(magic, kMagic, 6) != 0) {
        fail("format", "not an npy file: " + path.string());
    }
    unsigned char version[2];
    if (!in.read(reinterpret_cast<char*>(version), 2)) {
        fail("format", "truncated npy version field");
    }
    if (version[0] != 1 || version[1] != 0) {
        fail("format", "unsupported npy version " + std::to_string(version[0]) + "." +
                           std::to_string(version[1]));
    }
    unsigned char len_bytes[2];
    if (!in.read(reinterpret_cast<char*>(len_bytes), 2)) {
        fail("format", "truncated npy header length");
    }
    std::size_t header_len = static_cast<std::size_t>(len_bytes[0]) |
                             (static_cast<std::size_t>(len_bytes[1]) << 8);
    std::string header(header_len, '\0');
    if (!in.read(header.data(), static_cast<std::streamsize>(header_len))) {
        fail("format", "truncated npy header");
    }

    HeaderFields fields = parse_header_dict(header);
    if (fields.descr != "<f4") {
        fail("dtype", "unsupported dtype '" + fields.descr + "' (only '<f4' accepted)");
    }
    if (fields.fortran_order) {
        fail("format", "fortran-order payloads are not supported");
    }

    TensorFile tensor;
    tensor.shape = fields.shape;
    std::size_t count = tensor.element_count();

    std::vector<char> payload((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
    if (payload.size() != count * sizeof(float)) {
        fail("length", "payload holds " + std::to_string(payload.size() / sizeof(float)) +
                           " elements but header declares " + std::to_string(count));
    }
    tensor.data.resize(count);
    if (count > 0) {
        std::memcpy(tensor.data.data(), payload.data(), payload.size());
    }
    return tensor;
}

void write_tensor(const TensorFile& tensor, const std::filesystem::path& path) {
    tensor.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail("io", "cannot open tensor file for writing: " + path.string());
    }
    std::string header = build_header(tensor.shape);
    unsigned char len_bytes[2] = {static_cast<unsigned char>(header.size() & 0xff),
                                  static_cast<unsigned char>((header.size() >> 8) & 0xff)};
    out.write(kMagic, 6);
    out.put('\x01');
    out.put('\x00');
    out.write(reinterpret_cast<const char*>(len_bytes), 2);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(tensor.data.data()),
              static_cast<std::streamsize>(tensor.data.size() * sizeof(float)));
    if (!out) {
        fail("io", "write failed: " + path.string());
    }
}

std::filesystem::path meta_path_for(const std::filesystem::path& tensor_path) {
    std::filesystem::path p = tensor_path;
    p += ".meta.json";
    return p;
}

TokenMeta read_meta(const std::filesystem::path& tensor_path) {
    std::filesystem::path path = meta_path_for(tensor_path);
    std::ifstream in(path);
    if (!in) {
        fail("meta-missing", "metadata sidecar not found: " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        fail("format", "malformed metadata sidecar: " + std::string(e.what()));
    }
    TokenMeta meta;
    try {
        meta.grid_h = doc.at("grid_h").get<int>();
        meta.grid_w = doc.at("grid_w").get<int>();
        meta.num_frames = doc.at("num_frames").get<std::size_t>();
        meta.feature_dim = doc.at("feature_dim").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        fail("format", "metadata sidecar missing field: " + std::string(e.what()));
    }
    meta.validate();
    return meta;
}

void write_meta(const TokenMeta& meta, const std::filesystem::path& tensor_path) {
    meta.validate();
    nlohmann::json doc{{"grid_h", meta.grid_h},
                       {"grid_w", meta.grid_w},
                       {"num_frames", meta.num_frames},
                       {"feature_dim", meta.feature_dim}};
    std::ofstream out(meta_path_for(tensor_path), std::ios::trunc);
    if (!out) {
        fail("io", "cannot write metadata sidecar for " + tensor_path.string());
    }
    out << doc.dump() << '\n';
}

}  // namespace dyntok::io
