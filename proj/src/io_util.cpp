#include "cornet/io_util.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cornet/error.hpp"

namespace cornet {

namespace {

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

template <typename T>
void store_le(const T& value, std::uint8_t* out) {
  std::memcpy(out, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
      std::swap(out[i], out[sizeof(T) - 1 - i]);
  }
}

template <typename T>
T load_le(const std::uint8_t* in) {
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, in, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
      std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* bytes = static_cast<const std::uint8_t*>(data);
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex_digest(std::uint64_t value) {
  static const char* hex = "0123456789abcdef";
  std::string s(16, '0');
  for (std::size_t i = 16; i-- > 0;) {
    s[i] = hex[value & 0xf];
    value >>= 4;
  }
  return s;
}

std::string digest_string(const std::string& text) {
  return hex_digest(fnv1a64(text.data(), text.size()));
}

std::string digest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("digest: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return digest_string(buf.str());
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < bytes.size(); i += 3) {
    std::uint32_t chunk = static_cast<std::uint32_t>(bytes[i]) << 16;
    const std::size_t rest = bytes.size() - i;
    if (rest > 1) chunk |= static_cast<std::uint32_t>(bytes[i + 1]) << 8;
    if (rest > 2) chunk |= static_cast<std::uint32_t>(bytes[i + 2]);
    out.push_back(kB64Alphabet[(chunk >> 18) & 0x3f]);
    out.push_back(kB64Alphabet[(chunk >> 12) & 0x3f]);
    out.push_back(rest > 1 ? kB64Alphabet[(chunk >> 6) & 0x3f] : '=');
    out.push_back(rest > 2 ? kB64Alphabet[chunk & 0x3f] : '=');
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  if (text.size() % 4 != 0) throw ParseError("base64: length not multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::uint32_t chunk = 0;
    std::size_t pad = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      const char c = text[i + j];
      if (c == '=') {
        ++pad;
        chunk <<= 6;
        continue;
      }
      const int v = value_of(c);
      if (v < 0 || pad > 0) throw ParseError("base64: invalid character");
      chunk = (chunk << 6) | static_cast<std::uint32_t>(v);
    }
    out.push_back(static_cast<std::uint8_t>((chunk >> 16) & 0xff));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>((chunk >> 8) & 0xff));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(chunk & 0xff));
  }
  return out;
}

std::string encode_tensor_data(const Tensor& t) {
  std::vector<std::uint8_t> bytes(t.size() * sizeof(double));
  for (std::size_t i = 0; i < t.size(); ++i)
    store_le(t[i], bytes.data() + i * sizeof(double));
  return base64_encode(bytes);
}

std::vector<double> decode_tensor_data(const std::string& text) {
  const std::vector<std::uint8_t> bytes = base64_decode(text);
  if (bytes.size() % sizeof(double) != 0)
    throw ParseError("tensor data: byte count not a multiple of 8");
  std::vector<double> values(bytes.size() / sizeof(double));
  for (std::size_t i = 0; i < values.size(); ++i)
    values[i] = load_le<double>(bytes.data() + i * sizeof(double));
  return values;
}

void write_features(const std::string& base_path, const Tensor& features) {
  if (features.rank() != 2)
    throw ShapeError("features: need [T, D], got " +
                     shape_str(features.shape()));
  std::ofstream raw(base_path + ".f32", std::ios::binary);
  if (!raw) throw Error("features: cannot write " + base_path + ".f32");
  std::vector<std::uint8_t> buf(features.size() * sizeof(float));
  for (std::size_t i = 0; i < features.size(); ++i)
    store_le(static_cast<float>(features[i]), buf.data() + i * sizeof(float));
  raw.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));

  nlohmann::json sidecar{{"t", features.dim(0)}, {"d", features.dim(1)}};
  write_text_file(base_path + ".json", sidecar.dump() + "\n");
}

Tensor read_features(const std::string& base_path) {
  nlohmann::json sidecar;
  try {
    sidecar = nlohmann::json::parse(read_text_file(base_path + ".json"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("features: " + base_path + ".json: " + e.what());
  }
  const std::size_t t = sidecar.at("t").get<std::size_t>();
  const std::size_t d = sidecar.at("d").get<std::size_t>();

  std::ifstream raw(base_path + ".f32", std::ios::binary);
  if (!raw) throw Error("features: cannot open " + base_path + ".f32");
  std::vector<std::uint8_t> buf(t * d * sizeof(float));
  raw.read(reinterpret_cast<char*>(buf.data()),
           static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(raw.gcount()) != buf.size())
    throw ParseError("features: " + base_path + ".f32 truncated (expected " +
                     std::to_string(buf.size()) + " bytes)");

  Tensor out({t, d});
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<double>(load_le<float>(buf.data() + i * sizeof(float)));
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

}  // namespace cornet
