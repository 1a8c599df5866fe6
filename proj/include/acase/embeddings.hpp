#pragma once

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "acase/corpus.hpp"
#include "acase/errors.hpp"
#include "acase/random.hpp"

namespace acase {

// Node embeddings keyed by "graph_id/node_id".
struct EmbeddingTable {
  std::size_t dim = 0;
  std::map<std::string, std::vector<double>> entries;
};

inline std::string embedding_key(const std::string& graph_id, const std::string& node_id) {
  return graph_id + "/" + node_id;
}

// Binary layout (little-endian):
//   "ACEV" | u16 version = 1 | u32 dim | u64 count |
//   count x ( u16 key_len | key bytes | dim x f32 )
namespace acev {

inline constexpr char kMagic[4] = {'A', 'C', 'E', 'V'};
inline constexpr std::uint16_t kVersion = 1;

class Reader {
 public:
  explicit Reader(std::string bytes) : buf_(std::move(bytes)) {}

  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ == buf_.size(); }

  void expect(std::size_t n, const char* what) const {
    if (buf_.size() - pos_ < n)
      throw FormatError(std::string("truncated ") + what + " at byte offset " + std::to_string(pos_));
  }

  template <typename T>
  T uint(const char* what) {
    expect(sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      v |= static_cast<T>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }

  float f32(const char* what) { return std::bit_cast<float>(uint<std::uint32_t>(what)); }
  double f64(const char* what) { return std::bit_cast<double>(uint<std::uint64_t>(what)); }

  std::string bytes(std::size_t n, const char* what) {
    expect(n, what);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::string buf_;
  std::size_t pos_ = 0;
};

class Writer {
 public:
  template <typename T>
  void uint(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f32(float f) { uint(std::bit_cast<std::uint32_t>(f)); }
  void f64(double d) { uint(std::bit_cast<std::uint64_t>(d)); }
  void bytes(std::string_view s) { buf_.append(s); }
  const std::string& str() const { return buf_; }

 private:
  std::string buf_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace acev

inline EmbeddingTable parse_embeddings(std::string bytes) {
  acev::Reader r(std::move(bytes));
  if (r.bytes(4, "magic") != std::string_view(acev::kMagic, 4)) throw FormatError("bad magic (expected ACEV)");
  const auto version = r.uint<std::uint16_t>("version");
  if (version != acev::kVersion) throw FormatError("unsupported embedding file version " + std::to_string(version));
  EmbeddingTable t;
  t.dim = r.uint<std::uint32_t>("dim");
  const auto count = r.uint<std::uint64_t>("count");
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto key_len = r.uint<std::uint16_t>("key length");
    std::string key = r.bytes(key_len, "key");
    std::vector<double> v(t.dim);
    for (auto& x : v) {
      const std::size_t at = r.offset();
      x = r.f32("vector");
      if (!std::isfinite(x))
        throw NonFiniteValue("non-finite value for key '" + key + "' at byte offset " + std::to_string(at));
    }
    t.entries[std::move(key)] = std::move(v);
  }
  if (!r.at_end()) throw FormatError("trailing bytes at byte offset " + std::to_string(r.offset()));
  return t;
}

inline EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  return parse_embeddings(acev::read_file(path));
}

inline std::string serialize_embeddings(const EmbeddingTable& t) {
  acev::Writer w;
  w.bytes(std::string_view(acev::kMagic, 4));
  w.uint(acev::kVersion);
  w.uint(static_cast<std::uint32_t>(t.dim));
  w.uint(static_cast<std::uint64_t>(t.entries.size()));
  for (const auto& [key, v] : t.entries) {
    if (v.size() != t.dim) throw FormatError("vector for '" + key + "' has wrong dimension");
    w.uint(static_cast<std::uint16_t>(key.size()));
    w.bytes(key);
    for (double x : v) w.f32(static_cast<float>(x));
  }
  return w.str();
}

inline void save_embeddings(const EmbeddingTable& t, const std::filesystem::path& path) {
  acev::write_file(path, serialize_embeddings(t));
}

namespace detail {

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

// Signed feature hashing over lowercased whitespace tokens, L2-normalised.
// Empty (or all-whitespace) text gives the zero vector.
inline std::vector<double> featurize_hashed(std::string_view text, std::size_t dim, std::uint64_t seed = 0) {
  if (dim == 0) throw InvalidSpec("hashed feature dimension must be >= 1");
  std::vector<double> v(dim, 0.0);
  std::uint64_t seed_state = seed;
  const std::uint64_t basis = detail::fnv1a("acase", Rng::splitmix64(seed_state));
  std::string token;
  const auto flush = [&] {
    if (token.empty()) return;
    std::uint64_t h = detail::fnv1a(token, basis);
    const std::uint64_t mixed = Rng::splitmix64(h);
    v[mixed % dim] += (mixed >> 63) ? -1.0 : 1.0;
    token.clear();
  };
  for (unsigned char c : text) {
    if (std::isspace(c)) flush();
    else token.push_back(static_cast<char>(std::tolower(c)));
  }
  flush();
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

enum class AttachPolicy { Strict, FallbackHash };

inline Corpus attach_embeddings(Corpus c, const EmbeddingTable& t, AttachPolicy policy, std::uint64_t hash_seed = 0) {
  for (auto& g : c.graphs) {
    for (auto& n : g.nodes) {
      const auto key = embedding_key(g.graph_id, n.id);
      const auto it = t.entries.find(key);
      if (it != t.entries.end()) n.feature = it->second;
      else if (policy == AttachPolicy::Strict) throw MissingEmbedding("no embedding for '" + key + "'");
      else n.feature = featurize_hashed(n.text, t.dim, hash_seed);
    }
  }
  c.embedding_dim = t.dim;
  return c;
}

// Hashed features for every node; the standalone path when no exported
// embeddings exist.
inline Corpus attach_hashed(Corpus c, std::size_t dim, std::uint64_t hash_seed = 0) {
  for (auto& g : c.graphs)
    for (auto& n : g.nodes) n.feature = featurize_hashed(n.text, dim, hash_seed);
  c.embedding_dim = dim;
  return c;
}

}  // namespace acase
