#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "acase/embeddings.hpp"
#include "acase/nn/model.hpp"

namespace acase::nn {

// Checkpoint layout (little-endian), framed like the embedding file:
//   "ACPT" | u16 version = 1 | u32 header_len | header JSON |
//   u64 count | count x ( u16 name_len | name | u32 rows | u32 cols | rows*cols x f64 )
// Tensors are the parameters followed by Adam moments named "adam.m/<name>"
// and "adam.v/<name>". Values are row-major.
namespace ckpt {
inline constexpr char kMagic[4] = {'A', 'C', 'P', 'T'};
inline constexpr std::uint16_t kVersion = 1;
}  // namespace ckpt

inline nlohmann::ordered_json config_to_json(const ModelConfig& c) {
  return {{"arch", to_string(c.arch)},  {"num_layers", c.num_layers}, {"hidden", c.hidden},
          {"heads", c.heads},           {"head", to_string(c.head)},  {"num_classes", c.num_classes}};
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.arch = parse_arch(j.at("arch").get<std::string>());
  c.num_layers = j.at("num_layers").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.heads = j.at("heads").get<int>();
  const auto head = j.at("head").get<std::string>();
  if (head != "link" && head != "graph") throw FormatError("unknown head kind '" + head + "'");
  c.head = head == "link" ? HeadKind::LinkBilinear : HeadKind::GraphSoftmax;
  c.num_classes = j.at("num_classes").get<int>();
  return c;
}

inline std::string serialize_checkpoint(const ModelState& m) {
  nlohmann::ordered_json header{{"config", config_to_json(m.config)},
                                {"input_dim", m.input_dim},
                                {"seed", m.seed},
                                {"step", m.adam.step}};
  const std::string hs = header.dump();
  acev::Writer w;
  w.bytes(std::string_view(ckpt::kMagic, 4));
  w.uint(ckpt::kVersion);
  w.uint(static_cast<std::uint32_t>(hs.size()));
  w.bytes(hs);
  w.uint(static_cast<std::uint64_t>(3 * m.params.size()));
  const auto put = [&](const std::string& name, const Matrix& t) {
    w.uint(static_cast<std::uint16_t>(name.size()));
    w.bytes(name);
    w.uint(static_cast<std::uint32_t>(t.rows()));
    w.uint(static_cast<std::uint32_t>(t.cols()));
    for (Index i = 0; i < t.size(); ++i) w.f64(t.data()[i]);
  };
  for (const auto& p : m.params) put(p.name, p.value);
  for (std::size_t k = 0; k < m.params.size(); ++k) put("adam.m/" + m.params[k].name, m.adam.m[k]);
  for (std::size_t k = 0; k < m.params.size(); ++k) put("adam.v/" + m.params[k].name, m.adam.v[k]);
  return w.str();
}

inline ModelState parse_checkpoint(std::string bytes) {
  acev::Reader r(std::move(bytes));
  if (r.bytes(4, "magic") != std::string_view(ckpt::kMagic, 4)) throw FormatError("bad magic (expected ACPT)");
  const auto version = r.uint<std::uint16_t>("version");
  if (version != ckpt::kVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));
  const auto header_len = r.uint<std::uint32_t>("header length");
  nlohmann::json header;
  ModelState m;
  try {
    header = nlohmann::json::parse(r.bytes(header_len, "header"));
    m = init_model(config_from_json(header.at("config")), header.at("input_dim").get<std::size_t>(),
                   header.at("seed").get<std::uint64_t>());
    m.adam.step = header.at("step").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  } catch (const InvalidSpec& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  }
  const auto count = r.uint<std::uint64_t>("tensor count");
  if (count != 3 * m.params.size())
    throw FormatError("checkpoint holds " + std::to_string(count) + " tensors, config implies " +
                      std::to_string(3 * m.params.size()));
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto name_len = r.uint<std::uint16_t>("tensor name length");
    const std::string name = r.bytes(name_len, "tensor name");
    const std::size_t k = i % m.params.size();
    const std::size_t group = i / m.params.size();
    const std::string expected = (group == 0 ? "" : group == 1 ? "adam.m/" : "adam.v/") + m.params[k].name;
    if (name != expected) throw FormatError("expected tensor '" + expected + "', found '" + name + "'");
    Matrix& dst = group == 0 ? m.params[k].value : group == 1 ? m.adam.m[k] : m.adam.v[k];
    const auto rows = r.uint<std::uint32_t>("rows");
    const auto cols = r.uint<std::uint32_t>("cols");
    if (rows != dst.rows() || cols != dst.cols()) throw FormatError("tensor '" + name + "' has the wrong shape");
    for (Index j = 0; j < dst.size(); ++j) {
      const std::size_t at = r.offset();
      dst.data()[j] = r.f64("tensor data");
      if (!std::isfinite(dst.data()[j]))
        throw NonFiniteValue("non-finite value in '" + name + "' at byte offset " + std::to_string(at));
    }
  }
  if (!r.at_end()) throw FormatError("trailing bytes at byte offset " + std::to_string(r.offset()));
  return m;
}

inline void save_checkpoint(const ModelState& m, const std::filesystem::path& path) {
  acev::write_file(path, serialize_checkpoint(m));
}

inline ModelState load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(acev::read_file(path));
}

}  // namespace acase::nn
