// SPDX-License-Identifier: Apache-2.0
#include "kombo/harness/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "kombo/error.hpp"

namespace kombo::harness {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr std::string_view kMagic = "kombo-ckpt v1\n";

[[noreturn]] void ckpt_error(const std::string& msg) { throw Error(ErrorKind::CheckpointError, msg); }

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const model::KomboModel<float>& m, const CheckpointMeta& meta) {
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& p : m.params().params()) tensors.push_back({{"name", p.name}, {"shape", p.var.shape()}});
  const nlohmann::json header{{"dtype", "float32"},
                              {"model", meta.model.to_json()},
                              {"run_config", meta.run_config},
                              {"seed", meta.seed},
                              {"step", meta.step},
                              {"vocab", meta.vocab},
                              {"tensors", tensors}};
  const std::string text = header.dump();
  const std::uint64_t len = text.size();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
    out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& p : m.params().params()) {
      const auto& v = p.var.value();
      out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(float)));
    }
    if (!out) throw Error(ErrorKind::IoError, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::string magic(kMagic.size(), '\0');
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (!in || magic != kMagic) ckpt_error(path.string() + " is not a kombo-ckpt v1 file");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || len > (std::uint64_t{1} << 32)) ckpt_error("bad header length");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) ckpt_error("truncated header");

  Checkpoint ckpt;
  try {
    const auto header = nlohmann::json::parse(text);
    if (header.at("dtype") != "float32") ckpt_error("unsupported dtype " + header.at("dtype").dump());
    ckpt.meta.model = model::ModelConfig::from_json(header.at("model"));
    ckpt.meta.run_config = header.at("run_config").get<std::string>();
    ckpt.meta.seed = header.at("seed").get<std::uint64_t>();
    ckpt.meta.step = header.at("step").get<std::uint64_t>();
    ckpt.meta.vocab = header.at("vocab").get<std::string>();
    for (const auto& t : header.at("tensors")) {
      ckpt.tensors.emplace_back(t.at("name").get<std::string>(),
                                nn::Tensor<float>(t.at("shape").get<nn::Shape>()));
    }
  } catch (const nlohmann::json::exception& e) {
    ckpt_error(std::string("bad header: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::CheckpointError) throw;
    ckpt_error(std::string("bad header: ") + e.what());
  }
  for (auto& [name, tensor] : ckpt.tensors) {
    in.read(reinterpret_cast<char*>(tensor.data()), static_cast<std::streamsize>(tensor.size() * sizeof(float)));
    if (!in) ckpt_error("truncated data in tensor " + name);
  }
  if (in.peek() != std::char_traits<char>::eof()) ckpt_error("trailing bytes after the last tensor");
  return ckpt;
}

void restore_parameters(const Checkpoint& ckpt, model::KomboModel<float>& m) {
  auto& params = m.params().params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    if (i >= ckpt.tensors.size() || ckpt.tensors[i].first != p.name) {
      const auto it = std::find_if(ckpt.tensors.begin(), ckpt.tensors.end(),
                                   [&](const auto& t) { return t.first == p.name; });
      if (it == ckpt.tensors.end()) ckpt_error("checkpoint lacks tensor " + p.name);
      ckpt_error("tensor " + p.name + " is out of order");
    }
    const auto& src = ckpt.tensors[i].second;
    if (src.shape() != p.var.shape()) {
      ckpt_error("tensor " + p.name + " has shape " + nn::shape_string(src.shape()) + ", model expects " +
                 nn::shape_string(p.var.shape()));
    }
  }
  if (ckpt.tensors.size() > params.size()) ckpt_error("unexpected tensor " + ckpt.tensors[params.size()].first);
  for (std::size_t i = 0; i < params.size(); ++i) params[i].var.mutable_value() = ckpt.tensors[i].second;
}

std::unique_ptr<model::KomboModel<float>> load_model(const Checkpoint& ckpt) {
  std::unique_ptr<model::KomboModel<float>> m;
  try {
    m = std::make_unique<model::KomboModel<float>>(ckpt.meta.model, ckpt.meta.seed);
  } catch (const Error& e) {
    ckpt_error(std::string("header config rejected: ") + e.what());
  }
  restore_parameters(ckpt, *m);
  return m;
}

}  // namespace kombo::harness
