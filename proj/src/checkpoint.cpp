#include "arg/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <vector>

namespace arg {

namespace {

constexpr char kMagic[8] = {'A', 'R', 'G', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

std::uint32_t crc32(const std::string& bytes) {
  static std::uint32_t table[256];
  static bool init = [] {
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      table[i] = c;
    }
    return true;
  }();
  (void)init;
  std::uint32_t c = 0xFFFFFFFFu;
  for (unsigned char ch : bytes) c = table[(c ^ ch) & 0xFF] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_string(std::string& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

void put_matrix(std::string& out, const std::string& name, const Matrix& m) {
  put_string(out, name);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  const char* raw = reinterpret_cast<const char*>(m.data().data());
  out.append(raw, m.size() * sizeof(double));
}

struct Reader {
  const std::string& bytes;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > bytes.size()) throw CheckpointError("checkpoint truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s = bytes.substr(pos, n);
    pos += n;
    return s;
  }
  Matrix matrix() {
    const std::uint32_t rows = u32();
    const std::uint32_t cols = u32();
    const std::size_t n = static_cast<std::size_t>(rows) * cols * sizeof(double);
    need(n);
    std::vector<double> data(static_cast<std::size_t>(rows) * cols);
    std::memcpy(data.data(), bytes.data() + pos, n);
    pos += n;
    return Matrix(rows, cols, std::move(data));
  }
};

}  // namespace

void save_checkpoint(const ModelParams& m, const TrainConfig& cfg,
                     const std::string& path) {
  std::string body;
  body.append(kMagic, sizeof(kMagic));
  put_u32(body, kVersion);
  put_string(body, serialize_config(cfg));

  std::vector<std::pair<std::string, const Matrix*>> tensors;
  tensors.emplace_back("w_emb", &m.w_emb);
  tensors.emplace_back("b_emb", &m.b_emb);
  for (std::size_t g = 0; g < m.graphs.size(); ++g) {
    const std::string p = "g" + std::to_string(g) + ".";
    tensors.emplace_back(p + "w_theta", &m.graphs[g].w_theta);
    tensors.emplace_back(p + "b_theta", &m.graphs[g].b_theta);
    tensors.emplace_back(p + "w_phi", &m.graphs[g].w_phi);
    tensors.emplace_back(p + "b_phi", &m.graphs[g].b_phi);
    for (std::size_t l = 0; l < m.graphs[g].w_gcn.size(); ++l)
      tensors.emplace_back(p + "w_gcn" + std::to_string(l), &m.graphs[g].w_gcn[l]);
  }
  tensors.emplace_back("w_action", &m.w_action);
  tensors.emplace_back("b_action", &m.b_action);
  tensors.emplace_back("w_activity", &m.w_activity);
  tensors.emplace_back("b_activity", &m.b_activity);

  put_u32(body, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, mat] : tensors) put_matrix(body, name, *mat);
  put_u32(body, crc32(body));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open '" + path + "' for writing");
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw CheckpointError("write failed for '" + path + "'");
}

std::pair<ModelParams, TrainConfig> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());

  if (bytes.size() < sizeof(kMagic) + 8) throw CheckpointError("checkpoint truncated");
  const std::string tail = bytes.substr(bytes.size() - 4);
  std::string body = bytes.substr(0, bytes.size() - 4);
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i)
    stored |= static_cast<std::uint32_t>(static_cast<unsigned char>(tail[i])) << (8 * i);
  if (crc32(body) != stored)
    throw CheckpointError("checksum mismatch in '" + path + "'");

  Reader r{body};
  r.need(sizeof(kMagic));
  if (std::memcmp(body.data(), kMagic, sizeof(kMagic)) != 0)
    throw CheckpointError("'" + path + "' is not a checkpoint file");
  r.pos = sizeof(kMagic);
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw CheckpointError("checkpoint version " + std::to_string(version) +
                          " not supported (expected " + std::to_string(kVersion) + ")");
  TrainConfig cfg = parse_config_text(r.str());

  const std::uint32_t count = r.u32();
  std::map<std::string, Matrix> tensors;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str();
    tensors[name] = r.matrix();
  }
  auto get = [&tensors, &path](const std::string& name) {
    auto it = tensors.find(name);
    if (it == tensors.end())
      throw CheckpointError("checkpoint '" + path + "' missing tensor '" + name + "'");
    return it->second;
  };

  ModelParams m;
  m.w_emb = get("w_emb");
  m.b_emb = get("b_emb");
  m.graphs.resize(cfg.num_graphs());
  for (std::size_t g = 0; g < m.graphs.size(); ++g) {
    const std::string p = "g" + std::to_string(g) + ".";
    m.graphs[g].w_theta = get(p + "w_theta");
    m.graphs[g].b_theta = get(p + "b_theta");
    m.graphs[g].w_phi = get(p + "w_phi");
    m.graphs[g].b_phi = get(p + "b_phi");
    m.graphs[g].w_gcn.resize(cfg.gcn_layers);
    for (int l = 0; l < cfg.gcn_layers; ++l)
      m.graphs[g].w_gcn[l] = get(p + "w_gcn" + std::to_string(l));
  }
  m.w_action = get("w_action");
  m.b_action = get("b_action");
  m.w_activity = get("w_activity");
  m.b_activity = get("b_activity");
  return {std::move(m), std::move(cfg)};
}

}  // namespace arg
