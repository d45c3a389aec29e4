#include "rplan/model/checkpoint.hpp"

#include <cstdint>
#include <fstream>

#include <nlohmann/json.hpp>

#include "rplan/util/errors.hpp"

namespace rplan::model {

namespace {

constexpr char kMagic[9] = "RPLANCK1";

void write_u64(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

std::uint64_t read_u64(std::istream& in) {
  char buf[8];
  in.read(buf, 8);
  if (!in) throw CheckpointError("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

void save_store(const std::string& path, const nlohmann::json& meta, const ParamStore& ps) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open for write: " + path);
  out.write(kMagic, 8);
  const std::string meta_str = meta.dump();
  write_u64(out, meta_str.size());
  out.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));
  write_u64(out, static_cast<std::uint64_t>(ps.count()));
  for (int i = 0; i < ps.count(); ++i) {
    const auto& name = ps.name(i);
    write_u64(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    const Mat& m = ps.value(i);
    write_u64(out, static_cast<std::uint64_t>(m.rows()));
    write_u64(out, static_cast<std::uint64_t>(m.cols()));
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(m.size())));
  }
  if (!out) throw CheckpointError("write failed: " + path);
}

struct Loaded {
  nlohmann::json meta;
  std::vector<std::pair<std::string, Mat>> tensors;
};

Loaded load_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != std::string(kMagic, 8))
    throw CheckpointError("bad magic or incompatible version: " + path);
  const auto meta_len = read_u64(in);
  std::string meta_str(meta_len, '\0');
  in.read(meta_str.data(), static_cast<std::streamsize>(meta_len));
  if (!in) throw CheckpointError("checkpoint truncated");
  Loaded out;
  out.meta = nlohmann::json::parse(meta_str, nullptr, false);
  if (out.meta.is_discarded()) throw CheckpointError("corrupt metadata: " + path);
  const auto n = read_u64(in);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto name_len = read_u64(in);
    std::string name(name_len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_len));
    const auto rows = read_u64(in);
    const auto cols = read_u64(in);
    Mat m(static_cast<int>(rows), static_cast<int>(cols));
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * rows * cols));
    if (!in) throw CheckpointError("checkpoint truncated");
    out.tensors.emplace_back(std::move(name), std::move(m));
  }
  return out;
}

void restore_params(ParamStore& ps, const Loaded& loaded, const std::string& path) {
  if (static_cast<int>(loaded.tensors.size()) != ps.count())
    throw CheckpointError("parameter count mismatch in " + path);
  for (const auto& [name, m] : loaded.tensors) {
    const int idx = ps.index_of(name);
    if (idx < 0) throw CheckpointError("unknown parameter '" + name + "' in " + path);
    if (ps.value(idx).rows() != m.rows() || ps.value(idx).cols() != m.cols())
      throw CheckpointError("shape mismatch for '" + name + "' in " + path);
    ps.value(idx) = m;
  }
}

void check_vocab(const nlohmann::json& meta, const Vocab& vocab, const std::string& path) {
  const auto stored = meta.at("vocab").get<std::vector<std::string>>();
  if (stored != vocab.tokens())
    throw CheckpointError("vocabulary mismatch in " + path);
}

}  // namespace

void save_reasoner(const std::string& path, const Reasoner& r) {
  const auto& c = r.config();
  nlohmann::json meta;
  meta["kind"] = "reasoner";
  meta["config"] = {{"model_dim", c.model_dim},
                    {"enc_layers", c.enc_layers},
                    {"dec_layers", c.dec_layers},
                    {"heads", c.heads},
                    {"ff_dim", c.ff_dim},
                    {"prompt_len", c.prompt_len},
                    {"num_queries", c.num_queries},
                    {"alpha", c.alpha},
                    {"use_psi_c", c.use_psi_c},
                    {"use_psi_g", c.use_psi_g},
                    {"max_rationale_tokens", c.max_rationale_tokens}};
  meta["vocab"] = r.vocab().tokens();
  save_store(path, meta, r.params());
}

std::unique_ptr<Reasoner> load_reasoner(const std::string& path, const Vocab& vocab) {
  const auto loaded = load_store(path);
  if (loaded.meta.at("kind").get<std::string>() != "reasoner")
    throw CheckpointError("expected a reasoner checkpoint: " + path);
  check_vocab(loaded.meta, vocab, path);
  const auto& jc = loaded.meta.at("config");
  ReasonerConfig cfg;
  cfg.model_dim = jc.at("model_dim").get<int>();
  cfg.enc_layers = jc.at("enc_layers").get<int>();
  cfg.dec_layers = jc.at("dec_layers").get<int>();
  cfg.heads = jc.at("heads").get<int>();
  cfg.ff_dim = jc.at("ff_dim").get<int>();
  cfg.prompt_len = jc.at("prompt_len").get<int>();
  cfg.num_queries = jc.at("num_queries").get<int>();
  cfg.alpha = jc.at("alpha").get<double>();
  cfg.use_psi_c = jc.at("use_psi_c").get<bool>();
  cfg.use_psi_g = jc.at("use_psi_g").get<bool>();
  cfg.max_rationale_tokens = jc.at("max_rationale_tokens").get<int>();
  auto r = std::make_unique<Reasoner>(vocab, cfg, 0);
  restore_params(r->params(), loaded, path);
  return r;
}

void save_planner(const std::string& path, const Planner& p, const std::string& kind) {
  const auto& c = p.config();
  nlohmann::json meta;
  meta["kind"] = kind;
  meta["config"] = {{"model_dim", c.model_dim},
                    {"layers", c.layers},
                    {"heads", c.heads},
                    {"ff_dim", c.ff_dim}};
  meta["vocab"] = p.vocab().tokens();
  save_store(path, meta, p.params());
}

std::unique_ptr<Planner> load_planner(const std::string& path, const Vocab& vocab,
                                      const std::string& expected_kind) {
  const auto loaded = load_store(path);
  if (loaded.meta.at("kind").get<std::string>() != expected_kind)
    throw CheckpointError("expected kind '" + expected_kind + "': " + path);
  check_vocab(loaded.meta, vocab, path);
  const auto& jc = loaded.meta.at("config");
  PlannerConfig cfg;
  cfg.model_dim = jc.at("model_dim").get<int>();
  cfg.layers = jc.at("layers").get<int>();
  cfg.heads = jc.at("heads").get<int>();
  cfg.ff_dim = jc.at("ff_dim").get<int>();
  auto p = std::make_unique<Planner>(vocab, cfg, 0);
  restore_params(p->params(), loaded, path);
  return p;
}

}  // namespace rplan::model
