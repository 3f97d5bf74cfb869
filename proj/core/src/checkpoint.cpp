#include "dcvae/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "dcvae/error.hpp"

namespace dcvae {

namespace {

constexpr std::array<char, 8> kMagic{'D', 'C', 'V', 'A', 'E', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void array(const Tensor& t) {
    u64(t.numel());
    for (double x : t.data()) f64(x);
  }
  void raw(const char* data, std::size_t n) { bytes_.insert(bytes_.end(), data, data + n); }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::vector<char> bytes_;
};

class Reader {
 public:
  explicit Reader(std::vector<char> bytes, std::string source) : bytes_(std::move(bytes)), source_(std::move(source)) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }
  void array_into(Tensor& t, const std::string& what) {
    const std::uint64_t n = u64();
    if (n != t.numel()) {
      fail(what + " holds " + std::to_string(n) + " values, model expects " + std::to_string(t.numel()));
    }
    for (double& x : t.data()) x = f64();
  }
  void raw(char* out, std::size_t n) {
    need(n);
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool at_end() const { return pos_ == bytes_.size(); }
  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(source_ + ": " + msg); }

 private:
  void need(std::size_t n) {
    if (pos_ + n > bytes_.size()) fail("truncated checkpoint");
  }
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::vector<char> bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, Model& model, const TrainingState* state) {
  const ModelConfig& c = model.config();
  Writer w;
  w.raw(kMagic.data(), kMagic.size());
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(c.input_dim));
  w.u32(static_cast<std::uint32_t>(c.dim_v));
  w.u32(static_cast<std::uint32_t>(c.dim_z));
  w.u32(static_cast<std::uint32_t>(c.encoder_hidden.size()));
  for (auto h : c.encoder_hidden) w.u32(static_cast<std::uint32_t>(h));
  w.u32(static_cast<std::uint32_t>(c.decoder_hidden.size()));
  for (auto h : c.decoder_hidden) w.u32(static_cast<std::uint32_t>(h));
  w.f64(c.batchnorm.momentum);
  w.f64(c.batchnorm.eps);

  const auto params = model.parameters();
  const auto buffers = model.buffers();
  w.u32(static_cast<std::uint32_t>(params.size() + buffers.size()));
  for (const Parameter* p : params) w.array(p->value);
  for (const Tensor* b : buffers) w.array(*b);

  w.u32(state ? 1 : 0);
  if (state) {
    if (state->adam.m.size() != params.size() || state->adam.v.size() != params.size()) {
      throw ContractError("optimizer state does not match the model parameters");
    }
    w.u64(state->epochs_completed);
    w.u64(state->adam.t);
    for (std::size_t k = 0; k < params.size(); ++k) {
      w.array(state->adam.m[k]);
      w.array(state->adam.v[k]);
    }
  }

  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(std::move(bytes), path.string());

  std::array<char, 8> magic{};
  r.raw(magic.data(), magic.size());
  if (magic != kMagic) r.fail("not a checkpoint (bad magic)");
  if (const auto version = r.u32(); version != kVersion) r.fail("unsupported version " + std::to_string(version));

  ModelConfig c;
  c.input_dim = r.u32();
  c.dim_v = r.u32();
  c.dim_z = r.u32();
  c.encoder_hidden.resize(r.u32());
  for (auto& h : c.encoder_hidden) h = r.u32();
  c.decoder_hidden.resize(r.u32());
  for (auto& h : c.decoder_hidden) h = r.u32();
  c.batchnorm.momentum = r.f64();
  c.batchnorm.eps = r.f64();

  Checkpoint ck{Model(c, 0), std::nullopt};
  const auto params = ck.model.parameters();
  const auto buffers = ck.model.buffers();
  if (r.u32() != params.size() + buffers.size()) r.fail("array count does not match the recorded architecture");
  for (Parameter* p : params) r.array_into(p->value, p->name);
  for (Tensor* b : buffers) r.array_into(*b, "running statistic");

  if (r.u32() == 1) {
    TrainingState st;
    st.epochs_completed = r.u64();
    st.adam = make_adam_state(params);
    st.adam.t = r.u64();
    for (std::size_t k = 0; k < params.size(); ++k) {
      r.array_into(st.adam.m[k], params[k]->name + " first moment");
      r.array_into(st.adam.v[k], params[k]->name + " second moment");
    }
    ck.training = std::move(st);
  }
  if (!r.at_end()) r.fail("trailing bytes after checkpoint payload");
  return ck;
}

}  // namespace dcvae
