// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eggcodec/nn/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

namespace eggcodec::nn {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[4] = {'E', 'G', 'G', 'C'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_list(std::ostream& out, const std::vector<int>& v) {
  put<std::int64_t>(out, static_cast<std::int64_t>(v.size()));
  for (int x : v) put<std::int64_t>(out, x);
}

void put_tensor(std::ostream& out, const std::string& name, const Tensor& t) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
  for (int d : t.shape()) put<std::int64_t>(out, d);
  out.write(reinterpret_cast<const char*>(t.data().data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
}

class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  template <typename T>
  T get(const char* what) {
    T v{};
    if (!in_.read(reinterpret_cast<char*>(&v), sizeof(T))) fail(std::string("truncated ") + what);
    return v;
  }

  int get_int(const char* what) {
    const auto v = get<std::int64_t>(what);
    if (v < 0 || v > (1 << 30)) fail(std::string("implausible ") + what);
    return static_cast<int>(v);
  }

  std::vector<int> get_list(const char* what) {
    const int n = get_int(what);
    if (n > 4096) fail(std::string("implausible length of ") + what);
    std::vector<int> v(static_cast<std::size_t>(n));
    for (int& x : v) x = get_int(what);
    return v;
  }

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

  std::pair<std::string, Tensor> get_tensor() {
    const auto len = get<std::uint32_t>("tensor name length");
    if (len > 4096) fail("implausible tensor name length");
    std::string name(len, '\0');
    if (!in_.read(name.data(), len)) fail("truncated tensor name");
    const auto rank = get<std::uint32_t>("tensor rank");
    if (rank > 8) fail("implausible rank for " + name);
    std::vector<int> shape;
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      shape.push_back(get_int("tensor dim"));
      count *= static_cast<std::size_t>(shape.back());
    }
    if (count > (std::size_t{1} << 28)) fail("implausible size for " + name);
    std::vector<double> values(count);
    if (!in_.read(reinterpret_cast<char*>(values.data()),
                  static_cast<std::streamsize>(count * sizeof(double)))) {
      fail("truncated values of " + name);
    }
    return {name, Tensor(std::move(shape), std::move(values))};
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(source_ + ": " + what);
  }

 private:
  std::istream& in_;
  std::string source_;
};

std::string codebook_name(std::size_t stage) {
  return "rvq." + std::to_string(stage) + ".codebook";
}

}  // namespace

void write_checkpoint(const Model& model, std::ostream& out) {
  const ModelConfig& c = model.config();
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::int64_t>(out, c.base_channels);
  put<std::int64_t>(out, c.n_down_blocks);
  put_list(out, c.strides);
  put<std::int64_t>(out, c.residual_units_per_block);
  put<std::int64_t>(out, c.latent_dim);
  put_list(out, c.timing_dilations);
  put<std::int64_t>(out, c.rvq_stages);
  put<std::int64_t>(out, c.codebook_size);
  put<double>(out, c.commitment_weight);
  for (const NamedParameter& p : model.parameters()) put_tensor(out, p.name, p.var->value);
  const auto& books = model.quantizer().codebooks();
  for (std::size_t s = 0; s < books.size(); ++s) {
    put_tensor(out, codebook_name(s), books[s].vectors);
  }
  put_tensor(out, "rvq.initialized",
             Tensor({1}, model.quantizer().initialized() ? 1.0 : 0.0));
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint " + tmp.string());
    write_checkpoint(model, out);
    if (!out.flush()) throw DataError("failed writing checkpoint " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot move checkpoint into place at " + path.string());
}

Model read_checkpoint(std::istream& in, const std::string& source) {
  Reader r(in, source);
  char magic[4] = {};
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    r.fail("not an eggcodec checkpoint");
  }
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw CheckpointVersionError(source + ": checkpoint format version " +
                                 std::to_string(version) + ", this build reads " +
                                 std::to_string(kCheckpointVersion));
  }
  ModelConfig c;
  c.base_channels = r.get_int("base_channels");
  c.n_down_blocks = r.get_int("n_down_blocks");
  c.strides = r.get_list("strides");
  c.residual_units_per_block = r.get_int("residual_units_per_block");
  c.latent_dim = r.get_int("latent_dim");
  c.timing_dilations = r.get_list("timing_dilations");
  c.rvq_stages = r.get_int("rvq_stages");
  c.codebook_size = r.get_int("codebook_size");
  c.commitment_weight = r.get<double>("commitment_weight");
  try {
    validate(c);
  } catch (const std::invalid_argument& e) {
    r.fail(std::string("invalid model config: ") + e.what());
  }

  std::map<std::string, Tensor> tensors;
  while (!r.at_end()) {
    auto [name, t] = r.get_tensor();
    if (!tensors.emplace(name, std::move(t)).second) r.fail("duplicate tensor " + name);
  }

  Model model(c, 0);
  auto take = [&](const std::string& name, const std::vector<int>& shape) {
    auto it = tensors.find(name);
    if (it == tensors.end()) r.fail("missing tensor " + name);
    if (it->second.shape() != shape) r.fail("shape mismatch for " + name);
    Tensor t = std::move(it->second);
    tensors.erase(it);
    return t;
  };
  for (const NamedParameter& p : model.parameters()) {
    p.var->value = take(p.name, p.var->value.shape());
    if (!p.var->value.all_finite()) r.fail("non-finite values in " + p.name);
  }
  auto& books = model.quantizer().codebooks();
  for (std::size_t s = 0; s < books.size(); ++s) {
    books[s].vectors = take(codebook_name(s), books[s].vectors.shape());
    books[s].reset_ema();
  }
  model.quantizer().set_initialized(take("rvq.initialized", {1})[0] != 0.0);
  if (!tensors.empty()) r.fail("unexpected tensor " + tensors.begin()->first);
  return model;
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return read_checkpoint(in, path.string());
}

}  // namespace eggcodec::nn
