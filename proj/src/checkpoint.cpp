#include "sgim/io/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>

namespace sgim::io {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

bool read_u32(std::ifstream& in, std::uint32_t& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof v));
}

}  // namespace

void Checkpoint::put(const std::string& name, ad::Shape shape, std::vector<float> data) {
  if (name.empty()) throw ContractError("checkpoint tensor names must be non-empty");
  if (ad::shape_size(shape) != data.size()) {
    throw DimensionError("checkpoint tensor '" + name + "' data does not match its shape");
  }
  tensors_[name] = {std::move(shape), std::move(data)};
}

void Checkpoint::put(const std::string& name, const ad::Tensor& t) {
  put(name, t.shape(), {t.data().begin(), t.data().end()});
}

void Checkpoint::put_scalars(const std::string& name, const std::vector<double>& values) {
  put(name, {values.size()}, {values.begin(), values.end()});
}

const StoredTensor& Checkpoint::get(const std::string& name) const {
  const auto it = tensors_.find(name);
  if (it == tensors_.end()) throw FormatError("checkpoint has no tensor '" + name + "'");
  return it->second;
}

ad::Tensor Checkpoint::tensor(const std::string& name, const ad::Shape& expected,
                              bool requires_grad) const {
  const auto& t = get(name);
  if (t.shape != expected) {
    throw FormatError("checkpoint tensor '" + name + "' has shape " + ad::shape_string(t.shape) +
                      ", expected " + ad::shape_string(expected));
  }
  return ad::Tensor::from(t.shape, t.data, requires_grad);
}

std::vector<double> Checkpoint::scalars(const std::string& name, std::size_t count) const {
  const auto& t = get(name);
  if (t.data.size() != count) {
    throw FormatError("checkpoint entry '" + name + "' has " + std::to_string(t.data.size()) +
                      " values, expected " + std::to_string(count));
  }
  return {t.data.begin(), t.data.end()};
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write("SGIM", 4);
  write_u32(out, kCheckpointVersion);
  for (const auto& [name, t] : tensors_) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) write_u32(out, static_cast<std::uint32_t>(d));
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  }
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  char magic[4];
  std::uint32_t version = 0;
  if (!in.read(magic, 4) || std::memcmp(magic, "SGIM", 4) != 0) {
    throw FormatError(path.string() + ": not a checkpoint (bad magic)");
  }
  if (!read_u32(in, version)) throw FormatError(path.string() + ": truncated header");
  if (version != kCheckpointVersion) {
    throw FormatError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  std::uint32_t name_len = 0;
  while (read_u32(in, name_len)) {
    auto truncated = [&] { return FormatError(path.string() + ": truncated tensor record"); };
    if (name_len == 0 || name_len > 4096) throw FormatError(path.string() + ": bad tensor name length");
    std::string name(name_len, '\0');
    std::uint32_t rank = 0;
    if (!in.read(name.data(), name_len) || !read_u32(in, rank)) throw truncated();
    if (rank > 8) throw FormatError(path.string() + ": tensor '" + name + "' has rank " + std::to_string(rank));
    ad::Shape shape(rank);
    std::size_t count = 1;
    for (auto& d : shape) {
      std::uint32_t v = 0;
      if (!read_u32(in, v)) throw truncated();
      d = v;
      count *= v;
    }
    if (count > (std::size_t{1} << 31)) throw FormatError(path.string() + ": tensor too large");
    std::vector<float> data(count);
    if (!in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(count * sizeof(float)))) {
      throw truncated();
    }
    if (ck.tensors_.count(name)) throw FormatError(path.string() + ": duplicate tensor '" + name + "'");
    ck.tensors_[name] = {std::move(shape), std::move(data)};
  }
  if (in.gcount() != 0) throw FormatError(path.string() + ": trailing bytes");
  return ck;
}

}  // namespace sgim::io
