#pragma once

// Binary tensor archive: "SGIM", u32 version, then records of
//   u32 name length, name bytes, u32 rank, u32 dims..., float32 data
// until end of file. All integers little-endian.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sgim/autodiff/tensor.h"

namespace sgim::io {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct StoredTensor {
  ad::Shape shape;
  std::vector<float> data;

  bool operator==(const StoredTensor&) const = default;
};

class Checkpoint {
 public:
  void put(const std::string& name, ad::Shape shape, std::vector<float> data);
  void put(const std::string& name, const ad::Tensor& t);
  void put_scalars(const std::string& name, const std::vector<double>& values);

  bool contains(const std::string& name) const { return tensors_.count(name) > 0; }
  // Throw FormatError naming the missing tensor or the unexpected shape.
  const StoredTensor& get(const std::string& name) const;
  ad::Tensor tensor(const std::string& name, const ad::Shape& expected,
                    bool requires_grad = false) const;
  std::vector<double> scalars(const std::string& name, std::size_t count) const;

  const std::map<std::string, StoredTensor>& tensors() const { return tensors_; }

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  bool operator==(const Checkpoint&) const = default;

 private:
  std::map<std::string, StoredTensor> tensors_;
};

}  // namespace sgim::io
