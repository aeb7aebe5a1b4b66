#include "xdeval/io_checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <utility>
#include <vector>

#include "xdeval/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

namespace xdeval {

namespace {

constexpr char kMagic[4] = {'M', 'M', 'D', 'L'};

void write_named_tensors(
    const std::vector<std::pair<std::string, const Tensor*>>& tensors,
    const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&kCheckpointVersion), 4);
  for (const auto& [name, tensor] : tensors) {
    const auto name_len = static_cast<std::uint32_t>(name.size());
    out.write(reinterpret_cast<const char*>(&name_len), 4);
    out.write(name.data(), name_len);
    const auto rank = static_cast<std::uint64_t>(tensor->shape.size());
    out.write(reinterpret_cast<const char*>(&rank), 8);
    for (const std::size_t dim : tensor->shape) {
      const auto d = static_cast<std::uint64_t>(dim);
      out.write(reinterpret_cast<const char*>(&d), 8);
    }
    out.write(reinterpret_cast<const char*>(tensor->data.data()),
              static_cast<std::streamsize>(tensor->data.size() * 8));
  }
  if (!out) throw FormatError("failed writing " + path);
}

std::map<std::string, Tensor> read_named_tensors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);

  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError(path + ": not a checkpoint file (bad magic)");
  }
  std::uint32_t version = 0;
  if (!in.read(reinterpret_cast<char*>(&version), 4) ||
      version != kCheckpointVersion) {
    throw FormatError(path + ": unsupported checkpoint version");
  }

  std::map<std::string, Tensor> tensors;
  while (true) {
    std::uint32_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), 4);
    if (in.eof() && in.gcount() == 0) break;
    if (!in || name_len == 0 || name_len > 4096) {
      throw FormatError(path + ": malformed tensor record header");
    }
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) {
      throw FormatError(path + ": truncated tensor name");
    }
    std::uint64_t rank = 0;
    if (!in.read(reinterpret_cast<char*>(&rank), 8) || rank > 8) {
      throw FormatError(path + ": malformed tensor rank");
    }
    std::vector<std::size_t> shape(rank);
    std::size_t count = 1;
    for (std::uint64_t i = 0; i < rank; ++i) {
      std::uint64_t dim = 0;
      if (!in.read(reinterpret_cast<char*>(&dim), 8) || dim == 0 ||
          dim > (1ull << 32)) {
        throw FormatError(path + ": malformed tensor dimension");
      }
      shape[i] = static_cast<std::size_t>(dim);
      count *= shape[i];
    }
    std::vector<double> data(count);
    if (!in.read(reinterpret_cast<char*>(data.data()),
                 static_cast<std::streamsize>(count * 8))) {
      throw FormatError(path + ": truncated tensor payload for " + name);
    }
    Tensor tensor(std::move(shape), std::move(data));
    if (!tensor.all_finite()) {
      throw IntegrityError(path + ": non-finite values in tensor " + name);
    }
    if (!tensors.emplace(std::move(name), std::move(tensor)).second) {
      throw FormatError(path + ": duplicate tensor record");
    }
  }
  return tensors;
}

Tensor take_tensor(std::map<std::string, Tensor>& tensors,
                   const std::string& name,
                   const std::vector<std::size_t>& shape,
                   const std::string& path) {
  const auto it = tensors.find(name);
  if (it == tensors.end()) {
    throw IntegrityError(path + ": missing tensor " + name);
  }
  if (it->second.shape != shape) {
    throw IntegrityError(path + ": unexpected shape for tensor " + name);
  }
  Tensor out = std::move(it->second);
  tensors.erase(it);
  return out;
}

void check_drained(const std::map<std::string, Tensor>& tensors,
                   const std::string& path) {
  if (!tensors.empty()) {
    throw IntegrityError(path + ": unexpected extra tensor " +
                         tensors.begin()->first);
  }
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::string& path) {
  std::vector<std::pair<std::string, const Tensor*>> tensors;
  params.for_each([&](const char* name, const Tensor& t) {
    tensors.emplace_back(name, &t);
  });
  write_named_tensors(tensors, path);
}

ModelParams load_checkpoint(const std::string& path) {
  std::map<std::string, Tensor> tensors = read_named_tensors(path);
  ModelParams params = ModelParams::zeros();
  params.for_each([&](const char* name, Tensor& t) {
    t = take_tensor(tensors, name, t.shape, path);
  });
  check_drained(tensors, path);
  return params;
}

void save_backbone(const BackboneWeights& backbone, const std::string& path) {
  std::vector<std::pair<std::string, const Tensor*>> tensors;
  backbone.for_each([&](const char* name, const Tensor& t) {
    tensors.emplace_back(name, &t);
  });
  write_named_tensors(tensors, path);
}

BackboneWeights load_backbone(const std::string& path) {
  std::map<std::string, Tensor> tensors = read_named_tensors(path);
  BackboneWeights backbone;
  ModelParams reference = ModelParams::zeros();
  backbone.conv1_w = take_tensor(tensors, "conv1.weight",
                                 reference.conv1_w.shape, path);
  backbone.conv1_b =
      take_tensor(tensors, "conv1.bias", reference.conv1_b.shape, path);
  backbone.conv2_w = take_tensor(tensors, "conv2.weight",
                                 reference.conv2_w.shape, path);
  backbone.conv2_b =
      take_tensor(tensors, "conv2.bias", reference.conv2_b.shape, path);
  backbone.conv3_w = take_tensor(tensors, "conv3.weight",
                                 reference.conv3_w.shape, path);
  backbone.conv3_b =
      take_tensor(tensors, "conv3.bias", reference.conv3_b.shape, path);
  check_drained(tensors, path);
  return backbone;
}

}  // namespace xdeval
