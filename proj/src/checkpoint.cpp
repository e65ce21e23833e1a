#include "subaug/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint layout assumes a little-endian host");

namespace subaug {
namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'S', 'A', 'U', 'G', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_scalar(std::ofstream& file, T value) {
  file.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_scalar(std::ifstream& file, const std::string& path) {
  T value{};
  file.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!file) throw IoError("checkpoint '" + path + "': truncated");
  return value;
}

json header_json(const ModelConfig& config, std::uint64_t seed, int epoch, Dtype dtype) {
  json header;
  header["num_layers"] = config.num_layers;
  header["input_dim"] = config.input_dim;
  header["hidden_dim"] = config.hidden_dim;
  header["activation"] = to_string(config.activation);
  header["view_pool"] = to_string(config.view_pool);
  header["node_readout"] = to_string(config.node_readout);
  header["head_hidden_dims"] = config.head_hidden_dims;
  header["output_dim"] = config.output_dim;
  header["seed"] = seed;
  header["epoch"] = epoch;
  header["dtype"] = to_string(dtype);
  return header;
}

CheckpointInfo parse_header(const json& header, const std::string& path) {
  CheckpointInfo info;
  try {
    info.model.num_layers = header.at("num_layers").get<int>();
    info.model.input_dim = header.at("input_dim").get<int>();
    info.model.hidden_dim = header.at("hidden_dim").get<int>();
    info.model.activation = parse_activation(header.at("activation").get<std::string>());
    info.model.view_pool = parse_pool(header.at("view_pool").get<std::string>());
    info.model.node_readout = parse_readout(header.at("node_readout").get<std::string>());
    info.model.head_hidden_dims = header.at("head_hidden_dims").get<std::vector<int>>();
    info.model.output_dim = header.at("output_dim").get<int>();
    info.seed = header.at("seed").get<std::uint64_t>();
    info.epoch = header.at("epoch").get<int>();
    info.dtype = parse_dtype(header.at("dtype").get<std::string>());
  } catch (const json::exception& e) {
    throw ValidationError("checkpoint '" + path + "': bad header: " + e.what());
  }
  return info;
}

CheckpointInfo read_header(std::ifstream& file, const std::string& path) {
  char magic[8];
  file.read(magic, sizeof(magic));
  if (!file || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ValidationError("checkpoint '" + path + "': bad magic");
  }
  const auto version = read_scalar<std::uint32_t>(file, path);
  if (version != kVersion) {
    throw ValidationError("checkpoint '" + path + "': unsupported version " +
                          std::to_string(version));
  }
  const auto header_len = read_scalar<std::uint64_t>(file, path);
  std::string header_text(header_len, '\0');
  file.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!file) throw IoError("checkpoint '" + path + "': truncated header");
  json header = json::parse(header_text, nullptr, false);
  if (header.is_discarded() || !header.is_object()) {
    throw ValidationError("checkpoint '" + path + "': header is not a JSON object");
  }
  return parse_header(header, path);
}

}  // namespace

std::string to_string(Dtype dtype) { return dtype == Dtype::f32 ? "float32" : "float64"; }

Dtype parse_dtype(const std::string& name) {
  if (name == "float32") return Dtype::f32;
  if (name == "float64") return Dtype::f64;
  throw ValidationError("unknown dtype '" + name + "' (expected float32 or float64)");
}

template <typename Real>
void save_checkpoint(const std::string& path, const Parameters<Real>& params,
                     const ModelConfig& config, std::uint64_t seed, int epoch) {
  validate_parameters(params, config);
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + path + "' for writing");

  file.write(kMagic, sizeof(kMagic));
  write_scalar(file, kVersion);
  const std::string header = header_json(config, seed, epoch, dtype_of<Real>()).dump();
  write_scalar(file, static_cast<std::uint64_t>(header.size()));
  file.write(header.data(), static_cast<std::streamsize>(header.size()));

  auto& mutable_params = const_cast<Parameters<Real>&>(params);
  const auto views = parameter_views(mutable_params);
  write_scalar(file, static_cast<std::uint32_t>(views.size()));
  for (const auto& view : views) {
    write_scalar(file, static_cast<std::uint32_t>(view.name.size()));
    file.write(view.name.data(), static_cast<std::streamsize>(view.name.size()));
    write_scalar(file, static_cast<std::uint8_t>(sizeof(Real)));
    write_scalar(file, static_cast<std::uint64_t>(view.size));
    file.write(reinterpret_cast<const char*>(view.data),
               static_cast<std::streamsize>(view.size * sizeof(Real)));
  }
  file.flush();
  if (!file) throw IoError("write to '" + path + "' failed");
}

CheckpointInfo peek_checkpoint(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + path + "' for reading");
  return read_header(file, path);
}

template <typename Real>
Parameters<Real> load_checkpoint(const std::string& path, CheckpointInfo* info) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + path + "' for reading");
  CheckpointInfo header = read_header(file, path);
  if (header.dtype != dtype_of<Real>()) {
    throw ValidationError("checkpoint '" + path + "': stored dtype is " +
                          to_string(header.dtype));
  }

  Parameters<Real> params = zero_parameters<Real>(header.model);
  const auto views = parameter_views(params);
  const auto count = read_scalar<std::uint32_t>(file, path);
  if (count != views.size()) {
    throw ValidationError("checkpoint '" + path + "': expected " +
                          std::to_string(views.size()) + " arrays, found " +
                          std::to_string(count));
  }
  for (const auto& view : views) {
    const auto name_len = read_scalar<std::uint32_t>(file, path);
    std::string name(name_len, '\0');
    file.read(name.data(), name_len);
    if (!file) throw IoError("checkpoint '" + path + "': truncated");
    if (name != view.name) {
      throw ValidationError("checkpoint '" + path + "': expected array '" + view.name +
                            "', found '" + name + "'");
    }
    const auto elem_size = read_scalar<std::uint8_t>(file, path);
    if (elem_size != sizeof(Real)) {
      throw ValidationError("checkpoint '" + path + "': element size mismatch in '" + name +
                            "'");
    }
    const auto numel = read_scalar<std::uint64_t>(file, path);
    if (numel != view.size) {
      throw ValidationError("checkpoint '" + path + "': array '" + name + "' has " +
                            std::to_string(numel) + " elements, expected " +
                            std::to_string(view.size));
    }
    file.read(reinterpret_cast<char*>(view.data),
              static_cast<std::streamsize>(view.size * sizeof(Real)));
    if (!file) throw IoError("checkpoint '" + path + "': truncated array '" + name + "'");
  }
  if (info) *info = header;
  return params;
}

template void save_checkpoint<float>(const std::string&, const Parameters<float>&,
                                     const ModelConfig&, std::uint64_t, int);
template void save_checkpoint<double>(const std::string&, const Parameters<double>&,
                                      const ModelConfig&, std::uint64_t, int);
template Parameters<float> load_checkpoint<float>(const std::string&, CheckpointInfo*);
template Parameters<double> load_checkpoint<double>(const std::string&, CheckpointInfo*);

}  // namespace subaug
