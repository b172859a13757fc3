#include "udnn/model_io.hpp"

#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "udnn/errors.hpp"
#include "udnn/fingerprint.hpp"

namespace udnn {

namespace {

constexpr char kMagic[8] = {'U', 'D', 'N', 'N', 'M', 'D', 'L', '1'};

void write_block(std::ofstream& out, const double* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(double)));
}

void read_block(std::ifstream& in, double* data, std::size_t count,
                const std::string& path) {
  in.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(count * sizeof(double)))
    throw IntegrityError("truncated checkpoint: " + path);
}

}  // namespace

void save_model(const UdnnModel& model, const std::string& path) {
  model.validate();
  nlohmann::json header;
  header["format"] = "udnn.model";
  header["version"] = 1;
  header["n"] = model.meta.n;
  header["m"] = model.meta.m;
  header["k_layers"] = model.meta.k_layers;
  header["init_lambda"] = model.meta.init_lambda;
  header["init_lipschitz"] = model.meta.init_lipschitz;
  header["grid_fingerprint"] = fingerprint_hex(model.meta.grid_fingerprint);
  header["block_order"] = "per layer: W1R, W1I, W2R, W2I, theta";
  const std::string header_text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for write: " + path);
  out.write(kMagic, sizeof kMagic);
  const std::uint32_t header_len = static_cast<std::uint32_t>(header_text.size());
  out.write(reinterpret_cast<const char*>(&header_len), sizeof header_len);
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  for (const LayerParams& layer : model.layers) {
    write_block(out, layer.w1.re.data(), static_cast<std::size_t>(layer.w1.re.size()));
    write_block(out, layer.w1.im.data(), static_cast<std::size_t>(layer.w1.im.size()));
    write_block(out, layer.w2.re.data(), static_cast<std::size_t>(layer.w2.re.size()));
    write_block(out, layer.w2.im.data(), static_cast<std::size_t>(layer.w2.im.size()));
    write_block(out, &layer.theta, 1);
  }
  if (!out) throw IoError("write failed: " + path);
}

namespace {

nlohmann::json read_header(std::ifstream& in, const std::string& path) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (in.gcount() != sizeof magic || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw IntegrityError("not a model checkpoint: " + path);
  std::uint32_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof header_len);
  if (in.gcount() != sizeof header_len)
    throw IntegrityError("truncated checkpoint: " + path);
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), header_len);
  if (in.gcount() != static_cast<std::streamsize>(header_len))
    throw IntegrityError("truncated checkpoint: " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("bad checkpoint header: ") + e.what());
  }
  if (header.value("format", "") != "udnn.model" || header.value("version", 0) != 1)
    throw IntegrityError("unknown checkpoint format/version: " + path);
  return header;
}

}  // namespace

UdnnModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for read: " + path);
  nlohmann::json header = read_header(in, path);

  UdnnModel model;
  try {
    model.meta.n = header.at("n");
    model.meta.m = header.at("m");
    model.meta.k_layers = header.at("k_layers");
    model.meta.init_lambda = header.at("init_lambda");
    model.meta.init_lipschitz = header.at("init_lipschitz");
    model.meta.grid_fingerprint =
        fingerprint_from_hex(header.at("grid_fingerprint").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("bad checkpoint header: ") + e.what());
  }
  if (model.meta.n < 1 || model.meta.m < 1 || model.meta.k_layers < 1)
    throw IntegrityError("bad checkpoint shapes: " + path);

  const Eigen::Index n = model.meta.n;
  const Eigen::Index m = model.meta.m;
  model.layers.resize(model.meta.k_layers);
  for (LayerParams& layer : model.layers) {
    layer.w1 = SplitComplexMatrix::zero(m, n);
    layer.w2 = SplitComplexMatrix::zero(m, m);
    read_block(in, layer.w1.re.data(), static_cast<std::size_t>(m * n), path);
    read_block(in, layer.w1.im.data(), static_cast<std::size_t>(m * n), path);
    read_block(in, layer.w2.re.data(), static_cast<std::size_t>(m * m), path);
    read_block(in, layer.w2.im.data(), static_cast<std::size_t>(m * m), path);
    read_block(in, &layer.theta, 1, path);
  }
  // trailing garbage means the file is not what the header claims
  char extra;
  in.read(&extra, 1);
  if (in.gcount() != 0)
    throw IntegrityError("checkpoint has trailing bytes: " + path);
  model.validate();
  return model;
}

std::string model_header_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for read: " + path);
  return read_header(in, path).dump(2);
}

}  // namespace udnn
