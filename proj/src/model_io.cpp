// Model file layout (all integers little-endian):
//
//   "DCAE"                      4 bytes
//   version                     u32
//   config length L             u32
//   config JSON (UTF-8)         L bytes
//   per parameter tensor, in parameter_views order:
//     element count C           u32
//     values                    C x f64
//   checksum                    u64, sum of all parameter value bytes mod 2^64

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "latentcloud/autoencoder.hpp"
#include "latentcloud/error.hpp"

namespace latentcloud {

namespace {

constexpr char kMagic[4] = {'D', 'C', 'A', 'E'};

static_assert(std::endian::native == std::endian::little,
              "model serialization assumes a little-endian host");

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.append(b, 4);
}

void put_u64(std::string& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.append(b, 8);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw TruncatedError("model file truncated while reading " + std::string(what) +
                           " at offset " + std::to_string(pos_));
    }
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::uint32_t u32(const char* what) {
    const auto s = take(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(s[i])) << (8 * i);
    return v;
  }

  std::uint64_t u64(const char* what) {
    const auto s = take(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(s[i])) << (8 * i);
    return v;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t offset() const { return pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

nlohmann::json config_to_json(const AEModel& model) {
  const AEConfig& c = model.config;
  const TrainingMetadata& m = model.metadata;
  return {
      {"input_points", c.input_points},
      {"latent_size", c.latent_size},
      {"encoder_widths", c.encoder_widths},
      {"decoder_widths", c.decoder_widths},
      {"output_points", c.output_points},
      {"seed", c.seed},
      {"training",
       {{"epochs_trained", m.epochs_trained},
        {"final_loss", m.final_loss},
        {"split_seed", m.split_seed},
        {"validation_fraction", m.validation_fraction}}},
  };
}

void json_to_config(const nlohmann::json& j, AEModel& model) {
  AEConfig& c = model.config;
  c.input_points = j.at("input_points").get<std::size_t>();
  c.latent_size = j.at("latent_size").get<std::size_t>();
  c.encoder_widths = j.at("encoder_widths").get<std::vector<std::size_t>>();
  c.decoder_widths = j.at("decoder_widths").get<std::vector<std::size_t>>();
  c.output_points = j.at("output_points").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  const auto& t = j.at("training");
  TrainingMetadata& m = model.metadata;
  m.epochs_trained = t.at("epochs_trained").get<std::size_t>();
  m.final_loss = t.at("final_loss").get<double>();
  m.split_seed = t.at("split_seed").get<std::uint64_t>();
  m.validation_fraction = t.at("validation_fraction").get<double>();
}

}  // namespace

std::string serialize_model(const AEModel& model) {
  std::string out(kMagic, 4);
  put_u32(out, kModelFormatVersion);
  const std::string config = config_to_json(model).dump();
  put_u32(out, static_cast<std::uint32_t>(config.size()));
  out += config;

  std::uint64_t checksum = 0;
  for (auto tensor : parameter_views(model)) {
    put_u32(out, static_cast<std::uint32_t>(tensor.size()));
    const std::size_t start = out.size();
    out.resize(start + tensor.size() * sizeof(double));
    std::memcpy(out.data() + start, tensor.data(), tensor.size() * sizeof(double));
    for (std::size_t i = start; i < out.size(); ++i) {
      checksum += static_cast<unsigned char>(out[i]);
    }
  }
  put_u64(out, checksum);
  return out;
}

AEModel deserialize_model(std::string_view bytes) {
  Reader in(bytes);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw BadMagicError("not a model file: missing DCAE magic");
  }
  in.take(4, "magic");
  const std::uint32_t version = in.u32("version");
  if (version != kModelFormatVersion) {
    throw VersionError("unsupported model format version " + std::to_string(version) +
                       " (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  const std::uint32_t config_len = in.u32("config length");
  const auto config_text = in.take(config_len, "config");

  AEModel model;
  try {
    json_to_config(nlohmann::json::parse(config_text), model);
    model.config.validate();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model config: ") + e.what());
  } catch (const ConfigError& e) {
    throw ShapeError(std::string("inconsistent model config: ") + e.what());
  }

  // Allocate layer shapes from the config, then fill them from the file.
  AEModel shaped = make_model(model.config);
  model.encoder = std::move(shaped.encoder);
  model.decoder = std::move(shaped.decoder);

  std::uint64_t checksum = 0;
  std::size_t index = 0;
  for (auto tensor : parameter_views(model)) {
    const std::uint32_t count = in.u32("tensor length");
    if (count != tensor.size()) {
      throw ShapeError("parameter tensor " + std::to_string(index) + " has " +
                       std::to_string(count) + " values, config implies " +
                       std::to_string(tensor.size()));
    }
    const auto raw = in.take(count * sizeof(double), "tensor values");
    std::memcpy(tensor.data(), raw.data(), raw.size());
    for (char ch : raw) checksum += static_cast<unsigned char>(ch);
    ++index;
  }
  const std::uint64_t stored = in.u64("checksum");
  if (stored != checksum) throw ChecksumError("model checksum mismatch");
  if (in.remaining() != 0) {
    throw FormatError("unexpected " + std::to_string(in.remaining()) +
                      " trailing bytes after checksum");
  }
  return model;
}

void save_model(const AEModel& model, const std::filesystem::path& path) {
  const std::string bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

AEModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace latentcloud
