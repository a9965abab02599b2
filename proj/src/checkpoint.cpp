#include "gmvo/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gmvo/binary.hpp"
#include "gmvo/errors.hpp"
#include "gmvo/version.hpp"

namespace gmvo {

namespace {

constexpr const char* kFormatMarker = "gmvo-checkpoint";

std::string to_hex(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << v;
  return out.str();
}

std::string encode_binary_section(const std::vector<double>& flat) {
  std::string bytes;
  bytes.reserve(flat.size() * 4);
  for (double v : flat) append_f32le(bytes, static_cast<float>(v));
  return bytes;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const TrainConfig& config,
                     const std::filesystem::path& path) {
  const std::vector<double> flat = flatten_params(params);
  const std::string binary = encode_binary_section(flat);

  nlohmann::json header;
  header["format"] = kFormatMarker;
  header["version"] = kCheckpointFormatVersion;
  header["model"] = to_string(kind_of(params));
  header["hops"] = config.hops;
  header["dims"] = layer_dims(params);
  header["output_dim"] = config.output_dim;
  header["lambda"] = config.lambda.value;
  header["loss"] = to_string(config.loss_kind);
  header["margin_delta"] = config.margin_delta;
  header["learning_rate"] = config.learning_rate;
  header["epochs"] = config.epochs;
  header["seed"] = config.seed;
  header["train_fraction"] = config.train_fraction;
  header["value_count"] = flat.size();
  header["checksum_fnv1a64"] = to_hex(fnv1a64(binary));

  // The offset names its own header length; iterate until stable.
  std::size_t offset = 0;
  for (int i = 0; i < 8; ++i) {
    header["binary_offset"] = offset;
    const std::size_t rendered = header.dump().size() + 1;  // + newline
    if (rendered == offset) break;
    offset = rendered;
  }
  header["binary_offset"] = offset;

  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  }
  out << header.dump() << '\n' << binary;
  if (!out) {
    throw std::runtime_error("failed writing checkpoint '" + path.string() + "'");
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open checkpoint '" + path.string() + "'");
  }
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());

  const std::size_t newline = bytes.find('\n');
  if (newline == std::string::npos) {
    throw ValidationError("malformed checkpoint header: no header terminator");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, newline));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed checkpoint header: ") + e.what());
  }

  try {
    if (header.at("format").get<std::string>() != kFormatMarker) {
      throw ValidationError("malformed checkpoint header: wrong format marker");
    }
    const auto model = model_kind_from_string(header.at("model").get<std::string>());
    const auto dims = header.at("dims").get<std::vector<std::size_t>>();
    const auto offset = header.at("binary_offset").get<std::size_t>();
    const auto value_count = header.at("value_count").get<std::size_t>();
    if (offset != newline + 1) {
      throw ValidationError("malformed checkpoint header: binary offset " +
                            std::to_string(offset) + " does not match header end");
    }
    if (dims.size() < 2) {
      throw ValidationError("malformed checkpoint header: dims too short");
    }
    if (bytes.size() - offset < value_count * 4) {
      throw ValidationError("truncated parameter block: expected " +
                            std::to_string(value_count * 4) + " bytes, found " +
                            std::to_string(bytes.size() - offset));
    }
    const auto binary = std::span<const char>(bytes).subspan(offset, value_count * 4);
    if (to_hex(fnv1a64(binary)) != header.at("checksum_fnv1a64").get<std::string>()) {
      throw ValidationError("checksum mismatch in checkpoint '" + path.string() + "'");
    }

    Checkpoint checkpoint;
    checkpoint.config.model_kind = model;
    checkpoint.config.hops = header.at("hops").get<int>();
    checkpoint.config.output_dim = header.at("output_dim").get<std::size_t>();
    checkpoint.config.lambda = Lambda(header.at("lambda").get<double>());
    checkpoint.config.loss_kind =
        loss_kind_from_string(header.at("loss").get<std::string>());
    checkpoint.config.margin_delta = header.at("margin_delta").get<double>();
    checkpoint.config.learning_rate = header.at("learning_rate").get<double>();
    checkpoint.config.epochs = header.at("epochs").get<int>();
    checkpoint.config.seed = header.at("seed").get<std::uint64_t>();
    checkpoint.config.train_fraction = header.at("train_fraction").get<double>();

    // Rebuild parameter shapes from the dims chain, then fill from binary.
    checkpoint.params = init_params(model, dims, 0);
    std::vector<double> flat = flatten_params(checkpoint.params);
    if (flat.size() != value_count) {
      throw ValidationError("truncated parameter block: header value count " +
                            std::to_string(value_count) + " vs shapes " +
                            std::to_string(flat.size()));
    }
    const auto* p = reinterpret_cast<const unsigned char*>(binary.data());
    for (std::size_t i = 0; i < flat.size(); ++i) {
      flat[i] = static_cast<double>(read_f32le(p + 4 * i));
    }
    assign_params(checkpoint.params, flat);
    return checkpoint;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed checkpoint header: ") + e.what());
  }
}

}  // namespace gmvo
