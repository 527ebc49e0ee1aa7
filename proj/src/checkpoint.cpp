#include "boxdistill/checkpoint.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <vector>

#include "boxdistill/error.hpp"
#include "boxdistill/json_io.hpp"

namespace boxdistill {

namespace {

constexpr char kMagic[8] = {'B', 'X', 'D', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw CheckpointError("checkpoint: truncated file");
}

std::uint32_t param_crc(const std::vector<double>& params) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(params.data()),
            static_cast<uInt>(params.size() * sizeof(double))));
}

struct Header {
  ModelSpec spec;
  std::uint64_t param_count = 0;
  std::streampos blob_start;
};

Header read_header(std::istream& is, const std::filesystem::path& file) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw CheckpointError("not a checkpoint file: " + file.string());
  std::uint32_t version = 0;
  read_pod(is, version);
  if (version != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " +
                          std::to_string(version));
  std::uint32_t spec_len = 0;
  read_pod(is, spec_len);
  std::string spec_json(spec_len, '\0');
  is.read(spec_json.data(), spec_len);
  if (!is) throw CheckpointError("checkpoint: truncated spec header");

  Header h;
  try {
    h.spec = json::parse(spec_json).get<ModelSpec>();
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint: bad spec header: ") +
                          e.what());
  }
  read_pod(is, h.param_count);
  h.blob_start = is.tellg();
  return h;
}

std::vector<double> read_params(std::istream& is, const Header& h) {
  std::vector<double> params(h.param_count);
  is.read(reinterpret_cast<char*>(params.data()),
          static_cast<std::streamsize>(h.param_count * sizeof(double)));
  if (!is) throw CheckpointError("checkpoint: truncated parameter blob");
  std::uint32_t stored_crc = 0;
  read_pod(is, stored_crc);
  if (stored_crc != param_crc(params))
    throw CheckpointError("checkpoint: parameter checksum mismatch");
  return params;
}

}  // namespace

void save_checkpoint(const SegmentationModel& model,
                     const std::filesystem::path& file) {
  if (file.has_parent_path())
    std::filesystem::create_directories(file.parent_path());
  std::ofstream os(file, std::ios::binary);
  if (!os) throw CheckpointError("cannot open for write: " + file.string());

  const json spec_j = model.spec();
  const std::string spec_json = spec_j.dump();
  const std::vector<double> params = model.parameters_flat();

  os.write(kMagic, 8);
  write_pod(os, kCheckpointVersion);
  write_pod(os, static_cast<std::uint32_t>(spec_json.size()));
  os.write(spec_json.data(), static_cast<std::streamsize>(spec_json.size()));
  write_pod(os, static_cast<std::uint64_t>(params.size()));
  os.write(reinterpret_cast<const char*>(params.data()),
           static_cast<std::streamsize>(params.size() * sizeof(double)));
  write_pod(os, param_crc(params));
  if (!os) throw CheckpointError("write failed: " + file.string());
}

SegmentationModel load_checkpoint(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint: " + file.string());
  const Header h = read_header(is, file);
  SegmentationModel model(h.spec);
  if (model.parameter_count() != h.param_count)
    throw CheckpointError("checkpoint: parameter count does not match spec");
  model.set_parameters_flat(read_params(is, h));
  return model;
}

void load_checkpoint_into(SegmentationModel& model,
                          const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint: " + file.string());
  const Header h = read_header(is, file);
  if (!(h.spec.resolved() == model.spec()))
    throw CheckpointError("checkpoint spec does not match target model (" +
                          h.spec.architecture + " vs " +
                          model.spec().architecture + ")");
  if (model.parameter_count() != h.param_count)
    throw CheckpointError("checkpoint: parameter count does not match spec");
  model.set_parameters_flat(read_params(is, h));
}

ModelSpec read_checkpoint_spec(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint: " + file.string());
  return read_header(is, file).spec;
}

}  // namespace boxdistill
