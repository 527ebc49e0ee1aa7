#include "boxdistill/blackbox.hpp"

#include <zlib.h>

#include <chrono>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "boxdistill/error.hpp"

namespace boxdistill {

LocalBlackBox::LocalBlackBox(SegmentationModel model) : model_([&] {
  model.set_mode(SegmentationModel::Mode::eval);
  return std::move(model);
}()) {}

SoftLabelMap LocalBlackBox::predict(const ImageTensor& image) const {
  count_query();
  return model_.predict(image);
}

std::unique_ptr<BlackBoxPredictor> wrap_as_blackbox(
    const SegmentationModel& model) {
  return std::make_unique<LocalBlackBox>(model);
}

namespace {

void round_through_float32(SoftLabelMap& map) {
  for (double& v : map.values) v = static_cast<float>(v);
}

constexpr char kCacheMagic[8] = {'B', 'X', 'D', 'P', 'L', 'C', '0', '1'};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw DataError("pseudo-label cache: truncated file");
}

std::string now_utc_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void PseudoLabelCache::insert(const std::string& sample_id,
                              const SoftLabelMap& map) {
  SoftLabelMap rounded = map;
  round_through_float32(rounded);
  rounded.validate();
  entries_[sample_id] = std::move(rounded);
}

bool PseudoLabelCache::contains(const std::string& sample_id) const {
  return entries_.count(sample_id) != 0;
}

const SoftLabelMap& PseudoLabelCache::at(const std::string& sample_id) const {
  const auto it = entries_.find(sample_id);
  if (it == entries_.end())
    throw ConfigError("pseudo-label cache: no entry for sample '" + sample_id +
                      "'");
  return it->second;
}

bool PseudoLabelCache::covers(const Dataset& dataset) const {
  for (const Sample& s : dataset.samples)
    if (!contains(s.id)) return false;
  return true;
}

void PseudoLabelCache::save(const std::filesystem::path& file) const {
  if (file.has_parent_path())
    std::filesystem::create_directories(file.parent_path());
  std::ofstream os(file, std::ios::binary);
  if (!os) throw DataError("cannot write cache: " + file.string());

  os.write(kCacheMagic, 8);
  write_pod(os, static_cast<std::uint32_t>(1));  // version
  write_pod(os, static_cast<std::uint32_t>(entries_.size()));
  std::vector<float> payload;
  for (const auto& [id, map] : entries_) {
    write_pod(os, static_cast<std::uint32_t>(id.size()));
    os.write(id.data(), static_cast<std::streamsize>(id.size()));
    write_pod(os, static_cast<std::uint32_t>(map.height));
    write_pod(os, static_cast<std::uint32_t>(map.width));
    write_pod(os, static_cast<std::uint32_t>(map.classes));
    payload.assign(map.values.begin(), map.values.end());
    const auto bytes = static_cast<std::streamsize>(payload.size() * sizeof(float));
    os.write(reinterpret_cast<const char*>(payload.data()), bytes);
    const auto crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(payload.data()),
              static_cast<uInt>(bytes)));
    write_pod(os, crc);
  }
  if (!os) throw DataError("cache write failed: " + file.string());

  nlohmann::json meta;
  meta["predictor_identity"] = provenance_.predictor_identity;
  meta["created_at_utc"] = provenance_.created_at_utc;
  meta["records"] = entries_.size();
  std::ofstream ms(file.string() + ".meta.json");
  ms << meta.dump(2) << "\n";
}

PseudoLabelCache PseudoLabelCache::load(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw DataError("cannot open cache: " + file.string());
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kCacheMagic, 8) != 0)
    throw DataError("not a pseudo-label cache: " + file.string());
  std::uint32_t version = 0, count = 0;
  read_pod(is, version);
  if (version != 1)
    throw DataError("unsupported cache version " + std::to_string(version));
  read_pod(is, count);

  PseudoLabelCache cache;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t id_len = 0, h = 0, w = 0, k = 0;
    read_pod(is, id_len);
    std::string id(id_len, '\0');
    is.read(id.data(), id_len);
    read_pod(is, h);
    read_pod(is, w);
    read_pod(is, k);
    std::vector<float> payload(static_cast<std::size_t>(h) * w * k);
    is.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(float)));
    if (!is) throw DataError("pseudo-label cache: truncated record");
    std::uint32_t stored_crc = 0;
    read_pod(is, stored_crc);
    const auto crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(payload.data()),
              static_cast<uInt>(payload.size() * sizeof(float))));
    if (crc != stored_crc)
      throw DataError("pseudo-label cache: checksum mismatch for '" + id + "'");

    SoftLabelMap map(static_cast<int>(h), static_cast<int>(w),
                     static_cast<int>(k));
    for (std::size_t j = 0; j < payload.size(); ++j) map.values[j] = payload[j];
    map.validate();
    cache.entries_[id] = std::move(map);
  }

  const std::filesystem::path meta_file(file.string() + ".meta.json");
  if (std::filesystem::exists(meta_file)) {
    std::ifstream ms(meta_file);
    nlohmann::json meta = nlohmann::json::parse(ms, nullptr, false);
    if (!meta.is_discarded()) {
      cache.provenance_.predictor_identity =
          meta.value("predictor_identity", "");
      cache.provenance_.created_at_utc = meta.value("created_at_utc", "");
    }
  }
  return cache;
}

PseudoLabelCache precompute_pseudo_labels(const BlackBoxPredictor& predictor,
                                          const Dataset& target_train) {
  if (target_train.samples.empty())
    throw ConfigError("precompute_pseudo_labels: empty target training set");

  PseudoLabelCache cache;
  for (const Sample& s : target_train.samples) {
    if (s.image.channels != predictor.in_channels())
      throw DataError("precompute_pseudo_labels: sample '" + s.id + "' has " +
                      std::to_string(s.image.channels) +
                      " channels, predictor expects " +
                      std::to_string(predictor.in_channels()));
    try {
      cache.insert(s.id, predictor.predict(s.image));
    } catch (const std::exception& e) {
      throw DataError("predictor failed on sample '" + s.id + "': " + e.what());
    }
  }
  cache.set_provenance({predictor.identity(), now_utc_iso8601()});
  return cache;
}

}  // namespace boxdistill
