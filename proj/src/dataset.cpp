#include "boxdistill/dataset.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/core.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "boxdistill/error.hpp"

namespace boxdistill {

namespace fs = std::filesystem;

std::string to_string(Domain d) {
  return d == Domain::source ? "source" : "target";
}
std::string to_string(Split s) { return s == Split::train ? "train" : "test"; }

bool Dataset::labeled() const {
  return !samples.empty() &&
         std::all_of(samples.begin(), samples.end(),
                     [](const Sample& s) { return s.mask.has_value(); });
}

void Dataset::validate() const {
  if (class_count < 2) throw DataError("Dataset: class_count must be >= 2");
  std::set<std::string> ids;
  for (const Sample& s : samples) {
    if (!ids.insert(s.id).second)
      throw DataError("Dataset: duplicate sample id '" + s.id + "'");
    s.image.validate();
    if (s.mask) {
      if (s.mask->height != s.image.height || s.mask->width != s.image.width)
        throw DataError("Dataset: mask/image shape mismatch for '" + s.id +
                        "'");
      s.mask->validate(class_count);
    }
  }
}

namespace {

ImageTensor image_from_mat(const cv::Mat& mat, const std::string& ctx) {
  if (mat.empty()) throw DataError("failed to decode image: " + ctx);
  cv::Mat m = mat;
  if (m.depth() == CV_16U) {
    m.convertTo(m, CV_8U, 1.0 / 257.0);
  }
  if (m.depth() != CV_8U)
    throw DataError("unsupported image depth in " + ctx);
  ImageTensor out(m.rows, m.cols, m.channels());
  for (int y = 0; y < m.rows; ++y)
    for (int x = 0; x < m.cols; ++x)
      for (int c = 0; c < m.channels(); ++c) {
        const unsigned char v = m.ptr<unsigned char>(y)[x * m.channels() + c];
        out.at(y, x, c) = v / 255.0;
      }
  return out;
}

LabelMask mask_from_mat(const cv::Mat& mat, const std::string& ctx) {
  if (mat.empty()) throw DataError("failed to decode mask: " + ctx);
  if (mat.channels() != 1)
    throw DataError("mask must be single-channel: " + ctx);
  if (mat.depth() != CV_8U) throw DataError("mask must be 8-bit: " + ctx);
  LabelMask out(mat.rows, mat.cols);
  for (int y = 0; y < mat.rows; ++y)
    for (int x = 0; x < mat.cols; ++x)
      out.at(y, x) = mat.ptr<unsigned char>(y)[x];
  return out;
}

}  // namespace

Dataset load_dataset(const fs::path& dir, int class_count, Domain domain,
                     Split split) {
  const fs::path images_dir = dir / "images";
  const fs::path masks_dir = dir / "masks";
  if (!fs::is_directory(images_dir))
    throw DataError("dataset images directory not found: " +
                    images_dir.string());
  const bool has_masks = fs::is_directory(masks_dir);

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(images_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".png")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  Dataset ds;
  ds.domain = domain;
  ds.split = split;
  ds.class_count = class_count;
  for (const fs::path& f : files) {
    Sample s;
    s.id = f.stem().string();
    cv::Mat img = cv::imread(f.string(), cv::IMREAD_UNCHANGED);
    s.image = image_from_mat(img, f.string());
    s.image.clamp01();
    if (has_masks) {
      const fs::path mf = masks_dir / f.filename();
      if (!fs::exists(mf))
        throw DataError("missing mask for sample '" + s.id + "'");
      cv::Mat m = cv::imread(mf.string(), cv::IMREAD_UNCHANGED);
      s.mask = mask_from_mat(m, mf.string());
    }
    ds.samples.push_back(std::move(s));
  }
  ds.validate();
  return ds;
}

void save_dataset(const fs::path& dir, const Dataset& dataset) {
  const fs::path images_dir = dir / "images";
  fs::create_directories(images_dir);
  const bool labeled = dataset.labeled();
  const fs::path masks_dir = dir / "masks";
  if (labeled) fs::create_directories(masks_dir);

  for (const Sample& s : dataset.samples) {
    const ImageTensor& im = s.image;
    cv::Mat mat(im.height, im.width, CV_8UC(im.channels));
    for (int y = 0; y < im.height; ++y)
      for (int x = 0; x < im.width; ++x)
        for (int c = 0; c < im.channels; ++c)
          mat.ptr<unsigned char>(y)[x * im.channels + c] =
              static_cast<unsigned char>(
                  std::lround(std::clamp(im.at(y, x, c), 0.0, 1.0) * 255.0));
    cv::imwrite((images_dir / (s.id + ".png")).string(), mat);

    if (labeled) {
      const LabelMask& mk = *s.mask;
      cv::Mat mmat(mk.height, mk.width, CV_8UC1);
      for (int y = 0; y < mk.height; ++y)
        for (int x = 0; x < mk.width; ++x)
          mmat.ptr<unsigned char>(y)[x] =
              static_cast<unsigned char>(mk.at(y, x));
      cv::imwrite((masks_dir / (s.id + ".png")).string(), mmat);
    }
  }
}

}  // namespace boxdistill
