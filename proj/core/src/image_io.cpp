// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "swinmark/image_io.hpp"

#include <algorithm>
#include <csetjmp>
#include <cstdio>

#include <fmt/format.h>
#include <jpeglib.h>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <torch/torch.h>

#include "swinmark/errors.hpp"

namespace swinmark {
namespace {

torch::Tensor rgb8_to_tensor(const cv::Mat& rgb) {
  auto t = torch::from_blob(rgb.data, {rgb.rows, rgb.cols, 3}, torch::kUInt8).clone();
  return t.permute({2, 0, 1}).unsqueeze(0).to(torch::kFloat32).div_(255.0f).contiguous();
}

// [3, H, W] float -> HxWx3 uint8 (RGB order)
torch::Tensor tensor_to_rgb8(const torch::Tensor& image) {
  auto t = image.detach().to(torch::kCPU, torch::kFloat32);
  if (t.dim() == 4) {
    if (t.size(0) != 1) throw ShapeError("expected a single image [1, 3, H, W]");
    t = t.squeeze(0);
  }
  if (t.dim() != 3 || t.size(0) != 3) throw ShapeError("expected an RGB image [3, H, W]");
  return t.clamp(0.0, 1.0).mul(255.0).round().to(torch::kUInt8).permute({1, 2, 0}).contiguous();
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  std::longjmp(err->jump, 1);
}

}  // namespace

torch::Tensor load_image(const std::filesystem::path& path, int64_t height, int64_t width) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw DataError(fmt::format("cannot decode image '{}'", path.string()));
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  if (height > 0 && width > 0 && (rgb.rows != height || rgb.cols != width)) {
    // center crop to the target aspect ratio, then resize
    const double target = static_cast<double>(width) / static_cast<double>(height);
    int crop_w = rgb.cols, crop_h = rgb.rows;
    if (static_cast<double>(rgb.cols) / rgb.rows > target) {
      crop_w = std::max(1, static_cast<int>(std::lround(rgb.rows * target)));
    } else {
      crop_h = std::max(1, static_cast<int>(std::lround(rgb.cols / target)));
    }
    cv::Rect roi((rgb.cols - crop_w) / 2, (rgb.rows - crop_h) / 2, crop_w, crop_h);
    cv::Mat resized;
    const bool shrinking = crop_w >= width && crop_h >= height;
    cv::resize(rgb(roi), resized, cv::Size(static_cast<int>(width), static_cast<int>(height)), 0, 0,
               shrinking ? cv::INTER_AREA : cv::INTER_LINEAR);
    rgb = resized;
  }
  if (!rgb.isContinuous()) rgb = rgb.clone();
  return rgb8_to_tensor(rgb);
}

torch::Tensor load_image_dir(const std::filesystem::path& dir, int64_t height, int64_t width) {
  if (!std::filesystem::is_directory(dir)) {
    throw DataError(fmt::format("'{}' is not a directory", dir.string()));
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp" || ext == ".ppm" ||
        ext == ".tif" || ext == ".tiff" || ext == ".webp") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError(fmt::format("no images found in '{}'", dir.string()));
  std::vector<torch::Tensor> images;
  images.reserve(files.size());
  for (const auto& f : files) images.push_back(load_image(f, height, width));
  return torch::cat(images, 0);
}

void save_image(const std::filesystem::path& path, const torch::Tensor& image) {
  auto rgb = tensor_to_rgb8(image);
  cv::Mat view(static_cast<int>(rgb.size(0)), static_cast<int>(rgb.size(1)), CV_8UC3, rgb.data_ptr());
  cv::Mat bgr;
  cv::cvtColor(view, bgr, cv::COLOR_RGB2BGR);
  if (!cv::imwrite(path.string(), bgr)) {
    throw DataError(fmt::format("cannot write image '{}'", path.string()));
  }
}

torch::Tensor quantize_8bit(const torch::Tensor& image) {
  return image.clamp(0.0, 1.0).mul(255.0).round().div(255.0);
}

std::vector<uint8_t> encode_jpeg(const torch::Tensor& image, int quality) {
  if (quality < 1 || quality > 100) throw std::invalid_argument("JPEG quality must be in [1, 100]");
  auto rgb = tensor_to_rgb8(image);
  const auto height = static_cast<JDIMENSION>(rgb.size(0));
  const auto width = static_cast<JDIMENSION>(rgb.size(1));

  jpeg_compress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(buffer);
    throw DataError("libjpeg: compression failed");
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buffer, &size);
  cinfo.image_width = width;
  cinfo.image_height = height;
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  for (int c = 0; c < 3; ++c) {
    cinfo.comp_info[c].h_samp_factor = 1;
    cinfo.comp_info[c].v_samp_factor = 1;
  }
  cinfo.dct_method = JDCT_ISLOW;
  jpeg_start_compress(&cinfo, TRUE);
  auto* base = rgb.data_ptr<uint8_t>();
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = base + static_cast<size_t>(cinfo.next_scanline) * width * 3;
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::vector<uint8_t> out(buffer, buffer + size);
  std::free(buffer);
  return out;
}

torch::Tensor decode_jpeg(const std::vector<uint8_t>& bytes) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw DataError("libjpeg: decompression failed");
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  cinfo.dct_method = JDCT_ISLOW;
  jpeg_start_decompress(&cinfo);
  const int64_t h = cinfo.output_height, w = cinfo.output_width;
  auto pixels = torch::empty({h, w, 3}, torch::kUInt8);
  auto* base = pixels.data_ptr<uint8_t>();
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = base + static_cast<size_t>(cinfo.output_scanline) * w * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return pixels.permute({2, 0, 1}).unsqueeze(0).to(torch::kFloat32).div_(255.0f).contiguous();
}

torch::Tensor reference_jpeg(const torch::Tensor& image, int quality) {
  if (image.dim() != 4 || image.size(1) != 3) throw ShapeError("reference_jpeg: expected [B, 3, H, W]");
  std::vector<torch::Tensor> out;
  out.reserve(static_cast<size_t>(image.size(0)));
  for (int64_t i = 0; i < image.size(0); ++i) out.push_back(decode_jpeg(encode_jpeg(image[i], quality)));
  return torch::cat(out, 0);
}

}  // namespace swinmark
