// Copyright 2026 the npr-toolkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// PNG/JPEG codecs live behind this header only; everything else operates on
// plain npr::Image buffers.

#include <filesystem>

#include <opencv2/imgcodecs.hpp>

#include "npr/error.hpp"
#include "npr/image.hpp"

namespace npr {

inline Image load_image(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw Error("cannot decode image: " + path.string());
  Image img(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      img.at(x, y, 0) = row[x][2];
      img.at(x, y, 1) = row[x][1];
      img.at(x, y, 2) = row[x][0];
    }
  }
  return img;
}

inline void save_image_png(const std::filesystem::path& path, const Image& img) {
  if (img.empty()) throw Error("refusing to write an empty image: " + path.string());
  cv::Mat bgr(img.height, img.width, CV_8UC3);
  for (int y = 0; y < img.height; ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width; ++x) {
      row[x][2] = img.at(x, y, 0);
      row[x][1] = img.at(x, y, 1);
      row[x][0] = img.at(x, y, 2);
    }
  }
  if (!cv::imwrite(path.string(), bgr)) {
    throw Error("cannot write image: " + path.string());
  }
}

}  // namespace npr
