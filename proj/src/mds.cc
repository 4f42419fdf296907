// Copyright 2026 The mmfeat Authors
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

#include "mmf/mds.h"

#include <cmath>
#include <sstream>

#include "json.hpp"

namespace mmf {

std::string to_string(Category c) {
  switch (c) {
    case Category::kTextD:
      return "TextD";
    case Category::kCrossD:
      return "CrossD";
    case Category::kImgD:
      return "ImgD";
  }
  return "CrossD";
}

Category category_from_string(const std::string& s) {
  if (s == "TextD") return Category::kTextD;
  if (s == "CrossD") return Category::kCrossD;
  if (s == "ImgD") return Category::kImgD;
  throw FormatError("unknown category '" + s + "'");
}

DominanceScores modality_dominance_scores(const Matrix& z_img,
                                          const Matrix& z_txt) {
  if (z_img.rows() != z_txt.rows() || z_img.cols() != z_txt.cols()) {
    throw ShapeError("MDS inputs must have matching shapes");
  }
  if (z_img.rows() == 0) throw UsageError("MDS needs at least one sample");
  const std::size_t feats = z_img.cols();
  DominanceScores out;
  out.r.assign(feats, 0.0);
  out.live.assign(feats, false);
  out.m_used.assign(feats, 0);
  for (std::size_t k = 0; k < feats; ++k) {
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t m = 0; m < z_img.rows(); ++m) {
      const double a = std::abs(z_img(m, k));
      const double b = std::abs(z_txt(m, k));
      if (a + b < kMdsEpsilon) continue;
      sum += a / (a + b);
      ++used;
    }
    out.m_used[k] = used;
    out.live[k] = used > 0;
    out.r[k] = used > 0 ? sum / static_cast<double>(used) : 0.5;
  }
  return out;
}

MdsReport categorize_features(const Vector& r, const std::vector<bool>& live) {
  if (r.size() != live.size()) throw ShapeError("R and live differ in length");
  std::vector<double> vals;
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (live[k]) vals.push_back(r[k]);
  }
  if (vals.size() < 2) {
    throw UndefinedScoreError("need at least 2 live features, have " +
                              std::to_string(vals.size()));
  }
  // Shifted two-pass moments: identical inputs give sigma == 0 exactly.
  const double shift = vals[0];
  double mean_delta = 0.0;
  for (double v : vals) mean_delta += v - shift;
  mean_delta /= static_cast<double>(vals.size());
  const double mu = shift + mean_delta;
  double ss = 0.0;
  for (double v : vals) {
    const double dv = (v - shift) - mean_delta;
    ss += dv * dv;
  }
  const double sigma = std::sqrt(ss / static_cast<double>(vals.size()));

  MdsReport rep;
  rep.r = r;
  rep.live = live;
  rep.mu = mu;
  rep.sigma = sigma;
  rep.category.assign(r.size(), Category::kCrossD);
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (!live[k]) continue;
    if (r[k] < mu - sigma) {
      rep.category[k] = Category::kTextD;
    } else if (r[k] > mu + sigma) {
      rep.category[k] = Category::kImgD;
    }
  }
  return rep;
}

MdsReport categorize_features(const DominanceScores& scores) {
  MdsReport rep = categorize_features(scores.r, scores.live);
  rep.m_used = scores.m_used;
  return rep;
}

std::vector<std::size_t> MdsReport::features_in(Category c) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < category.size(); ++k) {
    if (live[k] && category[k] == c) out.push_back(k);
  }
  return out;
}

std::string MdsReport::to_json() const {
  nlohmann::json j;
  j["R"] = r;
  std::vector<std::string> cats;
  for (auto c : category) cats.push_back(to_string(c));
  j["category"] = cats;
  j["live"] = live;
  j["M_used"] = m_used;
  j["mu"] = mu;
  j["sigma"] = sigma;
  j["counts"] = {{"TextD", features_in(Category::kTextD).size()},
                 {"CrossD", features_in(Category::kCrossD).size()},
                 {"ImgD", features_in(Category::kImgD).size()}};
  return j.dump(1);
}

MdsReport MdsReport::from_json(const std::string& text) {
  MdsReport rep;
  try {
    auto j = nlohmann::json::parse(text);
    rep.r = j.at("R").get<Vector>();
    for (const auto& s : j.at("category")) {
      rep.category.push_back(category_from_string(s.get<std::string>()));
    }
    rep.live = j.at("live").get<std::vector<bool>>();
    if (j.contains("M_used")) rep.m_used = j["M_used"].get<std::vector<std::size_t>>();
    rep.mu = j.at("mu").get<double>();
    rep.sigma = j.at("sigma").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("MDS report: " + std::string(e.what()));
  }
  if (rep.category.size() != rep.r.size() || rep.live.size() != rep.r.size()) {
    throw FormatError("MDS report arrays differ in length");
  }
  return rep;
}

std::vector<HistogramRow> mds_histogram(const MdsReport& report,
                                        std::size_t bins) {
  if (bins == 0) throw UsageError("histogram needs at least one bin");
  std::vector<HistogramRow> rows(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    rows[b] = {static_cast<double>(b) / static_cast<double>(bins), 0, 0, 0};
  }
  for (std::size_t k = 0; k < report.r.size(); ++k) {
    if (!report.live[k]) continue;
    auto b = static_cast<std::size_t>(report.r[k] * static_cast<double>(bins));
    if (b >= bins) b = bins - 1;
    switch (report.category[k]) {
      case Category::kTextD:
        ++rows[b].text_d;
        break;
      case Category::kCrossD:
        ++rows[b].cross_d;
        break;
      case Category::kImgD:
        ++rows[b].img_d;
        break;
    }
  }
  return rows;
}

std::string histogram_csv(const std::vector<HistogramRow>& rows) {
  std::ostringstream out;
  out << "bin_left,count_TextD,count_CrossD,count_ImgD\n";
  for (const auto& r : rows) {
    out << r.bin_left << ',' << r.text_d << ',' << r.cross_d << ',' << r.img_d
        << '\n';
  }
  return out.str();
}

}  // namespace mmf
