/*
 * Copyright 2026 The Percept Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "percept/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include <Eigen/Dense>

#include "percept/error.hpp"

namespace percept {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void CanonicalSign(VectorXd& v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0.0) v = -v;
}

// A unit vector orthogonal to `v`, built from the basis vector where v is
// smallest in magnitude.
VectorXd OrthogonalComplement(const VectorXd& v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().minCoeff(&arg);
  VectorXd e = VectorXd::Zero(v.size());
  e(arg) = 1.0;
  e -= v.dot(e) * v;
  return e.normalized();
}

std::string Fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

Projection2D Project(const Atlas& atlas, const std::string& intra_key) {
  const std::size_t k_rows = atlas.size();
  const std::size_t n_cols = atlas.code_length;
  if (k_rows < 3) {
    throw Error(ErrorKind::kInsufficientData,
                "projection needs at least 3 atlas entries, got " + std::to_string(k_rows));
  }

  MatrixXd x(static_cast<Eigen::Index>(k_rows), static_cast<Eigen::Index>(n_cols));
  for (std::size_t r = 0; r < k_rows; ++r) {
    const BitCode& bits = atlas.entries[r].code.bits;
    for (std::size_t c = 0; c < n_cols; ++c) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = bits.test(c) ? 1.0 : 0.0;
    }
  }
  x.rowwise() -= x.colwise().mean();
  const double dof = static_cast<double>(k_rows - 1);
  const double total_variance = x.squaredNorm() / dof;

  Projection2D out;
  VectorXd dirs[2] = {VectorXd::Zero(static_cast<Eigen::Index>(n_cols)),
                      VectorXd::Zero(static_cast<Eigen::Index>(n_cols))};
  double eig[2] = {0.0, 0.0};

  if (total_variance > 0.0) {
    if (k_rows < n_cols) {
      const MatrixXd gram = x * x.transpose();
      Eigen::SelfAdjointEigenSolver<MatrixXd> solver(gram);
      const Eigen::Index last = gram.rows() - 1;
      for (int i = 0; i < 2 && last - i >= 0; ++i) {
        const double lambda = solver.eigenvalues()(last - i);
        eig[i] = std::max(0.0, lambda) / dof;
        if (lambda > 1e-12 * gram.trace()) {
          dirs[i] = (x.transpose() * solver.eigenvectors().col(last - i)).normalized();
        }
      }
    } else {
      const MatrixXd cov = (x.transpose() * x) / dof;
      Eigen::SelfAdjointEigenSolver<MatrixXd> solver(cov);
      const Eigen::Index last = cov.rows() - 1;
      for (int i = 0; i < 2 && last - i >= 0; ++i) {
        eig[i] = std::max(0.0, solver.eigenvalues()(last - i));
        dirs[i] = solver.eigenvectors().col(last - i);
      }
    }
  } else if (n_cols > 0) {
    dirs[0](0) = 1.0;
  }

  if (n_cols >= 2) {
    if (dirs[0].squaredNorm() == 0.0) dirs[0](0) = 1.0;
    dirs[0].normalize();
    dirs[1] -= dirs[0].dot(dirs[1]) * dirs[0];
    if (dirs[1].norm() < 1e-6) {
      dirs[1] = OrthogonalComplement(dirs[0]);
    } else {
      dirs[1].normalize();
    }
  }
  CanonicalSign(dirs[0]);
  if (n_cols >= 2) CanonicalSign(dirs[1]);

  for (int i = 0; i < 2; ++i) {
    out.eigenvalues[static_cast<std::size_t>(i)] = eig[i];
    out.explained_variance[static_cast<std::size_t>(i)] =
        total_variance > 0.0 ? std::min(1.0, eig[i] / total_variance) : 0.0;
    out.component_vectors[static_cast<std::size_t>(i)].assign(dirs[i].data(),
                                                              dirs[i].data() + dirs[i].size());
  }

  const VectorXd xs = x * dirs[0];
  const VectorXd ys = x * dirs[1];
  out.points.reserve(k_rows);
  for (std::size_t r = 0; r < k_rows; ++r) {
    const auto& e = atlas.entries[r];
    auto tag = e.metadata.find(intra_key);
    out.points.push_back({e.sample_id, xs(static_cast<Eigen::Index>(r)),
                          ys(static_cast<Eigen::Index>(r)),
                          tag == e.metadata.end() ? std::string() : tag->second});
  }
  return out;
}

void WriteProjectionTsv(const Projection2D& projection, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path + " for writing");
  out << "# explained_variance\t" << Fmt(projection.explained_variance[0]) << '\t'
      << Fmt(projection.explained_variance[1]) << '\n';
  out << "sample_id\tx\ty\tintra\n";
  for (const auto& p : projection.points) {
    out << p.sample_id << '\t' << Fmt(p.x) << '\t' << Fmt(p.y) << '\t' << p.intra_tag << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "write to " + path + " failed");
}

namespace {

std::string XmlEscape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void WriteProjectionSvg(const Projection2D& projection, const std::string& path) {
  constexpr double kWidth = 640.0;
  constexpr double kHeight = 480.0;
  constexpr double kMargin = 40.0;
  constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                      "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

  double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
  for (const auto& p : projection.points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double span_x = std::max(max_x - min_x, 1e-9);
  const double span_y = std::max(max_y - min_y, 1e-9);

  std::map<std::string, std::size_t> colors;
  for (const auto& p : projection.points) colors.emplace(p.intra_tag, 0);
  std::size_t next = 0;
  for (auto& [tag, idx] : colors) idx = next++ % std::size(kPalette);

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path + " for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& p : projection.points) {
    const double px = kMargin + (p.x - min_x) / span_x * (kWidth - 2 * kMargin);
    const double py = kHeight - kMargin - (p.y - min_y) / span_y * (kHeight - 2 * kMargin);
    out << "<circle cx=\"" << Fmt(px) << "\" cy=\"" << Fmt(py) << "\" r=\"3\" fill=\""
        << kPalette[colors[p.intra_tag]] << "\"><title>" << XmlEscape(p.sample_id)
        << "</title></circle>\n";
  }
  double legend_y = 16.0;
  for (const auto& [tag, idx] : colors) {
    out << "<text x=\"8\" y=\"" << legend_y << "\" font-size=\"12\" fill=\"" << kPalette[idx]
        << "\">" << (tag.empty() ? "(untagged)" : XmlEscape(tag)) << "</text>\n";
    legend_y += 14.0;
  }
  out << "<text x=\"" << kWidth - 220 << "\" y=\"16\" font-size=\"12\">PC1 "
      << Fmt(projection.explained_variance[0]) << ", PC2 "
      << Fmt(projection.explained_variance[1]) << "</text>\n";
  out << "</svg>\n";
  if (!out) throw Error(ErrorKind::kIo, "write to " + path + " failed");
}

}  // namespace percept
