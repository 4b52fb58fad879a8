#pragma once

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sfd/dataset.hpp"
#include "sfd/linalg.hpp"
#include "sfd/path.hpp"

namespace testutil {

// Units on a line at x = 1..n, y = 0, ids "p1".."pn".
inline sfd::SpatialDataset line_dataset(const std::vector<double>& y,
                                        const std::vector<double>& x,
                                        const std::string& x_name = "x") {
  const auto n = static_cast<sfd::Index>(y.size());
  std::vector<std::string> ids;
  sfd::Matrix pos(n, 2);
  sfd::Vector outcome(n);
  sfd::Matrix regressors(n, 1);
  for (sfd::Index i = 0; i < n; ++i) {
    ids.push_back("p" + std::to_string(i + 1));
    pos(i, 0) = static_cast<double>(i + 1);
    pos(i, 1) = 0.0;
    outcome(i) = y[static_cast<std::size_t>(i)];
    regressors(i, 0) = x[static_cast<std::size_t>(i)];
  }
  return sfd::make_dataset(std::move(ids), std::move(pos), std::move(outcome), "y",
                           std::move(regressors), {x_name});
}

// rows x cols lattice, ids "r<i>c<j>", position (j, rows - 1 - i) so row 0 is
// the northernmost. Outcome and regressors are zero-filled unless set later.
inline sfd::SpatialDataset grid_dataset(int rows, int cols) {
  const sfd::Index n = static_cast<sfd::Index>(rows) * cols;
  std::vector<std::string> ids;
  sfd::Matrix pos(n, 2);
  sfd::Vector outcome = sfd::Vector::Zero(n);
  sfd::Matrix x = sfd::Matrix::Zero(n, 1);
  sfd::Index k = 0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      ids.push_back("r" + std::to_string(i) + "c" + std::to_string(j));
      pos(k, 0) = static_cast<double>(j);
      pos(k, 1) = static_cast<double>(rows - 1 - i);
      ++k;
    }
  }
  return sfd::make_dataset(std::move(ids), std::move(pos), std::move(outcome), "y", std::move(x),
                           {"x"});
}

// One channel listing every id of a line_dataset in order.
inline sfd::OrderedPath single_channel(sfd::Index n) {
  sfd::OrderedPath path;
  path.channels.emplace_back();
  for (sfd::Index i = 0; i < n; ++i) path.channels[0].push_back("p" + std::to_string(i + 1));
  path.direction = "x";
  return path;
}

// Temp file that removes itself; write once at construction.
struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& contents, const std::string& suffix = ".csv") {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("sfd_test_" + std::to_string(++counter) + "_" + std::to_string(::getpid()) + suffix);
    std::ofstream out(path);
    out << contents;
  }
  ~TempFile() { std::filesystem::remove(path); }
  std::string str() const { return path.string(); }
};

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("sfd_testdir_" + std::to_string(++counter) + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string str() const { return path.string(); }
};

}  // namespace testutil
