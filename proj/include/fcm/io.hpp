#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

#include "fcm/harmonic.hpp"
#include "fcm/network.hpp"

namespace fcm::io {

/// Real matrix file: three header lines "K,<K>", "p,<rows>", "q,<cols>"
/// followed by the matrix in row-major CSV.
struct MatrixFile {
  int K = 0;
  Eigen::MatrixXd matrix;
};

void write_matrix_file(const std::filesystem::path& path, const Eigen::MatrixXd& m, int K);
MatrixFile read_matrix_file(const std::filesystem::path& path);

/// Sample CSV: a header row "#K=<K>,N=<N>,phases=abc" and one row per sample.
/// Real files carry the canonical real layout (p or q columns). Bus files carry
/// complex bus vectors as interleaved re,im pairs in bus-index order.
struct SampleFile {
  int K = 0;
  int N = 1;
  Eigen::MatrixXd samples;  // one column per sample
};

void write_sample_csv(const std::filesystem::path& path, const Eigen::MatrixXd& samples, int K, int N);
SampleFile read_sample_csv(const std::filesystem::path& path);

void write_bus_csv(const std::filesystem::path& path, const Eigen::MatrixXcd& samples, int K, int N);
struct BusFile {
  int K = 0;
  int N = 1;
  Eigen::MatrixXcd samples;
};
BusFile read_bus_csv(const std::filesystem::path& path);

/// Admittance file: header row then "k,phase,row,col,re,im" per stored entry.
void write_admittance_file(const std::filesystem::path& path, const HarmonicAdmittance& y);
HarmonicAdmittance read_admittance_file(const std::filesystem::path& path);

/// A named numeric result table, written as CSV.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_table_csv(const std::filesystem::path& path, const Table& table);
std::string format_number(double v);

}  // namespace fcm::io
