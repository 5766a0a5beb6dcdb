#include "fcm/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace fcm::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return in;
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (s.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("'" + path.string() + "': not a number: '" + s + "'");
  }
}

long parse_int(const std::string& s, const std::filesystem::path& path) {
  const double v = parse_double(s, path);
  if (v != static_cast<double>(static_cast<long>(v))) throw ValidationError("'" + path.string() + "': not an integer: " + s);
  return static_cast<long>(v);
}

std::map<std::string, std::string> parse_header(const std::string& line, const std::filesystem::path& path) {
  if (line.empty() || line.front() != '#') throw ValidationError("'" + path.string() + "': missing '#K=..,N=..' header row");
  std::map<std::string, std::string> kv;
  for (const auto& item : split(line.substr(1))) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ValidationError("'" + path.string() + "': malformed header item '" + item + "'");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  if (!kv.count("K") || !kv.count("N")) throw ValidationError("'" + path.string() + "': header must carry K and N");
  if (kv.count("phases") && kv["phases"] != "abc") throw ValidationError("'" + path.string() + "': unsupported phase order");
  return kv;
}

std::string header_row(int K, int N) { return "#K=" + std::to_string(K) + ",N=" + std::to_string(N) + ",phases=abc"; }

std::vector<std::vector<double>> read_rows(std::istream& in, const std::filesystem::path& path) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line)) row.push_back(parse_double(cell, path));
    if (!rows.empty() && row.size() != rows.front().size())
      throw ValidationError("'" + path.string() + "': ragged rows");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_matrix_file(const std::filesystem::path& path, const Eigen::MatrixXd& m, int K) {
  auto out = open_out(path);
  out << "K," << K << "\np," << m.rows() << "\nq," << m.cols() << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_number(m(i, j));
    out << "\n";
  }
  if (!out) throw ValidationError("failed writing '" + path.string() + "'");
}

MatrixFile read_matrix_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  long dims[3] = {0, 0, 0};
  const char* keys[3] = {"K", "p", "q"};
  for (int h = 0; h < 3; ++h) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("'" + path.string() + "': truncated header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto cells = split(line);
    if (cells.size() != 2 || cells[0] != keys[h])
      throw ValidationError("'" + path.string() + "': header line " + std::to_string(h + 1) + " must be '" + keys[h] + ",<n>'");
    dims[h] = parse_int(cells[1], path);
  }
  const auto rows = read_rows(in, path);
  if (static_cast<long>(rows.size()) != dims[1] || (!rows.empty() && static_cast<long>(rows.front().size()) != dims[2]))
    throw ValidationError("'" + path.string() + "': matrix size does not match header");
  MatrixFile file;
  file.K = static_cast<int>(dims[0]);
  file.matrix.resize(dims[1], dims[2]);
  for (long i = 0; i < dims[1]; ++i)
    for (long j = 0; j < dims[2]; ++j) file.matrix(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return file;
}

void write_sample_csv(const std::filesystem::path& path, const Eigen::MatrixXd& samples, int K, int N) {
  auto out = open_out(path);
  out << header_row(K, N) << "\n";
  for (Eigen::Index t = 0; t < samples.cols(); ++t) {
    for (Eigen::Index i = 0; i < samples.rows(); ++i) out << (i ? "," : "") << format_number(samples(i, t));
    out << "\n";
  }
  if (!out) throw ValidationError("failed writing '" + path.string() + "'");
}

SampleFile read_sample_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto kv = parse_header(line, path);
  SampleFile file;
  file.K = static_cast<int>(parse_int(kv["K"], path));
  file.N = static_cast<int>(parse_int(kv["N"], path));
  const auto rows = read_rows(in, path);
  const Eigen::Index width = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
  file.samples.resize(width, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (Eigen::Index i = 0; i < width; ++i) file.samples(i, static_cast<Eigen::Index>(t)) = rows[t][static_cast<std::size_t>(i)];
  return file;
}

void write_bus_csv(const std::filesystem::path& path, const Eigen::MatrixXcd& samples, int K, int N) {
  Eigen::MatrixXd interleaved(2 * samples.rows(), samples.cols());
  for (Eigen::Index t = 0; t < samples.cols(); ++t)
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
      interleaved(2 * i, t) = samples(i, t).real();
      interleaved(2 * i + 1, t) = samples(i, t).imag();
    }
  write_sample_csv(path, interleaved, K, N);
}

BusFile read_bus_csv(const std::filesystem::path& path) {
  const auto raw = read_sample_csv(path);
  const Eigen::Index u = 3 * raw.N * (raw.K + 1);
  if (raw.samples.rows() != 2 * u)
    throw ValidationError("'" + path.string() + "': expected " + std::to_string(2 * u) + " columns for K, N in header");
  BusFile file{raw.K, raw.N, Eigen::MatrixXcd(u, raw.samples.cols())};
  for (Eigen::Index t = 0; t < raw.samples.cols(); ++t)
    for (Eigen::Index i = 0; i < u; ++i) file.samples(i, t) = {raw.samples(2 * i, t), raw.samples(2 * i + 1, t)};
  return file;
}

void write_admittance_file(const std::filesystem::path& path, const HarmonicAdmittance& y) {
  auto out = open_out(path);
  out << header_row(y.config().K, y.node_count()) << "\nk,phase,row,col,re,im\n";
  for (int k = 0; k <= y.config().K; ++k)
    for (int ph = 0; ph < kPhaseCount; ++ph) {
      const auto& b = y.block(k, ph);
      for (int i = 0; i < y.node_count(); ++i)
        for (int j = 0; j < y.node_count(); ++j)
          if (b(i, j) != std::complex<double>(0.0, 0.0))
            out << k << "," << ph << "," << i << "," << j << "," << format_number(b(i, j).real()) << ","
                << format_number(b(i, j).imag()) << "\n";
    }
  if (!out) throw ValidationError("failed writing '" + path.string() + "'");
}

HarmonicAdmittance read_admittance_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto kv = parse_header(line, path);
  HarmonicAdmittance y(HarmonicConfig(static_cast<int>(parse_int(kv["K"], path))), static_cast<int>(parse_int(kv["N"], path)));
  std::getline(in, line);  // column names
  for (const auto& row : read_rows(in, path)) {
    if (row.size() != 6) throw ValidationError("'" + path.string() + "': admittance rows need 6 fields");
    const int k = static_cast<int>(row[0]), ph = static_cast<int>(row[1]), i = static_cast<int>(row[2]), j = static_cast<int>(row[3]);
    if (k < 0 || k > y.config().K || ph < 0 || ph >= kPhaseCount || i < 0 || j < 0 || i >= y.node_count() || j >= y.node_count())
      throw ValidationError("'" + path.string() + "': admittance entry out of range");
    y.block(k, ph)(i, j) = {row[4], row[5]};
  }
  return y;
}

void write_table_csv(const std::filesystem::path& path, const Table& table) {
  auto out = open_out(path);
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
    out << "\n";
  }
  if (!out) throw ValidationError("failed writing '" + path.string() + "'");
}

}  // namespace fcm::io
