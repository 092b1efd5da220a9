#include "fcmer/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>

#include "fcmer/io_format.hpp"

namespace fcmer {

namespace {

// Box-Muller pairs from a 64-bit Mersenne Twister; the transform is spelled
// out so samples do not depend on the standard library's distributions.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') quoted = !quoted;
    if (ch == ',' && !quoted) {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  fields.push_back(trim(current));
  return fields;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  CsvTable table;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size())
      throw Error(ErrorCode::ParseError, path.string() + ": row " + std::to_string(table.rows.size() + 1) + " has " +
                                             std::to_string(fields.size()) + " fields, header has " +
                                             std::to_string(table.header.size()));
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw Error(ErrorCode::ParseError, path.string() + ": missing header row");
  return table;
}

}  // namespace

Eigen::Matrix2d GaussianClassSpec::covariance() const {
  const double s1 = std::sqrt(sigma2[0]);
  const double s2 = std::sqrt(sigma2[1]);
  Eigen::Matrix2d cov;
  cov << sigma2[0], s1 * s2 * rho, s1 * s2 * rho, sigma2[1];
  return cov;
}

void GaussianClassSpec::validate() const {
  if (!(sigma2[0] > 0.0 && sigma2[1] > 0.0)) throw Error(ErrorCode::InvalidArgument, "class variances must be > 0");
  if (!(rho > -1.0 && rho < 1.0)) throw Error(ErrorCode::InvalidArgument, "class correlation must lie in (-1, 1)");
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "class size must be positive");
}

std::vector<GaussianClassSpec> config_classes(int id) {
  // sizes are assigned to classes 1..4 in listed order
  constexpr std::array<int, 4> sizes = {150, 150, 50, 100};
  std::array<std::array<double, 5>, 4> p{};  // mu1, mu2, s1^2, s2^2, rho
  switch (id) {
    case 1: p = {{{45, 30, 100, 9, 0.0}, {70, 38, 81, 16, 0.0}, {45, 42, 100, 16, 0.0}, {42, 20, 81, 9, 0.0}}}; break;
    case 2: p = {{{45, 22, 144, 9, 0.0}, {70, 38, 81, 36, 0.0}, {50, 42, 36, 81, 0.0}, {42, 2, 9, 144, 0.0}}}; break;
    case 3: p = {{{45, 30, 100, 9, 0.7}, {70, 38, 81, 16, 0.8}, {45, 42, 100, 16, 0.7}, {42, 20, 81, 9, 0.8}}}; break;
    case 4: p = {{{45, 22, 144, 9, 0.7}, {70, 38, 81, 36, 0.8}, {50, 42, 36, 81, 0.7}, {42, 2, 9, 144, 0.8}}}; break;
    default: throw Error(ErrorCode::InvalidArgument, "configuration id must be 1..4");
  }
  std::vector<GaussianClassSpec> classes;
  for (std::size_t c = 0; c < 4; ++c)
    classes.push_back(GaussianClassSpec{{p[c][0], p[c][1]}, {p[c][2], p[c][3]}, p[c][4], sizes[c]});
  return classes;
}

Dataset sample_gaussian_classes(const std::vector<GaussianClassSpec>& classes, std::uint64_t seed) {
  Index total = 0;
  for (const auto& c : classes) {
    c.validate();
    total += c.n;
  }
  NormalSource normal(seed);
  Matrix x(total, 2);
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(total));
  Index row = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto& cls = classes[c];
    const double s1 = std::sqrt(cls.sigma2[0]);
    const double s2 = std::sqrt(cls.sigma2[1]);
    const double tail = std::sqrt(1.0 - cls.rho * cls.rho);
    for (int i = 0; i < cls.n; ++i, ++row) {
      const double z1 = normal.next();
      const double z2 = normal.next();
      x(row, 0) = cls.mu[0] + s1 * z1;
      x(row, 1) = cls.mu[1] + s2 * (cls.rho * z1 + tail * z2);
      labels.push_back(static_cast<int>(c));
    }
  }
  return Dataset(std::move(x), std::move(labels), {"x1", "x2"});
}

Dataset generate_config(int id, std::uint64_t seed) { return sample_gaussian_classes(config_classes(id), seed); }

Index OutlierSet::base_count() const {
  return static_cast<Index>(std::count(outlier.begin(), outlier.end(), false));
}

OutlierSet generate_outlier_set(int pct, std::uint64_t seed) {
  if (pct != 0 && pct != 10 && pct != 20 && pct != 30)
    throw Error(ErrorCode::InvalidArgument, "outlier percentage must be 0, 10, 20 or 30");
  constexpr int base = 80;
  const int extra = (pct * base + 99) / 100;
  std::vector<GaussianClassSpec> classes = {
      {{0.0, 0.0}, {0.05, 0.05}, 0.0, base / 2},
      {{0.8, 0.8}, {0.05, 0.05}, 0.0, base / 2},
  };
  if (extra > 0) classes.push_back({{0.8, 1.0}, {5.0, 5.0}, 0.0, extra});
  Dataset data = sample_gaussian_classes(classes, seed);
  std::vector<bool> outlier(static_cast<std::size_t>(data.n()), false);
  for (Index i = base; i < data.n(); ++i) outlier[static_cast<std::size_t>(i)] = true;
  Matrix ideal(2, 2);
  ideal << 0.0, 0.0, 0.8, 0.8;
  return OutlierSet{std::move(data), std::move(outlier), std::move(ideal)};
}

Dataset load_csv(const std::filesystem::path& path, const std::optional<std::string>& label_column) {
  const CsvTable table = read_table(path);
  std::optional<std::size_t> label_idx;
  if (label_column) {
    for (std::size_t c = 0; c < table.header.size(); ++c)
      if (table.header[c] == *label_column) label_idx = c;
    if (!label_idx) throw Error(ErrorCode::UnknownLabelColumn, "no column named '" + *label_column + "'");
  }
  const Index p = static_cast<Index>(table.header.size()) - (label_idx ? 1 : 0);
  const Index n = static_cast<Index>(table.rows.size());
  if (p < 1) throw Error(ErrorCode::ParseError, path.string() + ": no feature columns");
  Matrix x(n, p);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < table.header.size(); ++c)
    if (!label_idx || c != *label_idx) names.push_back(table.header[c]);

  std::vector<int> labels;
  std::unordered_map<std::string, int> codes;
  for (Index i = 0; i < n; ++i) {
    const auto& fields = table.rows[static_cast<std::size_t>(i)];
    Index j = 0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (label_idx && c == *label_idx) {
        auto [it, inserted] = codes.emplace(fields[c], static_cast<int>(codes.size()));
        labels.push_back(it->second);
        continue;
      }
      const auto value = parse_number(fields[c]);
      if (!value)
        throw Error(ErrorCode::ParseError, path.string() + ": row " + std::to_string(i + 1) + ", column '" +
                                               table.header[c] + "': '" + fields[c] + "' is not a finite number");
      x(i, j++) = *value;
    }
  }
  std::optional<std::vector<int>> maybe_labels;
  if (label_idx) maybe_labels = std::move(labels);
  return Dataset(std::move(x), std::move(maybe_labels), std::move(names));
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  std::vector<std::string> names = data.feature_names();
  if (names.empty())
    for (Index j = 0; j < data.p(); ++j) names.push_back("x" + std::to_string(j + 1));
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  if (data.has_labels()) out << ",label";
  out << '\n';
  for (Index i = 0; i < data.n(); ++i) {
    for (Index j = 0; j < data.p(); ++j) out << (j ? "," : "") << format_number(data.features()(i, j));
    if (data.has_labels()) out << ',' << data.labels()[static_cast<std::size_t>(i)];
    out << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, const std::vector<std::string>& header) {
  if (static_cast<Index>(header.size()) != m.cols())
    throw Error(ErrorCode::LengthMismatch, "header width differs from matrix columns");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_number(m(i, j));
    out << '\n';
  }
}

Matrix read_matrix_csv(const std::filesystem::path& path, std::vector<std::string>* header) {
  const CsvTable table = read_table(path);
  Matrix m(static_cast<Index>(table.rows.size()), static_cast<Index>(table.header.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      const auto value = parse_number(table.rows[i][j]);
      if (!value)
        throw Error(ErrorCode::ParseError, path.string() + ": row " + std::to_string(i + 1) + ", column '" +
                                               table.header[j] + "': '" + table.rows[i][j] +
                                               "' is not a finite number");
      m(static_cast<Index>(i), static_cast<Index>(j)) = *value;
    }
  if (header) *header = table.header;
  return m;
}

Standardized standardize(const Dataset& data) {
  const auto& x = data.features();
  const Index n = data.n();
  const Index p = data.p();
  Vector means(p);
  Vector stds(p);
  std::vector<bool> constant(static_cast<std::size_t>(p), false);
  Matrix z(n, p);
  for (Index j = 0; j < p; ++j) {
    const double mean = x.col(j).mean();
    const double var = (x.col(j).array() - mean).square().sum() / static_cast<double>(n);
    const double sd = std::sqrt(var);
    means(j) = mean;
    stds(j) = sd;
    if (sd < 1e-12) {
      constant[static_cast<std::size_t>(j)] = true;
      z.col(j) = x.col(j).array() - mean;
    } else {
      z.col(j) = (x.col(j).array() - mean) / sd;
    }
  }
  return Standardized{data.with_features(std::move(z)), std::move(means), std::move(stds), std::move(constant)};
}

Matrix destandardize(const Matrix& rows, const Standardized& s) {
  if (rows.cols() != s.means.size()) throw Error(ErrorCode::ShapeMismatch, "column count differs from standardization");
  Matrix out(rows.rows(), rows.cols());
  for (Index j = 0; j < rows.cols(); ++j) {
    const double scale = s.constant[static_cast<std::size_t>(j)] ? 1.0 : s.stds(j);
    out.col(j) = rows.col(j).array() * scale + s.means(j);
  }
  return out;
}

}  // namespace fcmer
