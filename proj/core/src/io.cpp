#include "rkhs/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace rkhs {

namespace fs = std::filesystem;

namespace {

double parse_double(std::string_view s, std::uint64_t offset) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("csv: cannot parse number '" + std::string(s) + "'", offset);
  }
  return v;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

const std::string& require(const KeyValues& kv, const std::string& key, const fs::path& where) {
  auto it = kv.find(key);
  if (it == kv.end()) throw DataError("missing key '" + key + "' in " + where.string());
  return it->second;
}

std::string join(const Vector& v) {
  std::string out;
  for (Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v(i));
  }
  return out;
}

Vector split(const std::string& s, Index n) {
  Vector v(n);
  std::size_t pos = 0;
  for (Index i = 0; i < n; ++i) {
    std::size_t next = s.find(',', pos);
    if (next == std::string::npos) next = s.size();
    v(i) = parse_double(std::string_view(s).substr(pos, next - pos), pos);
    pos = next + 1;
  }
  return v;
}

Matrix index_column(const IndexList& idx) {
  Matrix m(static_cast<Index>(idx.size()), 1);
  for (std::size_t i = 0; i < idx.size(); ++i) m(static_cast<Index>(i), 0) = static_cast<double>(idx[i]);
  return m;
}

IndexList read_indices(const fs::path& path) {
  const Matrix m = read_csv(path);
  IndexList out(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = static_cast<Index>(m(i, 0));
  return out;
}

const char* mode_tag(FitMode m) {
  switch (m) {
    case FitMode::Extrapolation: return "extrapolation";
    case FitMode::Square: return "square";
    case FitMode::LeastSquares: return "least-squares";
    case FitMode::Ridge: return "ridge";
  }
  return "extrapolation";
}

FitMode parse_mode(const std::string& s) {
  if (s == "extrapolation") return FitMode::Extrapolation;
  if (s == "square") return FitMode::Square;
  if (s == "least-squares") return FitMode::LeastSquares;
  if (s == "ridge") return FitMode::Ridge;
  throw DataError("unknown fit mode '" + s + "'");
}

const char* rule_tag(AllocationRule r) {
  switch (r) {
    case AllocationRule::NearestEuclidean: return "nearest-euclidean";
    case AllocationRule::NearestKernel: return "nearest-kernel";
    case AllocationRule::NearestTraining: return "nearest-training";
  }
  return "nearest-euclidean";
}

AllocationRule parse_rule(const std::string& s) {
  if (s == "nearest-euclidean") return AllocationRule::NearestEuclidean;
  if (s == "nearest-kernel") return AllocationRule::NearestKernel;
  if (s == "nearest-training") return AllocationRule::NearestTraining;
  throw DataError("unknown allocation rule '" + s + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

void write_csv(std::ostream& os, const Eigen::Ref<const Matrix>& m) {
  std::string line;
  for (Index i = 0; i < m.rows(); ++i) {
    line.clear();
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) line += ',';
      line += format_double(m(i, j));
    }
    line += '\n';
    os << line;
  }
}

void write_csv(const fs::path& path, const Eigen::Ref<const Matrix>& m) {
  auto out = open_out(path);
  write_csv(out, m);
}

Matrix read_csv(std::istream& is) {
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  std::uint64_t offset = 0;
  std::string line;
  while (std::getline(is, line)) {
    const std::uint64_t line_start = offset;
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Index count = 0;
    std::size_t pos = 0;
    for (;;) {
      std::size_t next = line.find(',', pos);
      const std::size_t end = next == std::string::npos ? line.size() : next;
      values.push_back(parse_double(std::string_view(line).substr(pos, end - pos), line_start + pos));
      ++count;
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    if (cols < 0) cols = count;
    if (count != cols) throw DataError("csv: ragged row", line_start);
    ++rows;
  }
  if (rows == 0) return Matrix(0, 0);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  }
  return m;
}

Matrix read_csv(const fs::path& path) {
  auto in = open_in(path);
  return read_csv(in);
}

KeyValues read_key_values(std::istream& is) {
  KeyValues kv;
  std::string line;
  std::uint64_t offset = 0;
  while (std::getline(is, line)) {
    const std::uint64_t start = offset;
    offset += line.size() + 1;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("expected key=value", start);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw DataError("empty key", start);
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues read_key_values(const fs::path& path) {
  auto in = open_in(path);
  return read_key_values(in);
}

void write_key_values(const fs::path& path, const KeyValues& kv) {
  auto out = open_out(path);
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

void save_kernel(const fs::path& path, const ScaledKernel& k) {
  KeyValues kv;
  kv["family"] = k.tag();
  kv["dim"] = std::to_string(k.dim());
  kv["identity"] = k.is_identity() ? "1" : "0";
  kv["erfinv"] = k.uses_erfinv() ? "1" : "0";
  kv["alpha"] = format_double(k.alpha());
  kv["lower"] = join(k.lower());
  kv["range"] = join(k.range());
  write_key_values(path, kv);
}

ScaledKernel load_kernel(const fs::path& path) {
  const KeyValues kv = read_key_values(path);
  auto base = make_kernel(require(kv, "family", path));
  const Index dim = std::stol(require(kv, "dim", path));
  if (require(kv, "identity", path) == "1") return ScaledKernel::unscaled(base, dim);
  return ScaledKernel(base, split(require(kv, "lower", path), dim), split(require(kv, "range", path), dim),
                      std::stod(require(kv, "alpha", path)), require(kv, "erfinv", path) == "1");
}

void save_regressor(const fs::path& dir, const Regressor& r) {
  fs::create_directories(dir);
  save_kernel(dir / "kernel.txt", r.kernel());
  write_csv(dir / "support.csv", r.support().matrix());
  write_csv(dir / "theta.csv", r.theta());
  KeyValues kv;
  kv["epsilon"] = format_double(r.epsilon());
  kv["jitter"] = format_double(r.jitter());
  kv["mode"] = mode_tag(r.mode());
  write_key_values(dir / "meta.txt", kv);
}

Regressor load_regressor(const fs::path& dir) {
  const KeyValues kv = read_key_values(dir / "meta.txt");
  return Regressor(load_kernel(dir / "kernel.txt"), PointSet::from(read_csv(dir / "support.csv")),
                   read_csv(dir / "theta.csv"), std::stod(require(kv, "epsilon", dir)),
                   parse_mode(require(kv, "mode", dir)), std::stod(require(kv, "jitter", dir)));
}

void save_cluster_model(const fs::path& dir, const ClusterModel& m) {
  fs::create_directories(dir);
  write_csv(dir / "centroids.csv", m.centroids().matrix());
  write_csv(dir / "assignment.csv", index_column(m.labels()));
  if (!m.training().empty()) write_csv(dir / "training.csv", m.training().matrix());
  if (m.kernel()) save_kernel(dir / "kernel.txt", *m.kernel());
  if (m.assignment()) write_csv(dir / "sigma.csv", index_column(*m.assignment()));
  if (m.source_indices()) write_csv(dir / "sources.csv", index_column(*m.source_indices()));
  write_key_values(dir / "meta.txt", {{"rule", rule_tag(m.rule())}});
}

ClusterModel load_cluster_model(const fs::path& dir) {
  const KeyValues kv = read_key_values(dir / "meta.txt");
  ClusterModelParts parts;
  parts.centroids = PointSet::from(read_csv(dir / "centroids.csv"));
  parts.rule = parse_rule(require(kv, "rule", dir));
  parts.labels = read_indices(dir / "assignment.csv");
  if (fs::exists(dir / "training.csv")) parts.training = PointSet::from(read_csv(dir / "training.csv"));
  if (fs::exists(dir / "kernel.txt")) parts.kernel = load_kernel(dir / "kernel.txt");
  if (fs::exists(dir / "sigma.csv")) parts.assignment = read_indices(dir / "sigma.csv");
  if (fs::exists(dir / "sources.csv")) parts.source_indices = read_indices(dir / "sources.csv");
  return ClusterModel(std::move(parts));
}

void save_multiscale(const fs::path& dir, const MultiscaleRegressor& m) {
  fs::create_directories(dir);
  save_regressor(dir / "coarse", m.coarse());
  for (std::size_t c = 0; c < m.locals().size(); ++c) {
    save_regressor(dir / ("local_" + std::to_string(c)), m.locals()[c]);
  }
  save_cluster_model(dir / "clusters", m.model());
  write_key_values(dir / "meta.txt", {{"clusters", std::to_string(m.locals().size())}});
}

MultiscaleRegressor load_multiscale(const fs::path& dir) {
  const KeyValues kv = read_key_values(dir / "meta.txt");
  const auto count = std::stoul(require(kv, "clusters", dir));
  std::vector<Regressor> locals;
  locals.reserve(count);
  for (std::size_t c = 0; c < count; ++c) locals.push_back(load_regressor(dir / ("local_" + std::to_string(c))));
  return MultiscaleRegressor(load_regressor(dir / "coarse"), std::move(locals), load_cluster_model(dir / "clusters"));
}

void save_sampler(const fs::path& dir, const SamplerMap& s) {
  fs::create_directories(dir);
  save_regressor(dir / "forward", s.forward());
  if (s.inverse()) save_regressor(dir / "inverse", *s.inverse());
  write_csv(dir / "sigma.csv", index_column(s.sigma()));
}

SamplerMap load_sampler(const fs::path& dir) {
  std::optional<Regressor> inverse;
  if (fs::exists(dir / "inverse")) inverse = load_regressor(dir / "inverse");
  return SamplerMap(load_regressor(dir / "forward"), std::move(inverse), read_indices(dir / "sigma.csv"));
}

}  // namespace rkhs
