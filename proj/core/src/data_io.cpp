// SPDX-License-Identifier: Apache-2.0
#include "psgld/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "psgld/errors.hpp"
#include "psgld/models.hpp"
#include "psgld/numfmt.hpp"
#include "psgld/rng.hpp"

namespace psgld {
namespace {

using json = nlohmann::json;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_integer(std::string_view s, T& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && !s.empty();
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open " + path.string());
  return in;
}

std::uint32_t read_be32(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw DatasetError(std::string("idx: truncated header (") + what + ")");
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

}  // namespace

Dataset parse_libsvm(std::istream& in, const LibsvmOptions& options) {
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;
  std::vector<double> raw_labels;
  std::size_t max_index = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = line;
    if (auto h = s.find('#'); h != std::string_view::npos) s = s.substr(0, h);
    s = trim(s);
    if (s.empty()) continue;
    const auto tok = split_ws(s);
    raw_labels.push_back(parse_double(tok[0], lineno));
    std::size_t prev = 0;
    for (std::size_t k = 1; k < tok.size(); ++k) {
      const auto colon = tok[k].find(':');
      if (colon == std::string_view::npos)
        throw ParseError("malformed feature '" + std::string(tok[k]) + "'", lineno);
      std::size_t idx = 0;
      if (!parse_integer(tok[k].substr(0, colon), idx) || idx == 0)
        throw ParseError("bad feature index in '" + std::string(tok[k]) + "'", lineno);
      if (idx <= prev) throw ParseError("feature indices must be strictly increasing", lineno);
      if (options.cols && idx > *options.cols)
        throw ParseError("feature index " + std::to_string(idx) + " exceeds dimension " +
                             std::to_string(*options.cols),
                         lineno);
      if (idx > 0xFFFFFFFFu) throw ParseError("feature index too large", lineno);
      prev = idx;
      const double v = parse_double(tok[k].substr(colon + 1), lineno);
      if (!std::isfinite(v)) throw ParseError("non-finite feature value", lineno);
      max_index = std::max(max_index, idx);
      cols.push_back(static_cast<std::uint32_t>(idx - 1));
      vals.push_back(v);
    }
    row_ptr.push_back(cols.size());
  }
  if (in.bad()) throw DatasetError(options.name + ": read error");
  if (raw_labels.empty()) throw DatasetError(options.name + ": no rows");

  bool zero_one = true;
  for (double y : raw_labels) {
    if (y != std::floor(y) || std::abs(y) > 1e9)
      throw DatasetError(options.name + ": labels must be integers");
    if (y != 0.0 && y != 1.0) zero_one = false;
  }
  std::vector<int> labels(raw_labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = static_cast<int>(raw_labels[i]);
    labels[i] = zero_one ? (y == 0 ? -1 : 1) : y;
  }
  const std::size_t D = options.cols.value_or(max_index);
  if (D == 0) throw DatasetError(options.name + ": no feature columns");
  return Dataset::sparse(options.name, D, std::move(row_ptr), std::move(cols), std::move(vals),
                         std::move(labels));
}

Dataset load_libsvm(const std::filesystem::path& path, LibsvmOptions options) {
  if (options.name == "libsvm") options.name = path.filename().string();
  std::ifstream in = open_in(path);
  return parse_libsvm(in, options);
}

void write_libsvm(std::ostream& out, const Dataset& data) {
  for (std::size_t r = 0; r < data.rows(); ++r) {
    out << data.label(r);
    data.for_each_nonzero(r, [&](std::size_t j, double v) {
      if (v != 0.0) out << ' ' << (j + 1) << ':' << format_double(v);
    });
    out << '\n';
  }
}

IdxTensor read_idx(std::istream& in) {
  const std::uint32_t magic = read_be32(in, "magic");
  std::size_t ndim = 0;
  if (magic == 0x00000801u) {
    ndim = 1;
  } else if (magic == 0x00000803u) {
    ndim = 3;
  } else {
    std::ostringstream m;
    m << "idx: bad magic 0x" << std::hex << magic;
    throw DatasetError(m.str());
  }
  IdxTensor t;
  std::size_t count = 1;
  for (std::size_t d = 0; d < ndim; ++d) {
    t.dims.push_back(read_be32(in, "dimension"));
    count *= t.dims.back();
  }
  t.data.resize(count);
  in.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(count));
  if (static_cast<std::size_t>(in.gcount()) != count)
    throw DatasetError("idx: truncated payload, expected " + std::to_string(count) + " bytes");
  if (in.peek() != std::char_traits<char>::eof())
    throw DatasetError("idx: payload longer than the declared element count");
  return t;
}

IdxTensor read_idx(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  try {
    return read_idx(in);
  } catch (const DatasetError& e) {
    throw DatasetError(path.string() + ": " + e.what());
  }
}

Dataset idx_to_dataset(const IdxTensor& images, const IdxTensor& labels, std::string name,
                       std::size_t limit) {
  if (images.dims.size() != 3) throw DatasetError(name + ": image file must be 3-D");
  if (labels.dims.size() != 1) throw DatasetError(name + ": label file must be 1-D");
  if (images.dims[0] != labels.dims[0])
    throw DatasetError(name + ": image and label counts differ");
  std::size_t n = images.dims[0];
  if (limit > 0) n = std::min(n, limit);
  const std::size_t D = std::size_t{images.dims[1]} * images.dims[2];
  std::vector<double> x(n * D);
  for (std::size_t k = 0; k < n * D; ++k) x[k] = images.data[k] / 255.0;
  std::vector<int> y(labels.data.begin(), labels.data.begin() + static_cast<std::ptrdiff_t>(n));
  return Dataset::dense(std::move(name), D, std::move(x), std::move(y));
}

Dataset load_mnist(const std::filesystem::path& dir, const std::string& prefix,
                   std::size_t limit) {
  const IdxTensor img = read_idx(dir / (prefix + "-images-idx3-ubyte"));
  const IdxTensor lab = read_idx(dir / (prefix + "-labels-idx1-ubyte"));
  return idx_to_dataset(img, lab, "mnist-" + prefix, limit);
}

void write_trace(const SampleTrace& trace, std::ostream& out) {
  json h;
  h["format"] = "psgld-trace";
  h["version"] = kTraceFormatVersion;
  h["dim"] = trace.dim;
  h["count"] = trace.size();
  h["S_T"] = format_double(trace.S_T);
  h["total_iters"] = trace.total_iters;
  h["burn_in"] = trace.burn_in;
  h["thinning"] = trace.thinning;
  h["seed"] = trace.seed;
  h["algorithm"] = trace.algorithm;
  h["schedule"] = trace.schedule;
  out << h.dump() << '\n';
  std::string row;
  for (const Sample& s : trace.samples) {
    if (s.theta.size() != trace.dim) throw DatasetError("trace sample has wrong dimension");
    row = format_double(s.eps);
    for (double v : s.theta) {
      row += ',';
      row += format_double(v);
    }
    row += '\n';
    out << row;
  }
  if (!out) throw Error("trace: write failed");
}

void write_trace(const SampleTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_trace(trace, out);
}

SampleTrace read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DatasetError("trace: missing header");
  json h;
  try {
    h = json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(std::string("trace header is not JSON: ") + e.what(), 1);
  }
  SampleTrace t;
  std::size_t count = 0;
  try {
    if (h.at("format").get<std::string>() != "psgld-trace")
      throw DatasetError("trace: not a trace file");
    const int version = h.at("version").get<int>();
    if (version != kTraceFormatVersion)
      throw DatasetError("trace: unsupported version " + std::to_string(version));
    t.dim = h.at("dim").get<std::size_t>();
    count = h.at("count").get<std::size_t>();
    t.S_T = parse_double(h.at("S_T").get<std::string>(), 1);
    t.total_iters = h.at("total_iters").get<std::size_t>();
    t.burn_in = h.at("burn_in").get<std::size_t>();
    t.thinning = h.at("thinning").get<std::size_t>();
    t.seed = h.at("seed").get<std::uint64_t>();
    t.algorithm = h.at("algorithm").get<std::string>();
    t.schedule = h.at("schedule").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("trace header: ") + e.what(), 1);
  }
  t.samples.reserve(count);
  std::size_t lineno = 1;
  while (t.samples.size() < count && std::getline(in, line)) {
    ++lineno;
    Sample s;
    s.theta.reserve(t.dim);
    std::string_view rest = line;
    if (!rest.empty() && rest.back() == '\r') rest.remove_suffix(1);
    bool first = true;
    while (true) {
      const auto comma = rest.find(',');
      const double v = parse_double(rest.substr(0, comma), lineno);
      if (first) {
        s.eps = v;
        first = false;
      } else {
        s.theta.push_back(v);
      }
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (s.theta.size() != t.dim)
      throw ParseError("expected " + std::to_string(t.dim + 1) + " columns", lineno);
    t.samples.push_back(std::move(s));
  }
  if (t.samples.size() != count)
    throw DatasetError("trace: truncated, header declares " + std::to_string(count) +
                       " samples, found " + std::to_string(t.samples.size()));
  return t;
}

SampleTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return read_trace(in);
}

Dataset synth_blr(std::size_t N, std::size_t D, std::uint64_t seed,
                  const std::vector<double>& true_theta) {
  if (N < 1 || D < 1) throw ConfigError("synth_blr: N and D must be >= 1");
  if (true_theta.size() != D) throw ConfigError("synth_blr: true_theta must have length D");
  Rng rng(seed);
  std::vector<double> x(N * D);
  std::vector<int> y(N);
  for (std::size_t r = 0; r < N; ++r) {
    double z = 0.0;
    for (std::size_t j = 0; j < D; ++j) {
      x[r * D + j] = rng.normal();
      z += true_theta[j] * x[r * D + j];
    }
    y[r] = rng.uniform() < sigmoid(z) ? 1 : -1;
  }
  return Dataset::dense("synth_blr", D, std::move(x), std::move(y));
}

// ---------------------------------------------------------------------------
// RunConfig

const std::vector<RunConfig::Key>& RunConfig::schema() {
  static const std::vector<Key> keys = {
      {"name", Kind::String, "run name used in output file names"},
      {"model", Kind::String, "gaussian | blr | mlp"},
      {"dataset", Kind::Path, "training data: LIBSVM file (blr) or IDX directory (mlp)"},
      {"test_dataset", Kind::Path, "held-out data, same format as dataset"},
      {"dims", Kind::Int, "LIBSVM column count override"},
      {"standardize", Kind::Bool, "standardize features to zero mean, unit variance"},
      {"train_limit", Kind::Int, "use at most this many training rows (0 = all)"},
      {"test_limit", Kind::Int, "use at most this many test rows (0 = all)"},
      {"target_mean", Kind::List, "gaussian target mean, comma separated"},
      {"target_cov", Kind::List, "gaussian target covariance diagonal, comma separated"},
      {"hidden", Kind::List, "mlp hidden layer sizes, comma separated"},
      {"sigma_sq", Kind::Real, "prior variance"},
      {"init", Kind::String, "starting point: model | zero"},
      {"algorithm", Kind::String, "SGLD | pSGLD | SGD | RMSprop"},
      {"schedule", Kind::String, "constant | polynomial | block_decay"},
      {"eps", Kind::Real, "step size (constant) or eps0 (block_decay)"},
      {"a", Kind::Real, "polynomial schedule scale"},
      {"b", Kind::Real, "polynomial schedule offset"},
      {"gamma", Kind::Real, "polynomial schedule exponent, in (0.5, 1]"},
      {"L_epochs", Kind::Int, "block_decay: epochs between halvings"},
      {"epoch_len", Kind::Int, "block_decay: iterations per epoch (default N / minibatch_size)"},
      {"eps_units", Kind::String, "absolute | per_datum"},
      {"burn_in", Kind::Int, "iterations discarded before recording"},
      {"thinning", Kind::Int, "record every k-th post-burn-in iteration"},
      {"total_iters", Kind::Int, "iterations to run"},
      {"minibatch_size", Kind::Int, "data items per gradient estimate"},
      {"seed", Kind::Int, "64-bit seed"},
      {"gamma_term", Kind::Bool, "add the preconditioner correction term (pSGLD)"},
      {"alpha", Kind::Real, "RMSprop decay"},
      {"lambda", Kind::Real, "RMSprop floor"},
      {"out", Kind::OutputPath, "output directory"},
      {"runs", Kind::Int, "experiments: independent seeds per setting"},
      {"eps_grid", Kind::List, "experiments: step sizes to sweep, comma separated"},
      {"oracle_steps", Kind::Int, "experiments: MH oracle length"},
      {"eps_psgld", Kind::Real, "fnn_small: pSGLD step size"},
      {"eps_rmsprop", Kind::Real, "fnn_small: RMSprop step size"},
      {"eps_sgld", Kind::Real, "fnn_small: SGLD step size"},
      {"eps_sgd", Kind::Real, "fnn_small: SGD step size"},
      {"threshold", Kind::Real, "blr_a9a: test error (percent) that counts as converged"},
  };
  return keys;
}

const RunConfig::Key& RunConfig::key_info(const std::string& key) {
  for (const Key& k : schema())
    if (k.name == key) return k;
  throw ConfigError("unknown config key '" + key + "'");
}

RunConfig RunConfig::parse(std::istream& in, const std::string& source) {
  RunConfig c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Strip comments outside quotes.
    bool quoted = false;
    std::string clean;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char ch = line[i];
      if (ch == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
      if (ch == '#' && !quoted) break;
      clean += ch;
    }
    if (quoted) throw ConfigError(source + ":" + std::to_string(lineno) + ": unterminated string");
    const std::string_view s = trim(clean);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key(trim(s.substr(0, eq)));
    std::string value(trim(s.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      std::string unq;
      for (std::size_t i = 1; i + 1 < value.size(); ++i) {
        if (value[i] == '\\' && i + 2 < value.size()) ++i;
        unq += value[i];
      }
      value = unq;
    }
    if (c.has(key))
      throw ConfigError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    try {
      c.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse(in, path.string());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  key_info(key);
  values_[key] = value;
}

void RunConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override must be key=value: " + assignment);
  set(std::string(trim(std::string_view(assignment).substr(0, eq))),
      std::string(trim(std::string_view(assignment).substr(eq + 1))));
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
  key_info(key);
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double RunConfig::get_real(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  try {
    return parse_double(values_.at(key));
  } catch (const ParseError&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + values_.at(key) + "'");
  }
}

std::int64_t RunConfig::get_int(const std::string& key, std::int64_t fallback) const {
  if (!has(key)) return fallback;
  std::int64_t v = 0;
  if (!parse_integer(std::string_view(values_.at(key)), v))
    throw ConfigError("config key '" + key + "': expected an integer, got '" + values_.at(key) + "'");
  return v;
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  std::uint64_t v = 0;
  if (!parse_integer(std::string_view(values_.at(key)), v))
    throw ConfigError("config key '" + key + "': expected a nonnegative integer, got '" +
                      values_.at(key) + "'");
  return v;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = values_.at(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + v + "'");
}

std::vector<double> RunConfig::get_list(const std::string& key,
                                        const std::vector<double>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  std::string_view rest = values_.at(key);
  while (true) {
    const auto comma = rest.find(',');
    const std::string_view item = trim(rest.substr(0, comma));
    if (!item.empty()) {
      try {
        out.push_back(parse_double(item));
      } catch (const ParseError&) {
        throw ConfigError("config key '" + key + "': bad list item '" + std::string(item) + "'");
      }
    }
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

std::filesystem::path RunConfig::get_path(const std::string& key) const {
  if (!has(key)) throw ConfigError("config key '" + key + "' is required");
  return std::filesystem::path(values_.at(key));
}

void RunConfig::validate() const {
  for (const auto& [key, value] : values_) {
    const Key& k = key_info(key);
    switch (k.kind) {
      case Kind::Path:
        if (!std::filesystem::exists(value))
          throw ConfigError("config key '" + key + "': path does not exist: " + value);
        break;
      case Kind::Int:
        get_u64(key, 0);
        break;
      case Kind::Real:
        get_real(key, 0.0);
        break;
      case Kind::Bool:
        get_bool(key, false);
        break;
      case Kind::List:
        get_list(key, {});
        break;
      case Kind::String:
      case Kind::OutputPath:
        break;
    }
  }
}

SamplerConfig RunConfig::sampler_config() const {
  SamplerConfig c;
  c.algorithm = parse_algorithm(get_string("algorithm", "pSGLD"));
  c.eps_units = parse_eps_units(get_string("eps_units", "absolute"));
  c.burn_in = get_u64("burn_in", 0);
  c.thinning = get_u64("thinning", 1);
  c.total_iters = get_u64("total_iters", 1000);
  c.minibatch_size = get_u64("minibatch_size", 1);
  c.seed = get_u64("seed", 0);
  c.gamma_term = get_bool("gamma_term", false);
  c.alpha = get_real("alpha", 0.99);
  c.lambda = get_real("lambda", 1e-5);
  const std::string kind = get_string("schedule", "constant");
  if (kind == "constant") {
    c.schedule = StepSchedule::constant(get_real("eps", 1e-3));
  } else if (kind == "polynomial") {
    c.schedule = StepSchedule::polynomial(get_real("a", 1.0), get_real("b", 0.0),
                                          get_real("gamma", 1.0));
  } else if (kind == "block_decay") {
    // epoch_len 0 is resolved by the caller once the dataset size is known.
    c.schedule = StepSchedule::block_decay(get_real("eps", 1e-3), get_u64("L_epochs", 1),
                                           std::max<std::uint64_t>(1, get_u64("epoch_len", 1)));
  } else {
    throw ConfigError("config key 'schedule': unknown schedule '" + kind + "'");
  }
  c.validate();
  return c;
}

}  // namespace psgld
