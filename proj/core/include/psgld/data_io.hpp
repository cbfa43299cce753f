// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "psgld/dataset.hpp"
#include "psgld/samplers.hpp"
#include "psgld/trace.hpp"

namespace psgld {

struct LibsvmOptions {
  std::string name = "libsvm";
  /// Column count; defaults to the largest index seen. Rows with a larger
  /// index are rejected.
  std::optional<std::size_t> cols;
};

/// Parses `<label> <index>:<value> ...` lines with 1-based, strictly
/// increasing indices. Blank lines and '#' comments are skipped. If every
/// label is 0 or 1, labels are remapped to -1/+1.
Dataset parse_libsvm(std::istream& in, const LibsvmOptions& options = {});
Dataset load_libsvm(const std::filesystem::path& path, LibsvmOptions options = {});
/// Writes labels and nonzero features; values use shortest round-trip text.
void write_libsvm(std::ostream& out, const Dataset& data);

/// Decoded IDX file (unsigned byte payload only).
struct IdxTensor {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;
};

/// Accepts magic 0x00000801 (1-D labels) and 0x00000803 (3-D images).
/// Throws DatasetError on a bad magic or a payload whose length differs
/// from the declared element count.
IdxTensor read_idx(std::istream& in);
IdxTensor read_idx(const std::filesystem::path& path);

/// Images flattened to rows of rows*cols values scaled by 1/255, labels as
/// integers. At most limit rows when limit > 0.
Dataset idx_to_dataset(const IdxTensor& images, const IdxTensor& labels, std::string name,
                       std::size_t limit = 0);
/// Loads <dir>/<prefix>-images-idx3-ubyte and <dir>/<prefix>-labels-idx1-ubyte,
/// prefix being "train" or "t10k".
Dataset load_mnist(const std::filesystem::path& dir, const std::string& prefix,
                   std::size_t limit = 0);

inline constexpr int kTraceFormatVersion = 1;

/// Header line of JSON metadata, then one CSV row per sample: eps followed
/// by the D parameters, all in shortest round-trip decimal form.
void write_trace(const SampleTrace& trace, std::ostream& out);
void write_trace(const SampleTrace& trace, const std::filesystem::path& path);
SampleTrace read_trace(std::istream& in);
SampleTrace read_trace(const std::filesystem::path& path);

/// N rows of standard normal features with labels +1 drawn with
/// probability sigmoid(true_theta . x), -1 otherwise.
Dataset synth_blr(std::size_t N, std::size_t D, std::uint64_t seed,
                  const std::vector<double>& true_theta);

/// Flat `key = value` run configuration. Values may be double-quoted;
/// '#' starts a comment outside quotes. Unknown keys and missing path
/// targets are rejected with ConfigError naming the key.
class RunConfig {
 public:
  enum class Kind { String, Path, OutputPath, Int, Real, Bool, List };
  struct Key {
    std::string name;
    Kind kind;
    std::string help;
  };

  static const std::vector<Key>& schema();

  static RunConfig parse(std::istream& in, const std::string& source = "<config>");
  static RunConfig load(const std::filesystem::path& path);

  /// Sets or replaces a value after checking the key against the schema.
  void set(const std::string& key, const std::string& value);
  /// Parses "key=value" (as given to --override).
  void apply_override(const std::string& assignment);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& fallback = "") const;
  double get_real(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;
  std::filesystem::path get_path(const std::string& key) const;

  /// Checks value syntax for every key and that input paths exist.
  void validate() const;

  /// Sampler settings from algorithm, schedule, eps, a, b, gamma, L_epochs,
  /// epoch_len, eps_units, burn_in, thinning, total_iters, minibatch_size,
  /// seed, gamma_term, alpha, lambda.
  SamplerConfig sampler_config() const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  static const Key& key_info(const std::string& key);
  std::map<std::string, std::string> values_;
};

}  // namespace psgld
