#include "relu_prism/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "csv.h"
#include "relu_prism/error.h"

namespace relu_prism {

double Dataset::target_rate() const {
  if (targets.empty()) return 0.0;
  return static_cast<double>(std::count(targets.begin(), targets.end(), 1)) / targets.size();
}

void Dataset::validate() const {
  if (features.rows() < 1) throw InvalidInputError("dataset has no rows");
  if (feature_names.size() != dims()) {
    throw InvalidInputError(fmt::format("dataset has {} feature names for {} columns",
                                        feature_names.size(), dims()));
  }
  if (targets.size() != rows()) {
    throw InvalidInputError(
        fmt::format("dataset has {} targets for {} rows", targets.size(), rows()));
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] != 0 && targets[i] != 1) {
      throw InvalidInputError(fmt::format("target at row {} is {}, expected 0 or 1", i, targets[i]));
    }
  }
  if (!features.allFinite()) throw InvalidInputError("dataset has non-finite features");
}

Dataset gen_boolean(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidInputError("gen_boolean needs n >= 1");
  std::mt19937_64 rng(seed);
  Dataset data;
  data.features.resize(n, kBooleanFeatureCount);
  data.targets.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t bits = rng();
    for (std::size_t k = 0; k < kBooleanFeatureCount; ++k)
      data.features(i, k) = static_cast<double>((bits >> k) & 1u);
    data.targets[i] = boolean_target(bits & 1u, (bits >> 1) & 1u, (bits >> 2) & 1u) ? 1 : 0;
  }
  for (std::size_t k = 0; k < kBooleanFeatureCount; ++k)
    data.feature_names.push_back(fmt::format("v{}", k + 1));
  data.provenance = fmt::format("boolean(n={}, seed={})", n, seed);
  return data;
}

Dataset subset(const Dataset& data, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.features.resize(indices.size(), data.features.cols());
  out.targets.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.features.row(i) = data.features.row(indices[i]);
    out.targets.push_back(data.targets.at(indices[i]));
  }
  out.feature_names = data.feature_names;
  out.provenance = data.provenance;
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw InvalidInputError(fmt::format("split fraction must be in (0, 1), got {}", fraction));
  }
  const std::size_t n = data.rows();
  const auto first_size = static_cast<std::size_t>(std::llround(fraction * n));
  if (first_size == 0 || first_size == n) {
    throw InvalidInputError(
        fmt::format("split of {} rows at fraction {} leaves an empty part", n, fraction));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> head(order.begin(), order.begin() + first_size);
  std::vector<std::size_t> tail(order.begin() + first_size, order.end());
  auto a = subset(data, head);
  auto b = subset(data, tail);
  a.provenance = fmt::format("{} [split {} seed {} part 0]", data.provenance, fraction, seed);
  b.provenance = fmt::format("{} [split {} seed {} part 1]", data.provenance, fraction, seed);
  return {std::move(a), std::move(b)};
}

void write_csv(const Dataset& data, std::ostream& out) {
  for (const auto& name : data.feature_names) out << internal::csv_escape(name) << ',';
  out << "target\n";
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t k = 0; k < data.dims(); ++k) out << fmt::format("{}", data.features(i, k)) << ',';
    out << data.targets[i] << '\n';
  }
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot write " + path.string());
  write_csv(data, out);
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open " + path.string());
  const auto records = internal::read_csv_records(in);
  if (records.empty()) throw SchemaError(path.string() + ": empty csv");
  const auto& header = records.front().fields;
  const auto target_it = std::find(header.begin(), header.end(), "target");
  const auto target_col =
      target_it == header.end() ? std::optional<std::size_t>{} : std::optional<std::size_t>(target_it - header.begin());

  Dataset data;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != target_col) data.feature_names.push_back(header[c]);
  const std::size_t n = records.size() - 1;
  data.features.resize(n, data.feature_names.size());
  data.targets.assign(n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& rec = records[r + 1];
    if (rec.fields.size() != header.size()) {
      throw SchemaError(fmt::format("{}: line {} has {} fields, header has {}", path.string(),
                                    rec.line, rec.fields.size(), header.size()));
    }
    std::size_t k = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      const std::string& s = rec.fields[c];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw SchemaError(fmt::format("{}: line {} column '{}' is not a finite number: '{}'",
                                      path.string(), rec.line, header[c], s));
      }
      if (c == target_col) {
        if (v != 0.0 && v != 1.0) {
          throw SchemaError(fmt::format("{}: line {} target must be 0 or 1", path.string(), rec.line));
        }
        data.targets[r] = static_cast<int>(v);
      } else {
        data.features(r, k++) = v;
      }
    }
  }
  data.provenance = path.filename().string();
  try {
    data.validate();
  } catch (const InvalidInputError& e) {
    throw SchemaError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return data;
}

}  // namespace relu_prism
