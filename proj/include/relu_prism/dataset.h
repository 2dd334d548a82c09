#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace relu_prism {

// Named feature matrix (one row per sample) with binary targets.
struct Dataset {
  Eigen::MatrixXd features;  // n x d
  std::vector<int> targets;  // n entries in {0, 1}
  std::vector<std::string> feature_names;
  std::string provenance;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(features.rows()); }
  std::size_t dims() const noexcept { return static_cast<std::size_t>(features.cols()); }
  Eigen::VectorXd row(std::size_t i) const { return features.row(i).transpose(); }
  double target_rate() const;

  // Throws InvalidInputError unless n >= 1, names and targets line up, targets
  // are binary, and every feature is finite.
  void validate() const;
};

inline constexpr std::size_t kBooleanFeatureCount = 10;
inline constexpr std::size_t kDefaultBooleanSamples = 100000;

// Target of the Boolean simulation: (v1 and v3) or (v2 and not v3).
constexpr bool boolean_target(bool v1, bool v2, bool v3) { return (v1 && v3) || (v2 && !v3); }

// n rows of 10 i.i.d. fair Boolean features v1..v10 in {0.0, 1.0}; only
// v1..v3 drive the target.
Dataset gen_boolean(std::size_t n, std::uint64_t seed);

// Seeded shuffle then split; the first part receives round(fraction * n) rows.
std::pair<Dataset, Dataset> split(const Dataset& data, double fraction, std::uint64_t seed);

// Rows selected by index, in the given order.
Dataset subset(const Dataset& data, const std::vector<std::size_t>& indices);

// csv with a header of feature names followed by a "target" column.
void write_csv(const Dataset& data, std::ostream& out);
void write_csv(const Dataset& data, const std::filesystem::path& path);
// Reads the write_csv layout. The "target" column is optional; when absent all
// targets are 0.
Dataset read_csv(const std::filesystem::path& path);

struct TitanicOptions {
  // Interior bin edges. When unset they are derived from the data: 4
  // equal-width Age edges over [min, max] and the Fare quartiles.
  std::optional<std::vector<double>> age_edges;
  std::optional<std::vector<double>> fare_edges;
};

inline const std::vector<std::string>& titanic_feature_names() {
  static const std::vector<std::string> names{"Age",      "Gender", "Pclass", "Fare",
                                              "Embarked", "Title",  "IsAlone"};
  return names;
}

// Kaggle Titanic train csv -> [Age, Gender, Pclass, Fare, Embarked, Title, IsAlone].
Dataset load_titanic(std::istream& in, const TitanicOptions& options = {});
Dataset load_titanic(const std::filesystem::path& csv_path, const TitanicOptions& options = {});

// Title code parsed from a passenger name: Mr 1, Miss 2, Mrs 3, Master 4, Rare 5.
int titanic_title_code(const std::string& name);

}  // namespace relu_prism
