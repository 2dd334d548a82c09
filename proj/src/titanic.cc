// Kaggle Titanic train csv -> the seven ordinal features used by the titanic
// experiment. Cleaning follows the common public recipe: group-median age
// imputation, equal-width age bands, fare quartiles, title extraction.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <regex>

#include <fmt/format.h>

#include "csv.h"
#include "relu_prism/dataset.h"
#include "relu_prism/error.h"

namespace relu_prism {

namespace {

struct Passenger {
  std::size_t line;
  int survived;
  int pclass;
  bool female;
  std::optional<double> age;
  int sibsp;
  int parch;
  std::optional<double> fare;
  std::optional<int> embarked;
  int title;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Linear-interpolated quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * (sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
}

// Right-closed bins: value v gets the number of interior edges strictly below it.
int bin_of(double v, const std::vector<double>& edges) {
  return static_cast<int>(std::count_if(edges.begin(), edges.end(), [v](double e) { return e < v; }));
}

class RowReader {
 public:
  RowReader(const internal::CsvRecord& rec, const std::map<std::string, std::size_t>& cols)
      : rec_(rec), cols_(cols) {}

  const std::string& text(const std::string& col) const { return rec_.fields[cols_.at(col)]; }

  std::optional<double> maybe_number(const std::string& col) const {
    const std::string& s = text(col);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) fail(col, s);
    return v;
  }

  double number(const std::string& col) const {
    auto v = maybe_number(col);
    if (!v) fail(col, "");
    return *v;
  }

  int integer(const std::string& col, int lo, int hi) const {
    const double v = number(col);
    if (v != std::floor(v) || v < lo || v > hi) fail(col, text(col));
    return static_cast<int>(v);
  }

  [[noreturn]] void fail(const std::string& col, const std::string& value) const {
    throw SchemaError(
        fmt::format("titanic csv line {}: bad value '{}' in column {}", rec_.line, value, col));
  }

 private:
  const internal::CsvRecord& rec_;
  const std::map<std::string, std::size_t>& cols_;
};

}  // namespace

int titanic_title_code(const std::string& name) {
  static const std::regex pattern(R"( ([A-Za-z]+)\.)");
  std::smatch m;
  if (!std::regex_search(name, m, pattern)) return 5;
  const std::string title = m[1];
  if (title == "Mr") return 1;
  if (title == "Miss" || title == "Mlle" || title == "Ms") return 2;
  if (title == "Mrs" || title == "Mme") return 3;
  if (title == "Master") return 4;
  return 5;
}

Dataset load_titanic(std::istream& in, const TitanicOptions& options) {
  const auto records = internal::read_csv_records(in);
  if (records.empty()) throw SchemaError("titanic csv is empty");

  std::map<std::string, std::size_t> cols;
  for (std::size_t c = 0; c < records[0].fields.size(); ++c) cols[records[0].fields[c]] = c;
  for (const char* required :
       {"Survived", "Pclass", "Name", "Sex", "Age", "SibSp", "Parch", "Fare", "Embarked"}) {
    if (!cols.contains(required)) {
      throw SchemaError(fmt::format("titanic csv is missing required column {}", required));
    }
  }

  std::vector<Passenger> passengers;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != records[0].fields.size()) {
      throw SchemaError(fmt::format("titanic csv line {}: {} fields, header has {}", rec.line,
                                    rec.fields.size(), records[0].fields.size()));
    }
    RowReader row(rec, cols);
    Passenger p{};
    p.line = rec.line;
    p.survived = row.integer("Survived", 0, 1);
    p.pclass = row.integer("Pclass", 1, 3);
    const std::string& sex = row.text("Sex");
    if (sex != "male" && sex != "female") row.fail("Sex", sex);
    p.female = sex == "female";
    p.age = row.maybe_number("Age");
    if (p.age && *p.age < 0) row.fail("Age", row.text("Age"));
    p.sibsp = row.integer("SibSp", 0, 1000);
    p.parch = row.integer("Parch", 0, 1000);
    p.fare = row.maybe_number("Fare");
    if (p.fare && *p.fare < 0) row.fail("Fare", row.text("Fare"));
    const std::string& port = row.text("Embarked");
    if (port == "S") p.embarked = 0;
    else if (port == "C") p.embarked = 1;
    else if (port == "Q") p.embarked = 2;
    else if (!port.empty()) row.fail("Embarked", port);
    p.title = titanic_title_code(row.text("Name"));
    passengers.push_back(p);
  }
  if (passengers.empty()) throw SchemaError("titanic csv has no passenger rows");

  // Age: median of known ages within each (gender, class) cell, rounded to the
  // nearest half year; an empty cell falls back to the global median.
  std::vector<double> all_ages;
  std::map<std::pair<bool, int>, std::vector<double>> cell_ages;
  for (const auto& p : passengers) {
    if (!p.age) continue;
    all_ages.push_back(*p.age);
    cell_ages[{p.female, p.pclass}].push_back(*p.age);
  }
  if (all_ages.empty()) throw SchemaError("titanic csv has no known ages");
  const double global_age = median(all_ages);
  for (auto& p : passengers) {
    if (p.age) continue;
    auto it = cell_ages.find({p.female, p.pclass});
    const double guess = it == cell_ages.end() ? global_age : median(it->second);
    p.age = std::floor(guess / 0.5 + 0.5) * 0.5;
  }

  std::vector<double> fares;
  for (const auto& p : passengers)
    if (p.fare) fares.push_back(*p.fare);
  if (fares.empty()) throw SchemaError("titanic csv has no known fares");
  const double fare_median = median(fares);
  for (auto& p : passengers)
    if (!p.fare) p.fare = fare_median;

  std::array<int, 3> port_counts{};
  for (const auto& p : passengers)
    if (p.embarked) ++port_counts[*p.embarked];
  const int port_mode =
      static_cast<int>(std::max_element(port_counts.begin(), port_counts.end()) - port_counts.begin());
  for (auto& p : passengers)
    if (!p.embarked) p.embarked = port_mode;

  std::vector<double> age_edges;
  if (options.age_edges) {
    age_edges = *options.age_edges;
  } else {
    double lo = *passengers[0].age, hi = lo;
    for (const auto& p : passengers) {
      lo = std::min(lo, *p.age);
      hi = std::max(hi, *p.age);
    }
    for (int k = 1; k < 5; ++k) age_edges.push_back(lo + k * (hi - lo) / 5.0);
  }
  std::vector<double> fare_edges;
  if (options.fare_edges) {
    fare_edges = *options.fare_edges;
  } else {
    std::vector<double> sorted;
    for (const auto& p : passengers) sorted.push_back(*p.fare);
    std::sort(sorted.begin(), sorted.end());
    for (double q : {0.25, 0.5, 0.75}) fare_edges.push_back(quantile(sorted, q));
  }
  if (age_edges.size() != 4 || !std::is_sorted(age_edges.begin(), age_edges.end())) {
    throw InvalidInputError("age bin edges must be 4 ascending values");
  }
  if (fare_edges.size() != 3 || !std::is_sorted(fare_edges.begin(), fare_edges.end())) {
    throw InvalidInputError("fare bin edges must be 3 ascending values");
  }

  Dataset data;
  data.feature_names = titanic_feature_names();
  data.features.resize(passengers.size(), data.feature_names.size());
  data.targets.reserve(passengers.size());
  for (std::size_t i = 0; i < passengers.size(); ++i) {
    const auto& p = passengers[i];
    data.features(i, 0) = bin_of(*p.age, age_edges);
    data.features(i, 1) = p.female ? 1.0 : 0.0;
    data.features(i, 2) = p.pclass;
    data.features(i, 3) = bin_of(*p.fare, fare_edges);
    data.features(i, 4) = *p.embarked;
    data.features(i, 5) = p.title;
    data.features(i, 6) = p.sibsp + p.parch == 0 ? 1.0 : 0.0;
    data.targets.push_back(p.survived);
  }
  data.provenance = "titanic";
  return data;
}

Dataset load_titanic(const std::filesystem::path& csv_path, const TitanicOptions& options) {
  std::ifstream in(csv_path);
  if (!in) throw InvalidInputError("cannot open " + csv_path.string());
  Dataset data = load_titanic(in, options);
  data.provenance = "titanic:" + csv_path.filename().string();
  return data;
}

}  // namespace relu_prism
