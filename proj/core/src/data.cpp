#include "gig/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "gig/csv.hpp"
#include "gig/errors.hpp"

namespace gig {

Dataset make_moons(std::size_t n, double noise_sigma, std::uint64_t seed) {
  if (n < 2) throw ArgumentError("make_moons needs n >= 2");
  if (!(noise_sigma >= 0.0)) throw ArgumentError("noise sigma must be >= 0");
  const std::size_t n_upper = (n + 1) / 2;
  const std::size_t n_lower = n / 2;

  Dataset ds;
  ds.noise_sigma = noise_sigma;
  ds.seed = seed;
  ds.points.reserve(n);
  ds.labels.reserve(n);
  auto angle = [](std::size_t i, std::size_t count) {
    return count == 1 ? 0.0
                      : std::numbers::pi * static_cast<double>(i) / static_cast<double>(count - 1);
  };
  for (std::size_t i = 0; i < n_upper; ++i) {
    const double t = angle(i, n_upper);
    ds.points.push_back({std::cos(t), std::sin(t)});
    ds.labels.push_back(1);
  }
  for (std::size_t i = 0; i < n_lower; ++i) {
    const double t = angle(i, n_lower);
    ds.points.push_back({1.0 - std::cos(t), 0.5 - std::sin(t)});
    ds.labels.push_back(0);
  }
  if (noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (Vec& p : ds.points) {
      p[0] += noise(rng);
      p[1] += noise(rng);
    }
  }
  return ds;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ArgumentError("train fraction must lie in (0, 1)");
  }
  const auto n_train =
      static_cast<std::size_t>(std::floor(static_cast<double>(ds.size()) * train_fraction));
  if (n_train == 0 || n_train >= ds.size()) {
    throw ArgumentError("split would leave one side empty");
  }
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  Dataset train, test;
  for (Dataset* part : {&train, &test}) {
    part->noise_sigma = ds.noise_sigma;
    part->seed = ds.seed;
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    Dataset& dst = i < n_train ? train : test;
    dst.points.push_back(ds.points[order[i]]);
    dst.labels.push_back(ds.labels[order[i]]);
  }
  return {std::move(train), std::move(test)};
}

void write_dataset_csv(const Dataset& ds, const std::filesystem::path& file) {
  CsvWriter csv(file, "x0,x1,label");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.points[i].size() != 2) throw ShapeError("dataset CSV holds 2-D points only");
    csv.field(ds.points[i][0]).field(ds.points[i][1]).field(ds.labels[i]);
    csv.end_row();
  }
}

Dataset read_dataset_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open dataset " + file.string());
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"x0", "x1", "label"}) {
    throw FormatError("dataset CSV must start with header x0,x1,label");
  }
  Dataset ds;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) throw FormatError("row " + std::to_string(row) + " needs 3 fields");
    try {
      ds.points.push_back({std::stod(fields[0]), std::stod(fields[1])});
      ds.labels.push_back(std::stoi(fields[2]));
    } catch (const std::exception&) {
      throw FormatError("row " + std::to_string(row) + " is not numeric");
    }
  }
  return ds;
}

}  // namespace gig
