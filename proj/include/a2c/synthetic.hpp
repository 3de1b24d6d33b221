#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "a2c/data.hpp"

namespace a2c {

/// Isotropic Gaussian clusters. Class i is centered at (separation / sqrt 2) * e_i
/// times sigma, so every pair of centers is `separation` sigmas apart.
struct GaussianSpec {
    std::size_t classes = 2;
    std::size_t per_class = 100;
    std::size_t dimension = 2;
    double separation = 6.0;
    double sigma = 1.0;
    std::uint64_t seed = 1;
    std::string prefix = "c";
};

/// Class names are prefix + index; sample ids run 0..n-1 in class-major order.
Dataset make_gaussian_dataset(const GaussianSpec& spec);

/// Writes a dataset in the generic CSV layout (`label` column last).
void write_generic_csv(const Dataset& dataset, std::ostream& out);

/// Label counts of the public 10% KDD Cup 99 training file.
const std::vector<std::pair<std::string, std::size_t>>& kdd_ten_percent_counts();

struct KddSynthOptions {
    double scale = 0.02;
    std::size_t min_per_class = 8;
    std::uint64_t seed = 7;
};

/// KDD-format rows (41 fields plus a dotted label) with every class of the
/// 10% file at round(scale * count) rows, at least min_per_class. Each class
/// has its own protocol/service/flag profile and numeric means.
void write_synthetic_kdd(std::ostream& out, const KddSynthOptions& options);

}  // namespace a2c
