#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include <unistd.h>

#include "a2c/data.hpp"
#include "a2c/rng.hpp"
#include "a2c/synthetic.hpp"

namespace a2c::testing {

/// Gaussian classes c0..c{n-1} assigned to A/B/C in index order.
inline DatasetPartition gaussian_partition(std::size_t n_a, std::size_t n_b, std::size_t n_c, std::size_t per_class,
                                           double separation, std::uint64_t seed = 11, double split_ratio = 0.8,
                                           std::size_t dimension = 0) {
    GaussianSpec spec;
    spec.classes = n_a + n_b + n_c;
    spec.per_class = per_class;
    spec.dimension = dimension ? dimension : spec.classes;
    spec.separation = separation;
    spec.seed = seed;
    auto ds = std::make_shared<const Dataset>(make_gaussian_dataset(spec));
    ClassAssignment as;
    for (std::size_t i = 0; i < spec.classes; ++i) {
        auto name = "c" + std::to_string(i);
        (i < n_a ? as.a : i < n_a + n_b ? as.b : as.c).push_back(name);
    }
    PartitionOptions opt;
    opt.seed = seed;
    return split_known(partition_dataset(ds, as, opt), split_ratio, seed);
}

inline std::vector<double> random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = scale * standard_normal(rng);
    return v;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("a2c-test-" + name + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace a2c::testing
