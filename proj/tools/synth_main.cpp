// Writes synthetic datasets: KDD-format rows or Gaussian clusters as generic CSV.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "a2c/error.hpp"
#include "a2c/synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"a2c-synth: synthetic datasets for a2c experiments", "a2c-synth"};
    app.require_subcommand(1);
    std::string out;

    a2c::KddSynthOptions kdd;
    auto* k = app.add_subcommand("kdd", "KDD Cup 99 format with the 10% file's class mix");
    k->add_option("--out", out, "output file")->required();
    k->add_option("--scale", kdd.scale, "fraction of the 10% file's per-class counts");
    k->add_option("--min-per-class", kdd.min_per_class);
    k->add_option("--seed", kdd.seed);

    a2c::GaussianSpec g;
    auto* gs = app.add_subcommand("gaussian", "isotropic Gaussian clusters, generic CSV");
    gs->add_option("--out", out, "output file")->required();
    gs->add_option("--classes", g.classes);
    gs->add_option("--per-class", g.per_class);
    gs->add_option("--dimension", g.dimension);
    gs->add_option("--separation", g.separation, "center distance in sigmas");
    gs->add_option("--seed", g.seed);

    CLI11_PARSE(app, argc, argv);
    try {
        std::ofstream os(out, std::ios::binary);
        if (!os) throw a2c::Error("synthetic", "cannot write " + out);
        if (k->parsed()) {
            a2c::write_synthetic_kdd(os, kdd);
        } else {
            a2c::write_generic_csv(a2c::make_gaussian_dataset(g), os);
        }
    } catch (const a2c::UsageError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
