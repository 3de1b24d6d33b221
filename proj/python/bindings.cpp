#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "a2c/classifier.hpp"
#include "a2c/cli.hpp"
#include "a2c/coex.hpp"
#include "a2c/data.hpp"
#include "a2c/error.hpp"
#include "a2c/metrics.hpp"
#include "a2c/persistence.hpp"
#include "a2c/persona.hpp"
#include "a2c/rejector.hpp"
#include "a2c/synthetic.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

a2c::FeatureMatrix to_matrix(const Array& x) {
    if (x.ndim() != 2) throw py::value_error("expected a 2-D array");
    a2c::FeatureMatrix m;
    m.rows = static_cast<std::size_t>(x.shape(0));
    m.cols = static_cast<std::size_t>(x.shape(1));
    m.data.assign(x.data(), x.data() + m.rows * m.cols);
    return m;
}

Array to_array(const a2c::FeatureMatrix& m) {
    Array out({m.rows, m.cols});
    std::copy(m.data.begin(), m.data.end(), out.mutable_data());
    return out;
}

std::shared_ptr<const a2c::Dataset> share(a2c::Dataset ds) { return std::make_shared<const a2c::Dataset>(std::move(ds)); }

a2c::TriageOutcome parse_outcome(const std::string& s) {
    if (s == "normal") return a2c::TriageOutcome::Normal;
    if (s == "intrusion") return a2c::TriageOutcome::Intrusion;
    if (s == "caution") return a2c::TriageOutcome::Caution;
    throw py::value_error("outcome must be normal, intrusion or caution");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "a2c core: rejector, classifier, expert routing and collaborative exploration";
    m.attr("__version__") = A2C_VERSION;

    static py::exception<a2c::Error> error(m, "Error");
    py::register_exception<a2c::UsageError>(m, "UsageError", error.ptr());
    py::register_exception<a2c::CorruptionError>(m, "CorruptionError", error.ptr());
    py::register_exception<a2c::VersionError>(m, "VersionError", error.ptr());
    py::register_exception<a2c::InvariantError>(m, "InvariantError", error.ptr());

    py::class_<a2c::Dataset, std::shared_ptr<a2c::Dataset>>(m, "Dataset")
        .def("__len__", [](const a2c::Dataset& d) { return d.samples.size(); })
        .def_property_readonly("feature_names", [](const a2c::Dataset& d) { return d.feature_names; })
        .def_property_readonly("class_names", [](const a2c::Dataset& d) { return d.classes.names(); })
        .def("features", [](const a2c::Dataset& d) {
            std::vector<std::size_t> all(d.samples.size());
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
            return to_array(a2c::gather_features(d, all));
        })
        .def("labels", [](const a2c::Dataset& d) {
            std::vector<std::optional<a2c::ClassId>> out;
            for (const auto& s : d.samples) out.push_back(s.label);
            return out;
        });

    m.def("load_dataset", [](const std::filesystem::path& path, const std::string& format) {
        return std::make_shared<a2c::Dataset>(a2c::load_dataset(path, a2c::parse_dataset_format(format)));
    }, py::arg("path"), py::arg("format") = "kdd-csv");

    m.def("gaussian_dataset", [](std::size_t classes, std::size_t per_class, std::size_t dimension, double separation,
                                 std::uint64_t seed) {
        a2c::GaussianSpec spec{classes, per_class, dimension, separation, 1.0, seed, "c"};
        return std::make_shared<a2c::Dataset>(a2c::make_gaussian_dataset(spec));
    }, py::arg("classes"), py::arg("per_class"), py::arg("dimension"), py::arg("separation") = 6.0, py::arg("seed") = 1);

    py::class_<a2c::DatasetPartition>(m, "Partition")
        .def_property_readonly("d_a", &a2c::DatasetPartition::d_a)
        .def_property_readonly("d_b", &a2c::DatasetPartition::d_b)
        .def_property_readonly("d_c", &a2c::DatasetPartition::d_c)
        .def_readonly("a_train", &a2c::DatasetPartition::a_train)
        .def_readonly("a_test", &a2c::DatasetPartition::a_test)
        .def("manifest", &a2c::partition_manifest);

    m.def("partition", [](const std::shared_ptr<a2c::Dataset>& ds, std::vector<std::string> a, std::vector<std::string> b,
                          std::vector<std::string> c, std::uint64_t seed, double split_ratio, std::uint64_t split_seed) {
        a2c::PartitionOptions opt;
        opt.seed = seed;
        auto p = a2c::partition_dataset(ds, {std::move(a), std::move(b), std::move(c)}, opt);
        return a2c::split_known(std::move(p), split_ratio, split_seed);
    }, py::arg("dataset"), py::arg("a"), py::arg("b"), py::arg("c"), py::arg("seed") = 0, py::arg("split_ratio") = 0.8,
       py::arg("split_seed") = 0);

    py::class_<a2c::RejectorModel>(m, "RejectorModel")
        .def_property_readonly("kind", [](const a2c::RejectorModel& r) { return std::string(a2c::scorer_name(r.kind)); })
        .def_readonly("theta_r", &a2c::RejectorModel::theta_r)
        .def("calibrate", [](const a2c::RejectorModel& r, const Array& x, double q) {
            return a2c::calibrate_threshold(r, to_matrix(x), q);
        }, py::arg("x"), py::arg("q") = 0.05)
        .def("scores", [](const a2c::RejectorModel& r, const Array& x) { return a2c::acceptance_scores(r, to_matrix(x)); })
        .def("accept", [](const a2c::RejectorModel& r, const Array& x) {
            const auto mx = to_matrix(x);
            std::vector<bool> out;
            for (std::size_t i = 0; i < mx.rows; ++i) {
                out.push_back(a2c::reject_decide(r, mx.row(i)).value == a2c::RejectVerdict::Accept);
            }
            return out;
        });

    m.def("fit_rejector", [](const Array& x, const std::string& kind, std::size_t k, std::size_t components) {
        return a2c::fit_rejector(to_matrix(x), a2c::parse_scorer_kind(kind), {k, components});
    }, py::arg("x"), py::arg("kind") = "centroid", py::arg("k") = 5, py::arg("components") = 10);

    py::class_<a2c::ClassifierModel>(m, "ClassifierModel")
        .def_property_readonly("kind", [](const a2c::ClassifierModel& c) { return std::string(a2c::classifier_kind_name(c.kind)); })
        .def_property_readonly("loss_curve", [](const a2c::ClassifierModel& c) { return c.meta.loss_curve; })
        .def("predict_proba", [](const a2c::ClassifierModel& c, const Array& x) {
            const auto mx = to_matrix(x);
            a2c::FeatureMatrix out{mx.rows, c.num_classes(), {}};
            for (std::size_t i = 0; i < mx.rows; ++i) {
                const auto p = a2c::predict_proba(c, mx.row(i)).probs;
                out.data.insert(out.data.end(), p.begin(), p.end());
            }
            return to_array(out);
        });

    m.def("fit_classifier", [](const Array& x, const std::vector<std::size_t>& targets, std::size_t n_classes,
                               const std::string& kind, std::size_t epochs, double learning_rate, std::uint64_t seed,
                               std::size_t hidden) {
        std::vector<a2c::ClassLabel> classes;
        for (std::size_t k = 0; k < n_classes; ++k) classes.push_back({static_cast<a2c::ClassId>(k), std::to_string(k)});
        a2c::ClassifierConfig cfg{a2c::parse_classifier_kind(kind), epochs, learning_rate, seed, hidden};
        return a2c::fit_classifier(to_matrix(x), targets, classes, cfg);
    }, py::arg("x"), py::arg("targets"), py::arg("n_classes"), py::arg("kind") = "softmax-linear",
       py::arg("epochs") = 300, py::arg("learning_rate") = 0.5, py::arg("seed") = 0, py::arg("hidden") = 32);

    m.def("save_model", py::overload_cast<const a2c::RejectorModel&, const std::filesystem::path&>(&a2c::save_model));
    m.def("save_model", py::overload_cast<const a2c::ClassifierModel&, const std::filesystem::path&>(&a2c::save_model));
    m.def("load_model", [](const std::filesystem::path& path) -> py::object {
        auto model = a2c::load_model(path);
        if (auto* r = std::get_if<a2c::RejectorModel>(&model)) return py::cast(std::move(*r));
        return py::cast(std::get<a2c::ClassifierModel>(std::move(model)));
    });

    m.def("micro_f1", [](const std::vector<std::optional<a2c::ClassId>>& truth,
                         const std::vector<std::optional<a2c::ClassId>>& predicted) {
        if (truth.size() != predicted.size()) throw py::value_error("truth and predicted differ in length");
        std::vector<a2c::LabelPair> pairs;
        for (std::size_t i = 0; i < truth.size(); ++i) pairs.push_back({truth[i], predicted[i]});
        return a2c::micro_f1(pairs);
    });

    m.def("resolve_probability", [](const std::string& rate) { return a2c::resolve_probability(a2c::parse_rate_level(rate)); });

    m.def("expected_grid_oracle", [](double p_acc_a, double p_def_b, double p_def_c, double a_known, std::size_t n_a,
                                     std::size_t n_b, std::size_t n_c, int tier, const std::string& rate) {
        return a2c::expected_grid_oracle({p_acc_a, p_def_b, p_def_c, a_known}, {n_a, n_b, n_c}, tier,
                                         a2c::parse_rate_level(rate));
    }, py::arg("p_acc_A"), py::arg("p_def_B"), py::arg("p_def_C"), py::arg("a_known"), py::arg("n_a"), py::arg("n_b"),
       py::arg("n_c"), py::arg("tier"), py::arg("rate"));

    m.def("run_grid", [](const a2c::DatasetPartition& p, const a2c::RejectorModel& rejector,
                         const a2c::ClassifierModel& classifier, std::uint64_t seed, bool stratified) {
        a2c::PipelineComponents c{rejector, classifier, a2c::build_expert(1, p), {}};
        a2c::GridOptions opt;
        opt.seed = seed;
        opt.schedule = stratified ? a2c::DrawSchedule::Stratified : a2c::DrawSchedule::Stochastic;
        const auto g = a2c::run_grid(p, c, opt);
        py::dict cells;
        for (const auto& [key, cell] : g.cells) cells[py::make_tuple(key.first, a2c::rate_level_name(key.second))] = cell.micro_f1;
        py::dict rates;
        rates["p_acc_A"] = g.rates.p_acc_A;
        rates["p_def_B"] = g.rates.p_def_B;
        rates["p_def_C"] = g.rates.p_def_C;
        rates["a_known"] = g.rates.a_known;
        py::dict out;
        out["cells"] = cells;
        out["rates"] = rates;
        out["sizes"] = py::make_tuple(g.sizes.n_a, g.sizes.n_b, g.sizes.n_c);
        return out;
    }, py::arg("partition"), py::arg("rejector"), py::arg("classifier"), py::arg("seed") = 0, py::arg("stratified") = false);

    m.def("score_outcome", [](const std::string& outcome, const std::string& truth) {
        if (truth != "normal" && truth != "intrusion") throw py::value_error("truth must be normal or intrusion");
        return a2c::score_outcome(parse_outcome(outcome),
                                  truth == "normal" ? a2c::TriageTruth::Normal : a2c::TriageTruth::Intrusion);
    });
    m.def("coex_success_rate", [](const std::vector<double>& scores) { return a2c::coex_success_rate(scores); });

    m.def("run_belief_loop", [](std::size_t candidates, const std::vector<std::pair<std::vector<double>, std::vector<double>>>& evidence,
                                double tau) {
        std::vector<a2c::ClassId> ids;
        for (std::size_t k = 0; k < candidates; ++k) ids.push_back(static_cast<a2c::ClassId>(k));
        std::vector<a2c::Evidence> ev;
        for (std::size_t i = 0; i < evidence.size(); ++i) ev.push_back({"e" + std::to_string(i), evidence[i].first, evidence[i].second});
        const auto r = a2c::run_belief_loop(a2c::uniform_beliefs(ids), ev, tau);
        py::dict out;
        out["label"] = r.label;
        out["consensus"] = r.consensus;
        out["iterations"] = r.iterations;
        out["expert"] = r.final_state.expert;
        out["collaborator"] = r.final_state.collaborator;
        return out;
    }, py::arg("candidates"), py::arg("evidence"), py::arg("tau") = 0.9);

    m.def("run_command", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = a2c::execute_command(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
    });
}
