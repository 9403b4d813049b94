#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sxai/audit.hpp"
#include "sxai/demo.hpp"
#include "sxai/domain.hpp"
#include "sxai/errors.hpp"
#include "sxai/manifest.hpp"
#include "sxai/mi.hpp"
#include "sxai/posthoc.hpp"
#include "sxai/relatedness.hpp"
#include "sxai/tensor.hpp"
#include "sxai/uncertainty.hpp"

namespace py = pybind11;

namespace {

std::vector<double> as_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    return {a.data(), a.data() + a.size()};
}

py::dict mi_to_dict(const sxai::MiEstimate& e) {
    py::dict d;
    d["value"] = e.value;
    d["raw_value"] = e.raw_value;
    d["estimator"] = sxai::to_string(e.estimator);
    d["correction"] = sxai::to_string(e.correction);
    d["n"] = e.n;
    d["degenerate"] = e.degenerate;
    d["near_deterministic"] = e.near_deterministic;
    d["bins_x"] = e.bins_x;
    d["bins_y"] = e.bins_y;
    d["bandwidth_x"] = e.bandwidth_x;
    d["bandwidth_y"] = e.bandwidth_y;
    return d;
}

sxai::MiConfig make_config(const std::string& estimator, std::size_t bins,
                           const std::string& correction) {
    sxai::MiConfig cfg;
    cfg.estimator = estimator == "kde" ? sxai::MiEstimator::Kde : sxai::MiEstimator::Hist;
    cfg.bins = bins;
    cfg.correction =
        correction == "mm" ? sxai::MiCorrection::MillerMadow : sxai::MiCorrection::None;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_sxai, m) {
    m.doc() = "Audit toolkit for self-explaining models: relatedness, "
              "applicability domain, MC-dropout uncertainty, surrogate fidelity.";

    py::register_exception<sxai::Error>(m, "SxaiError");

    m.def(
        "mi_histogram",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> x,
           py::array_t<double, py::array::c_style | py::array::forcecast> y, std::size_t bins,
           const std::string& correction) {
            return mi_to_dict(sxai::mi_histogram(as_vector(x), as_vector(y),
                                                 make_config("hist", bins, correction)));
        },
        py::arg("x"), py::arg("y"), py::arg("bins") = 0, py::arg("correction") = "none");

    m.def(
        "mi_kde",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> x,
           py::array_t<double, py::array::c_style | py::array::forcecast> y) {
            return mi_to_dict(sxai::mi_kde(as_vector(x), as_vector(y)));
        },
        py::arg("x"), py::arg("y"));

    m.def(
        "mi_mixed",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> x,
           const std::vector<int>& labels, const std::string& estimator, std::size_t bins) {
            return mi_to_dict(
                sxai::mi_mixed(as_vector(x), labels, make_config(estimator, bins, "none")));
        },
        py::arg("x"), py::arg("labels"), py::arg("estimator") = "hist", py::arg("bins") = 0);

    m.def("mi_correlation", &sxai::mi_correlation, py::arg("mi"));
    m.def("entropy_discrete",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> p) {
              return sxai::entropy_discrete(as_vector(p));
          });

    m.def(
        "relatedness",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> latents,
           const std::vector<int>& decision,
           py::array_t<double, py::array::c_style | py::array::forcecast> attributes) {
            if (latents.ndim() != 2 || attributes.ndim() != 2)
                throw sxai::shape_mismatch("latents and attributes must be 2-D");
            auto m_units = static_cast<std::size_t>(latents.shape(1));
            auto k = static_cast<std::size_t>(attributes.shape(1));
            sxai::RelatednessReport rep = sxai::relatedness_report(
                as_vector(latents), m_units, decision, as_vector(attributes), k);
            py::dict d;
            py::list attrs;
            for (const auto& a : rep.attributes) {
                py::dict e;
                e["index"] = a.index;
                e["name"] = a.name;
                e["score"] = a.score;
                e["normalized"] = a.normalized;
                attrs.append(e);
            }
            d["attributes"] = attrs;
            d["ranking"] = rep.ranking;
            return d;
        },
        py::arg("latents"), py::arg("decision"), py::arg("attributes"));

    py::class_<sxai::DomainVerdict>(m, "DomainVerdict")
        .def_readonly("in_hull", &sxai::DomainVerdict::in_hull)
        .def_readonly("knn_distance", &sxai::DomainVerdict::knn_distance)
        .def_readonly("knn_exceeded", &sxai::DomainVerdict::knn_exceeded)
        .def_readonly("leverage", &sxai::DomainVerdict::leverage)
        .def_readonly("leverage_exceeded", &sxai::DomainVerdict::leverage_exceeded)
        .def_property_readonly("level", [](const sxai::DomainVerdict& v) {
            return sxai::to_string(v.level);
        });

    py::class_<sxai::DomainModel>(m, "DomainModel")
        .def_static(
            "fit",
            [](py::array_t<double, py::array::c_style | py::array::forcecast> X,
               double variance_target, std::size_t max_dims, std::size_t knn_k) {
                if (X.ndim() != 2) throw sxai::shape_mismatch("X must be 2-D");
                sxai::DomainConfig cfg;
                cfg.variance_target = variance_target;
                cfg.max_dims = max_dims;
                cfg.knn_k = knn_k;
                return sxai::fit_domain_model(as_vector(X),
                                              static_cast<std::size_t>(X.shape(0)),
                                              static_cast<std::size_t>(X.shape(1)), cfg);
            },
            py::arg("X"), py::arg("variance_target") = 0.95, py::arg("max_dims") = 10,
            py::arg("knn_k") = 5)
        .def("check",
             [](const sxai::DomainModel& model,
                py::array_t<double, py::array::c_style | py::array::forcecast> q) {
                 return model.check(as_vector(q));
             })
        .def("save",
             [](const sxai::DomainModel& model, const std::string& path) {
                 sxai::save_domain_model(path, model);
             },
             py::arg("path"))
        .def_static("load", &sxai::load_domain_model, py::arg("path"))
        .def_property_readonly("d_reduced",
                               [](const sxai::DomainModel& m_) { return m_.pca.d_reduced; })
        .def_readonly("knn_threshold", &sxai::DomainModel::knn_thresh)
        .def_readonly("leverage_threshold", &sxai::DomainModel::leverage_thresh);

    m.def(
        "aggregate_classification",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> samples) {
            if (samples.ndim() != 2) throw sxai::shape_mismatch("samples must be T x C");
            sxai::UncertaintySummary s = sxai::aggregate_classification(
                as_vector(samples), static_cast<std::size_t>(samples.shape(0)),
                static_cast<std::size_t>(samples.shape(1)));
            py::dict d;
            d["predictive_mean"] = s.predictive_mean;
            d["predictive_entropy"] = s.predictive_entropy;
            d["expected_entropy"] = s.expected_entropy;
            d["epistemic"] = s.epistemic;
            d["class_variance"] = s.class_variance;
            d["passes"] = s.passes;
            return d;
        },
        py::arg("samples"));

    m.def(
        "aggregate_regression",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> samples) {
            sxai::RegressionSummary s = sxai::aggregate_regression(as_vector(samples));
            return py::make_tuple(s.mean, s.std_dev);
        },
        py::arg("samples"));

    m.def(
        "train_surrogate",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> attributes,
           const std::vector<int>& labels) {
            if (attributes.ndim() != 2) throw sxai::shape_mismatch("attributes must be N x K");
            auto k = static_cast<std::size_t>(attributes.shape(1));
            sxai::SurrogateModel model = sxai::train_surrogate(as_vector(attributes), k, labels);
            py::dict d;
            d["weights"] = model.weights;
            d["bias"] = model.bias;
            d["num_classes"] = model.num_classes;
            d["iterations"] = model.iterations;
            d["final_loss"] = model.final_loss;
            return d;
        },
        py::arg("attributes"), py::arg("labels"));

    m.def("fidelity_gap",
          [](double main_acc, double surrogate_acc, double threshold) {
              sxai::FidelityResult r = sxai::fidelity_gap(main_acc, surrogate_acc, threshold);
              return py::make_tuple(r.gap, r.tag);
          },
          py::arg("main_accuracy"), py::arg("surrogate_accuracy"), py::arg("threshold") = 0.02);

    m.def("demo_run", &sxai::demo_run, py::arg("seed"), py::arg("out_dir"),
          py::arg("mc_passes") = 30, "Generate, train and dump the synthetic demo pipeline.");
    m.def("gradient_check", &sxai::mlp_gradient_check_random, py::arg("seed") = 7,
          py::arg("eps") = 1e-4);

    m.def(
        "run_audit",
        [](const std::string& manifest_path) {
            sxai::AuditReport rep = sxai::run_audit(manifest_path);
            return py::make_tuple(sxai::to_string(rep.light),
                                  sxai::report_to_canonical_json(rep));
        },
        py::arg("manifest_path"),
        "Returns (warning_light, canonical_report_json).");

    m.def("read_tensor", [](const std::string& path) {
        sxai::TensorFile t = sxai::read_tensor(path);
        std::vector<py::ssize_t> shape(t.dims.begin(), t.dims.end());
        py::array_t<float> out(shape);
        std::copy(t.payload.begin(), t.payload.end(), out.mutable_data());
        return out;
    });
    m.def("write_tensor", [](const std::string& path,
                             py::array_t<float, py::array::c_style | py::array::forcecast> a) {
        std::vector<std::uint64_t> dims(a.shape(), a.shape() + a.ndim());
        sxai::write_tensor(path,
                           sxai::make_tensor(dims, {a.data(), a.data() + a.size()}));
    });
}
