#include "seisnoise/arima.hpp"
#include "seisnoise/errors.hpp"
#include "seisnoise/garch.hpp"
#include "seisnoise/io.hpp"
#include "seisnoise/nonlinearity.hpp"
#include "seisnoise/pipeline.hpp"
#include "seisnoise/series.hpp"
#include "seisnoise/stat_tests.hpp"
#include "seisnoise/synth.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace seisnoise;

namespace {

using Arr = py::array_t<double, py::array::c_style | py::array::forcecast>;

Series to_series(const Arr& values, double rate) {
    if (values.ndim() != 1) throw ArgumentError("expected a one-dimensional array");
    return Series(std::vector<double>(values.data(), values.data() + values.size()), rate);
}

py::array_t<double> to_array(const Series& s) { return py::array_t<double>(s.size(), s.data().data()); }

PipelineConfig make_config(const std::string& config_text, std::optional<std::uint64_t> seed) {
    auto cfg = parse_pipeline_config(config_text);
    if (seed) cfg.seed = *seed;
    cfg.validate();
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Seismic noise characterization: unit-root, heteroskedasticity, nonlinearity, ARIMA and GARCH.";

    py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<DegenerateInputError>(m, "DegenerateInputError", PyExc_ValueError);
    py::register_exception<EstimationError>(m, "EstimationError", PyExc_RuntimeError);
    py::register_exception<FetchError>(m, "FetchError", PyExc_RuntimeError);

    py::class_<TestOutcome>(m, "TestOutcome")
        .def_readonly("name", &TestOutcome::name)
        .def_readonly("statistic", &TestOutcome::statistic)
        .def_readonly("p_value", &TestOutcome::p_value)
        .def_readonly("critical_lower", &TestOutcome::critical_lower)
        .def_readonly("critical_upper", &TestOutcome::critical_upper)
        .def_property_readonly("tail", [](const TestOutcome& t) { return to_string(t.tail); })
        .def_readonly("reject_null", &TestOutcome::reject_null)
        .def_readonly("alpha", &TestOutcome::alpha)
        .def_readonly("details", &TestOutcome::details)
        .def("__repr__", [](const TestOutcome& t) {
            return "<TestOutcome " + t.name + " statistic=" + std::to_string(t.statistic) +
                   " reject=" + (t.reject_null ? "True" : "False") + ">";
        });

    py::class_<PsrOutcome>(m, "PsrOutcome")
        .def_readonly("t", &PsrOutcome::t_component)
        .def_readonly("ir", &PsrOutcome::ir_component)
        .def_readonly("tir", &PsrOutcome::tir_component)
        .def_readonly("n_time_blocks", &PsrOutcome::n_time_blocks)
        .def_readonly("n_freq_points", &PsrOutcome::n_freq_points)
        .def_property_readonly("reject_null", &PsrOutcome::reject_null);

    py::class_<ArimaModel>(m, "ArimaModel")
        .def_readonly("p", &ArimaModel::p)
        .def_readonly("d", &ArimaModel::d)
        .def_readonly("m", &ArimaModel::m)
        .def_readonly("ar", &ArimaModel::ar)
        .def_readonly("ar_se", &ArimaModel::ar_se)
        .def_readonly("ma", &ArimaModel::ma)
        .def_readonly("ma_se", &ArimaModel::ma_se)
        .def_readonly("mean", &ArimaModel::mean)
        .def_readonly("innovation_variance", &ArimaModel::innovation_variance)
        .def_readonly("log_likelihood", &ArimaModel::log_likelihood)
        .def_readonly("aic", &ArimaModel::aic)
        .def_readonly("bic", &ArimaModel::bic)
        .def("__str__", &ArimaModel::order_string);

    py::class_<GarchModel>(m, "GarchModel")
        .def_readonly("P", &GarchModel::P)
        .def_readonly("Q", &GarchModel::Q)
        .def_readonly("c0", &GarchModel::c0)
        .def_readonly("c0_se", &GarchModel::c0_se)
        .def_readonly("arch", &GarchModel::arch)
        .def_readonly("arch_se", &GarchModel::arch_se)
        .def_readonly("garch", &GarchModel::garch)
        .def_readonly("garch_se", &GarchModel::garch_se)
        .def_readonly("log_likelihood", &GarchModel::log_likelihood)
        .def_readonly("aic", &GarchModel::aic)
        .def_property_readonly("persistence", &GarchModel::persistence)
        .def("__str__", &GarchModel::order_string);

    m.def("adf_test", [](const Arr& x, double alpha) { return adf_test(to_series(x, 1.0), {}, alpha); },
          py::arg("x"), py::arg("alpha") = 0.05);
    m.def("pp_test", [](const Arr& x, double alpha) { return pp_test(to_series(x, 1.0), {}, alpha); },
          py::arg("x"), py::arg("alpha") = 0.05);
    m.def("shapiro_wilk", [](const Arr& x, double alpha) { return shapiro_wilk(to_series(x, 1.0), alpha); },
          py::arg("x"), py::arg("alpha") = 0.05);
    m.def("arch_lm_test",
          [](const Arr& x, int lags, double alpha) { return arch_lm_test(to_series(x, 1.0), lags, alpha); },
          py::arg("x"), py::arg("lags") = 1, py::arg("alpha") = 0.05);
    m.def("psr_test", [](const Arr& x, double alpha) { return psr_test(to_series(x, 1.0), alpha); },
          py::arg("x"), py::arg("alpha") = 0.05);
    m.def("whiteness_test",
          [](const Arr& x, int max_lag, double alpha) {
              return whiteness_test(to_series(x, 1.0), max_lag, alpha);
          },
          py::arg("x"), py::arg("max_lag"), py::arg("alpha") = 0.05);

    m.def("determine_d",
          [](const Arr& x, double alpha, int d_max) {
              const auto r = determine_d(to_series(x, 1.0), alpha, d_max);
              return py::make_tuple(r.d, r.still_integrating);
          },
          py::arg("x"), py::arg("alpha") = 0.05, py::arg("d_max") = 3,
          "Order of integration as (d, still_integrating).");
    m.def("fit_arima",
          [](const Arr& x, int p, int d, int q) { return fit_arima(to_series(x, 1.0), p, d, q).model; },
          py::arg("x"), py::arg("p"), py::arg("d"), py::arg("m"));
    m.def("fit_garch",
          [](const Arr& x, int P, int Q) {
              const auto fit = fit_garch(to_series(x, 1.0), P, Q);
              return py::make_tuple(fit.model, to_array(fit.standardized));
          },
          py::arg("x"), py::arg("P") = 1, py::arg("Q") = 1, "Returns (model, standardized residuals).");

    m.def("correlation_dimension",
          [](const Arr& x, int dimension, std::optional<int> delay, std::optional<int> theiler) {
              EmbeddingConfig cfg;
              cfg.dimension = dimension;
              cfg.delay = delay;
              cfg.theiler_window = theiler;
              return correlation_dimension(to_series(x, 1.0), cfg).d2;
          },
          py::arg("x"), py::arg("dimension") = 5, py::arg("delay") = 1, py::arg("theiler_window") = py::none());
    m.def("aaft_surrogate",
          [](const Arr& x, std::uint64_t seed) { return to_array(aaft_surrogate(to_series(x, 1.0), seed)); },
          py::arg("x"), py::arg("seed") = 0);
    m.def("ft_surrogate",
          [](const Arr& x, std::uint64_t seed) { return to_array(ft_surrogate(to_series(x, 1.0), seed)); },
          py::arg("x"), py::arg("seed") = 0);

    m.def("simulate",
          [](const std::string& spec_text) {
              const auto s = generate(parse_process_spec(spec_text));
              return py::make_tuple(to_array(s), s.sample_rate());
          },
          py::arg("spec"), "Generate a process from key = value spec text; returns (values, sample_rate).");

    m.def("characterize_json",
          [](const Arr& x, double sample_rate, const std::string& config, std::optional<std::uint64_t> seed) {
              const auto s = to_series(x, sample_rate);
              const auto cfg = make_config(config, seed);
              py::gil_scoped_release release;
              return report_to_json(characterize(s, cfg));
          },
          py::arg("x"), py::arg("sample_rate") = 1.0, py::arg("config") = "", py::arg("seed") = py::none());
}
