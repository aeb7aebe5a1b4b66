// Python bindings for the evaluation core: geometry, metric summaries,
// average precision, and the two attribution metrics.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "xdeval/average_precision.hpp"
#include "xdeval/errors.hpp"
#include "xdeval/geometry.hpp"
#include "xdeval/localization.hpp"
#include "xdeval/mask.hpp"
#include "xdeval/summary.hpp"
#include "xdeval/version.hpp"

namespace py = pybind11;
using namespace xdeval;

namespace {

Grid grid_from_array(const py::array_t<double, py::array::c_style |
                                                   py::array::forcecast>& arr) {
  if (arr.ndim() != 2) {
    throw ValidationError("expected a 2-D array of attribution values");
  }
  const auto h = static_cast<std::size_t>(arr.shape(0));
  const auto w = static_cast<std::size_t>(arr.shape(1));
  std::vector<double> values(arr.data(), arr.data() + h * w);
  return Grid(w, h, values);
}

py::array_t<double> grid_to_array(const Grid& grid) {
  py::array_t<double> out({grid.height(), grid.width()});
  std::copy(grid.values().begin(), grid.values().end(), out.mutable_data());
  return out;
}

py::array_t<bool> mask_to_array(const BinaryMask& mask) {
  py::array_t<bool> out({mask.height(), mask.width()});
  bool* ptr = out.mutable_data();
  for (std::size_t r = 0; r < mask.height(); ++r) {
    for (std::size_t c = 0; c < mask.width(); ++c) {
      ptr[r * mask.width() + c] = mask.at(r, c);
    }
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_xdeval, m) {
  m.doc() = "Evaluation core for explainable object detection";
  m.attr("__version__") = kVersion;

  // Typed exceptions surface as distinct Python error classes mirroring the
  // C++ hierarchy: validation problems under ValueError, undefined metrics
  // under their own root.
  const py::object validation = py::register_exception<ValidationError>(
      m, "ValidationError", PyExc_ValueError);
  py::register_exception<ShapeMismatch>(m, "ShapeMismatch", validation.ptr());
  py::register_exception<EmptySample>(m, "EmptySample", validation.ptr());
  py::register_exception<BadK>(m, "BadK", validation.ptr());
  const py::object undefined = py::register_exception<UndefinedMetric>(
      m, "UndefinedMetric", PyExc_ArithmeticError);
  py::register_exception<NotEvaluable>(m, "NotEvaluable", undefined.ptr());
  py::register_exception<NoGroundTruth>(m, "NoGroundTruth", undefined.ptr());
  py::register_exception<NoPositiveRelevance>(m, "NoPositiveRelevance",
                                              undefined.ptr());

  py::class_<Box>(m, "Box")
      .def(py::init<double, double, double, double>(), py::arg("x_min"),
           py::arg("y_min"), py::arg("width"), py::arg("height"))
      .def_property_readonly("x_min", &Box::x_min)
      .def_property_readonly("y_min", &Box::y_min)
      .def_property_readonly("x_max", &Box::x_max)
      .def_property_readonly("y_max", &Box::y_max)
      .def_property_readonly("width", &Box::width)
      .def_property_readonly("height", &Box::height)
      .def_property_readonly("area", &Box::area)
      .def("__repr__", [](const Box& b) {
        return "Box(x_min=" + std::to_string(b.x_min()) +
               ", y_min=" + std::to_string(b.y_min()) +
               ", width=" + std::to_string(b.width()) +
               ", height=" + std::to_string(b.height()) + ")";
      });

  py::class_<Detection>(m, "Detection")
      .def(py::init([](std::int64_t image_id, int category_id, const Box& box,
                       double score) {
             return Detection{image_id, category_id, box, score};
           }),
           py::arg("image_id"), py::arg("category_id"), py::arg("box"),
           py::arg("score"))
      .def_readwrite("image_id", &Detection::image_id)
      .def_readwrite("category_id", &Detection::category_id)
      .def_readwrite("box", &Detection::box)
      .def_readwrite("score", &Detection::score);

  py::class_<GroundTruth>(m, "GroundTruth")
      .def(py::init([](std::int64_t image_id, int category_id, const Box& box) {
             return GroundTruth{image_id, category_id, box};
           }),
           py::arg("image_id"), py::arg("category_id"), py::arg("box"))
      .def_readwrite("image_id", &GroundTruth::image_id)
      .def_readwrite("category_id", &GroundTruth::category_id)
      .def_readwrite("box", &GroundTruth::box);

  m.def("iou", &iou, py::arg("a"), py::arg("b"),
        "Intersection over union of two boxes");
  m.def(
      "rasterize",
      [](const Box& box, std::size_t width, std::size_t height) {
        return mask_to_array(rasterize(box, width, height));
      },
      py::arg("box"), py::arg("width"), py::arg("height"),
      "Pixel-center rasterization of a box onto a width x height canvas");

  py::class_<MetricSummary>(m, "MetricSummary")
      .def_readonly("mean", &MetricSummary::mean)
      .def_readonly("variance", &MetricSummary::variance)
      .def_readonly("std", &MetricSummary::std)
      .def_readonly("count", &MetricSummary::count);
  m.def(
      "summarize",
      [](const std::vector<double>& values) { return summarize(values); },
      py::arg("values"), "Mean, population variance, and standard deviation");

  py::class_<ApConfig>(m, "ApConfig")
      .def(py::init<>())
      .def_readwrite("iou_thresholds", &ApConfig::iou_thresholds)
      .def_readwrite("recall_samples", &ApConfig::recall_samples)
      .def_readwrite("max_detections_per_image",
                     &ApConfig::max_detections_per_image);

  py::class_<ApReport>(m, "ApReport")
      .def_readonly("class_ids", &ApReport::class_ids)
      .def_readonly("cap", &ApReport::cap)
      .def_readonly("class_ap", &ApReport::class_ap)
      .def_readonly("mean_ap", &ApReport::mean_ap)
      .def_readonly("classes_evaluated", &ApReport::classes_evaluated);

  m.def(
      "mean_ap",
      [](const std::vector<Detection>& dets,
         const std::vector<GroundTruth>& gts, const ApConfig& config) {
        return mean_ap(dets, gts, config);
      },
      py::arg("detections"), py::arg("ground_truths"),
      py::arg("config") = ApConfig(),
      "COCO-style mean average precision over classes and IoU thresholds");

  py::class_<AlResult>(m, "AlResult")
      .def_readonly("r_box", &AlResult::r_box)
      .def_readonly("r_tot", &AlResult::r_tot)
      .def_readonly("value", &AlResult::value);
  py::class_<TkiResult>(m, "TkiResult")
      .def_readonly("k", &TkiResult::k)
      .def_readonly("intersection_count", &TkiResult::intersection_count)
      .def_readonly("value", &TkiResult::value);

  m.def(
      "attribution_localization",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>&
             values,
         const Box& box) {
        const Grid grid = grid_from_array(values);
        return attribution_localization(
            grid, rasterize(box, grid.width(), grid.height()));
      },
      py::arg("attribution"), py::arg("box"),
      "Share of positive relevance inside the box");

  m.def(
      "topk_intersection",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>&
             values,
         const Box& box, std::size_t k) {
        const Grid grid = grid_from_array(values);
        return topk_intersection(grid,
                                 rasterize(box, grid.width(), grid.height()),
                                 k);
      },
      py::arg("attribution"), py::arg("box"), py::arg("k"),
      "Fraction of the k strongest attribution pixels inside the box");

  m.def(
      "topk_mask",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>&
             values,
         std::size_t k) {
        return mask_to_array(topk_mask(grid_from_array(values), k));
      },
      py::arg("attribution"), py::arg("k"),
      "Boolean mask of the k strongest attribution pixels");

  m.def(
      "grid_roundtrip",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>&
             values) { return grid_to_array(grid_from_array(values)); },
      py::arg("values"),
      "Validate a 2-D attribution array and return it as a fresh copy");
}
