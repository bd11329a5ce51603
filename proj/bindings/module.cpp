// Python bindings for the surveillance pipeline core. Exposes the frame
// model, the detectors, the wire formats, and a one-call pipeline runner.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <memory>
#include <stdexcept>

#include "vigil/bgsub.hpp"
#include "vigil/chunk.hpp"
#include "vigil/config.hpp"
#include "vigil/errors.hpp"
#include "vigil/haar.hpp"
#include "vigil/hog.hpp"
#include "vigil/model.hpp"
#include "vigil/netpbm.hpp"
#include "vigil/nms.hpp"
#include "vigil/pipeline.hpp"
#include "vigil/runtime.hpp"
#include "vigil/sink.hpp"

namespace py = pybind11;
using namespace vigil;

namespace {

py::bytes pixels_bytes(const Frame& f) {
  return py::bytes(reinterpret_cast<const char*>(f.pixels.data()), f.pixels.size());
}

void set_pixels(Frame& f, py::bytes data) {
  std::string raw = data;
  f.pixels.assign(raw.begin(), raw.end());
}

py::dict report_to_dict(const runtime::RunReport& r) {
  py::dict d;
  d["sourceEmissions"] = r.source_emissions;
  d["completedRoots"] = r.completed_roots;
  d["replayCount"] = r.replay_count;
  d["failedRoots"] = r.failed_roots;
  d["decodeErrors"] = r.decode_errors;
  d["droppedTuples"] = r.dropped_tuples;
  d["boltErrors"] = r.bolt_errors;
  d["orphanAcks"] = r.orphan_acks;
  d["wallTimeS"] = r.wall_time_s;
  py::dict processed;
  for (const auto& [node, count] : r.processed) processed[py::str(node)] = count;
  d["processed"] = processed;
  py::dict emitted;
  for (const auto& [node, count] : r.emitted) emitted[py::str(node)] = count;
  d["emitted"] = emitted;
  return d;
}

py::dict run_pipeline(const std::string& config_json) {
  auto cfg = config::parse_config(config_json);
  auto settings = config::to_settings(cfg);
  auto topo = pipeline::build_surveillance_topology(settings);
  runtime::RunReport report;
  {
    py::gil_scoped_release release;
    report = topo.run();
  }
  return report_to_dict(report);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Storage-efficient video surveillance pipeline core";

  py::register_exception<Error>(m, "VigilError");

  py::class_<Rect>(m, "Rect")
      .def(py::init<>())
      .def(py::init([](uint32_t x, uint32_t y, uint32_t w, uint32_t h) {
             return Rect{x, y, w, h};
           }),
           py::arg("x"), py::arg("y"), py::arg("w"), py::arg("h"))
      .def_readwrite("x", &Rect::x)
      .def_readwrite("y", &Rect::y)
      .def_readwrite("w", &Rect::w)
      .def_readwrite("h", &Rect::h)
      .def("area", &Rect::area)
      .def("__eq__", [](const Rect& a, const Rect& b) { return a == b; })
      .def("__repr__", [](const Rect& r) {
        return "Rect(x=" + std::to_string(r.x) + ", y=" + std::to_string(r.y) +
               ", w=" + std::to_string(r.w) + ", h=" + std::to_string(r.h) + ")";
      });

  py::class_<Descriptor>(m, "Descriptor")
      .def(py::init<>())
      .def_readwrite("bbox", &Descriptor::bbox)
      .def_readwrite("label", &Descriptor::label)
      .def_readwrite("confidence", &Descriptor::confidence)
      .def("__repr__", [](const Descriptor& d) {
        return "Descriptor(label='" + d.label + "', confidence=" + std::to_string(d.confidence) +
               ")";
      });

  py::class_<Feature>(m, "Feature")
      .def(py::init<>())
      .def_readwrite("name", &Feature::name)
      .def_readwrite("descriptors", &Feature::descriptors);

  py::class_<Frame>(m, "Frame")
      .def(py::init<>())
      .def_readwrite("stream_id", &Frame::stream_id)
      .def_readwrite("sequence_nr", &Frame::sequence_nr)
      .def_readwrite("timestamp_ms", &Frame::timestamp_ms)
      .def_readwrite("width", &Frame::width)
      .def_readwrite("height", &Frame::height)
      .def_readwrite("channels", &Frame::channels)
      .def_readwrite("features", &Frame::features)
      .def_property("pixels", &pixels_bytes, &set_pixels)
      .def("__eq__", [](const Frame& a, const Frame& b) { return a == b; })
      .def("__repr__", [](const Frame& f) {
        return "Frame(stream_id='" + f.stream_id + "', sequence_nr=" +
               std::to_string(f.sequence_nr) + ", " + std::to_string(f.width) + "x" +
               std::to_string(f.height) + "x" + std::to_string(f.channels) + ")";
      });

  py::class_<detect::ScanParams>(m, "ScanParams")
      .def(py::init<>())
      .def_readwrite("scale_factor", &detect::ScanParams::scale_factor)
      .def_readwrite("window_stride", &detect::ScanParams::window_stride)
      .def_readwrite("min_width", &detect::ScanParams::min_width)
      .def_readwrite("min_height", &detect::ScanParams::min_height)
      .def_readwrite("max_width", &detect::ScanParams::max_width)
      .def_readwrite("max_height", &detect::ScanParams::max_height)
      .def_readwrite("nms_iou_threshold", &detect::ScanParams::nms_iou_threshold);

  py::class_<detect::HaarCascadeModel, std::shared_ptr<detect::HaarCascadeModel>>(
      m, "HaarCascadeModel")
      .def_readonly("base_width", &detect::HaarCascadeModel::base_width)
      .def_readonly("base_height", &detect::HaarCascadeModel::base_height)
      .def_property_readonly("stage_count", [](const detect::HaarCascadeModel& c) {
        return c.stages.size();
      });

  py::class_<detect::HogModel, std::shared_ptr<detect::HogModel>>(m, "HogModel")
      .def_readonly("svm_bias", &detect::HogModel::svm_bias)
      .def_readonly("hit_threshold", &detect::HogModel::hit_threshold)
      .def_property_readonly("weight_count", [](const detect::HogModel& h) {
        return h.svm_weights.size();
      });

  py::class_<detect::ScoredBox>(m, "ScoredBox")
      .def(py::init<>())
      .def(py::init([](Rect box, double score) {
             detect::ScoredBox b;
             b.bbox = box;
             b.score = score;
             return b;
           }),
           py::arg("box"), py::arg("score"))
      .def_readwrite("box", &detect::ScoredBox::bbox)
      .def_readwrite("score", &detect::ScoredBox::score);

  // wire formats
  m.def("encode_frame", [](const Frame& f) {
    auto bytes = encode_frame(f);
    return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  });
  m.def("decode_frame", [](py::bytes data) {
    std::string raw = data;
    return decode_frame(std::span<const uint8_t>(
        reinterpret_cast<const uint8_t*>(raw.data()), raw.size()));
  });
  m.def("pack_chunk", [](const std::vector<Frame>& frames, double fps) {
    auto bytes = sink::pack_chunk(frames, fps);
    return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }, py::arg("frames"), py::arg("fps"));
  m.def("read_chunk", [](py::bytes data) {
    std::string raw = data;
    auto c = sink::read_chunk(std::span<const uint8_t>(
        reinterpret_cast<const uint8_t*>(raw.data()), raw.size()));
    return py::make_tuple(c.frames, c.fps);
  });

  // images
  m.def("read_image",
        [](const std::string& path, const std::string& stream_id, uint64_t sequence_nr) {
          return netpbm::to_frame(netpbm::read_file(path), stream_id, sequence_nr);
        },
        py::arg("path"), py::arg("stream_id") = "cam0", py::arg("sequence_nr") = 0);
  m.def("write_frame_ppm", [](const Frame& f) {
    auto bytes = netpbm::write_frame_ppm(f);
    return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  });
  m.def("to_grayscale", &bgsub::to_grayscale);

  // detectors
  m.def("load_cascade", [](const std::string& path) {
    return std::make_shared<detect::HaarCascadeModel>(detect::load_cascade(path));
  });
  m.def("load_hog_model", [](const std::string& path) {
    return std::make_shared<detect::HogModel>(detect::load_hog_model(path));
  });
  m.def("detect_faces",
        [](const Frame& frame, const detect::HaarCascadeModel& model,
           const detect::ScanParams& params) {
          return detect::detect_multiscale_cascade(frame, model, params);
        },
        py::arg("frame"), py::arg("model"), py::arg("params") = detect::ScanParams{});
  m.def("detect_persons",
        [](const Frame& frame, const detect::HogModel& model, const detect::ScanParams& params) {
          return detect::detect_multiscale_hog(frame, model, params);
        },
        py::arg("frame"), py::arg("model"), py::arg("params") = detect::ScanParams{});
  m.def("hog_descriptor", &detect::hog_descriptor);
  m.def("iou", &detect::iou);
  m.def("non_max_suppression", [](const std::vector<detect::ScoredBox>& boxes, double threshold) {
    return detect::nms(boxes, threshold);
  }, py::arg("boxes"), py::arg("iou_threshold"));

  // pipeline
  m.def("default_config", [] { return config::serialize_config(config::PipelineConfig{}); });
  m.def("check_config", [](const std::string& text) {
    config::parse_config(text);
  });
  m.def("run_pipeline", &run_pipeline, py::arg("config_json"),
        "Run the full topology described by a JSON config document and "
        "return the run report as a dict.");
  m.def("reduction_percent", &sink::reduction_stats, py::arg("total_frames"),
        py::arg("kept_frames"));
}
