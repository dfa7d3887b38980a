// Copyright 2026 The qtab Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qtab/bandit.h"
#include "qtab/bayesopt.h"
#include "qtab/data.h"
#include "qtab/dct.h"
#include "qtab/error.h"
#include "qtab/eval.h"
#include "qtab/evaluator.h"
#include "qtab/jpeg.h"
#include "qtab/pareto.h"
#include "qtab/qtable.h"
#include "qtab/search.h"
#include "qtab/stats.h"
#include "qtab/trial_log.h"

namespace py = pybind11;

namespace qtab {
namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

RawImage to_image(const U8Array& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw InvalidArgument("expected an HxWx3 uint8 array");
  RawImage img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), img.pixels.begin());
  return img;
}

U8Array to_array(const RawImage& img) {
  U8Array a({img.height, img.width, 3});
  std::copy(img.pixels.begin(), img.pixels.end(), a.mutable_data());
  return a;
}

QTable to_table(const py::object& o) {
  if (py::isinstance<QTable>(o)) return o.cast<QTable>();
  const F64Array a = py::array::ensure(o);
  if (!a || a.size() != kBlockSize) throw InvalidArgument("expected 64 table entries");
  std::array<int, kBlockSize> v;
  for (int i = 0; i < kBlockSize; ++i) {
    const double x = a.data()[i];
    if (x != static_cast<int>(x)) throw InvalidArgument("table entries must be integers");
    v[i] = static_cast<int>(x);
  }
  return QTable(v);
}

Block to_block(const F64Array& a) {
  if (a.size() != kBlockSize) throw InvalidArgument("expected an 8x8 block");
  Block b;
  std::copy(a.data(), a.data() + kBlockSize, b.begin());
  return b;
}

F64Array from_block(const Block& b) {
  F64Array a({8, 8});
  std::copy(b.begin(), b.end(), a.mutable_data());
  return a;
}

EncodeConfig encode_config(const std::string& subsampling, const std::string& chroma) {
  EncodeConfig c;
  c.subsampling = parse_subsampling(subsampling);
  c.chroma = parse_chroma_policy(chroma);
  return c;
}

py::dict trial_dict(const Trial& t) {
  py::dict d;
  d["trial"] = t.point.trial_index;
  d["strategy"] = to_string(t.point.strategy);
  d["qtable"] = t.point.qtable;
  d["compression_rate"] = t.point.compression_rate;
  d["accuracy"] = t.point.accuracy;
  d["mean_psnr"] = t.point.mean_psnr;
  d["y"] = t.y;
  d["source"] = t.source;
  d["improved_frontier"] = t.improved_frontier;
  d["good"] = t.good;
  d["decision_seconds"] = t.decision_seconds;
  return d;
}

std::unique_ptr<Proposer> make_proposer(const std::string& strategy, std::uint64_t seed,
                                        const std::optional<Bounds>& bounds,
                                        const std::optional<FitnessCurve>& fitness, const BoConfig& bo) {
  const auto need_bounds = [&]() -> const Bounds& {
    if (!bounds) throw InvalidArgument(strategy + " needs bounds");
    return *bounds;
  };
  switch (parse_strategy(strategy)) {
    case Strategy::kSortedRandom:
      return std::make_unique<SortedRandomProposer>(seed);
    case Strategy::kUniformRandom:
      return std::make_unique<UniformRandomProposer>(seed);
    case Strategy::kBoundedRandom:
      return std::make_unique<BoundedRandomProposer>(need_bounds(), seed);
    case Strategy::kBayesOpt:
      if (!fitness) throw InvalidArgument("bayesopt needs a fitness curve");
      return std::make_unique<BayesOptProposer>(need_bounds(), default_bands(), *fitness, bo, seed);
    case Strategy::kComposite: {
      CompositeConfig c;
      c.fitness = fitness;
      return std::make_unique<CompositeProposer>(need_bounds(), c, seed);
    }
    case Strategy::kStandard:
      break;
  }
  throw InvalidArgument("strategy " + strategy + " cannot be tuned");
}

}  // namespace
}  // namespace qtab

PYBIND11_MODULE(_qtab, m) {
  using namespace qtab;
  m.doc() = "JPEG quantization table tuning toolkit";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<DecodeError>(m, "DecodeError", PyExc_ValueError);
  py::register_exception<DatasetError>(m, "DatasetError", PyExc_RuntimeError);
  py::register_exception<EvaluatorError>(m, "EvaluatorError", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<QTable>(m, "QTable")
      .def(py::init([](const py::object& o) { return to_table(o); }), py::arg("values"))
      .def_static("filled", &QTable::filled)
      .def_static("from_zigzag", [](const std::vector<int>& v) { return QTable::from_zigzag(v); })
      .def_static("parse", [](const std::string& s) {
        return s.find('[') != std::string::npos ? QTable::parse_json(s) : QTable::parse_text(s);
      })
      .def_static("load", &load_qtable)
      .def("save", [](const QTable& t, const std::filesystem::path& p) { save_qtable(p, t); })
      .def("values", [](const QTable& t) {
        py::array_t<int> a({8, 8});
        const auto v = t.values();
        std::copy(v.begin(), v.end(), a.mutable_data());
        return a;
      })
      .def("zigzag", [](const QTable& t) {
        const auto v = t.zigzag_values();
        return std::vector<int>(v.begin(), v.end());
      })
      .def("__getitem__", [](const QTable& t, std::pair<int, int> rc) {
        if (rc.first < 0 || rc.first > 7 || rc.second < 0 || rc.second > 7) throw py::index_error();
        return t(rc.first, rc.second);
      })
      .def("transposed", &QTable::transposed)
      .def("to_text", &QTable::to_text)
      .def("to_json", &QTable::to_json)
      .def("hex", &QTable::hex)
      .def(py::self == py::self)
      .def("__hash__", [](const QTable& t) { return py::hash(py::str(t.hex())); })
      .def("__repr__", [](const QTable& t) { return "QTable(" + t.hex() + ")"; });

  m.def("standard_table", [](const std::string& channel) {
    if (channel == "luma") return standard_table(Channel::kLuma);
    if (channel == "chroma") return standard_table(Channel::kChroma);
    throw InvalidArgument("channel must be luma or chroma");
  }, py::arg("channel") = "luma");
  m.def("scale_by_quality", [](const py::object& t, int q) { return scale_by_quality(to_table(t), QualityFactor(q)); },
        py::arg("table"), py::arg("quality"));
  m.def("sorted_random_sample", [](int start, int end, std::uint64_t seed, bool descending) {
    return sorted_random_sample(SampleRange(start, end), seed,
                                descending ? SortOrder::kDescending : SortOrder::kAscending);
  }, py::arg("start"), py::arg("end"), py::arg("seed"), py::arg("descending") = false);

  py::class_<Bounds>(m, "Bounds")
      .def(py::init([](const F64Array& lower, const F64Array& upper) {
        if (lower.size() != kBlockSize || upper.size() != kBlockSize) throw InvalidArgument("expected 64 entries");
        Bounds b;
        std::copy(lower.data(), lower.data() + kBlockSize, b.lower.begin());
        std::copy(upper.data(), upper.data() + kBlockSize, b.upper.begin());
        b.validate();
        return b;
      }), py::arg("lower"), py::arg("upper"))
      .def_static("from_table", [](const py::object& t) { return Bounds::from_table(to_table(t)); })
      .def_property_readonly("lower", [](const Bounds& b) { return from_block(b.lower); })
      .def_property_readonly("upper", [](const Bounds& b) { return from_block(b.upper); })
      .def("contains", [](const Bounds& b, const py::object& t) { return b.contains(to_table(t)); });
  m.def("bounds_from_tables", [](const std::vector<QTable>& tables) { return bounds_from_tables(tables); });

  py::class_<EvalPoint>(m, "EvalPoint")
      .def(py::init([](double rate, double acc, const py::object& table, int trial) {
        EvalPoint p;
        p.compression_rate = rate;
        p.accuracy = acc;
        if (!table.is_none()) p.qtable = to_table(table);
        p.trial_index = trial;
        return p;
      }), py::arg("compression_rate"), py::arg("accuracy"), py::arg("qtable") = py::none(),
           py::arg("trial_index") = 0)
      .def_readwrite("compression_rate", &EvalPoint::compression_rate)
      .def_readwrite("accuracy", &EvalPoint::accuracy)
      .def_readwrite("mean_psnr", &EvalPoint::mean_psnr)
      .def_readwrite("trial_index", &EvalPoint::trial_index)
      .def_readwrite("qtable", &EvalPoint::qtable)
      .def_property_readonly("strategy", [](const EvalPoint& p) { return to_string(p.strategy); })
      .def("__repr__", [](const EvalPoint& p) {
        return "EvalPoint(rate=" + std::to_string(p.compression_rate) + ", accuracy=" + std::to_string(p.accuracy) + ")";
      });

  py::class_<FitnessCurve>(m, "FitnessCurve")
      .def(py::init([](double a, double b, double c) { return FitnessCurve{a, b, c}; }), py::arg("a"),
           py::arg("b"), py::arg("c"))
      .def_readwrite("a", &FitnessCurve::a)
      .def_readwrite("b", &FitnessCurve::b)
      .def_readwrite("c", &FitnessCurve::c)
      .def("__call__", &FitnessCurve::operator());
  m.def("pareto_frontier", [](const std::vector<EvalPoint>& pts) { return build_frontier(pts).points(); });
  m.def("compute_bounds", [](const std::vector<EvalPoint>& pts, double lo, double hi) {
    return compute_bounds(build_frontier(pts), lo, hi);
  }, py::arg("points"), py::arg("cr_low"), py::arg("cr_high"));
  m.def("fit_fitness", [](const std::vector<EvalPoint>& pts) { return fit_fitness(pts); });
  m.def("good_point", &good_point, py::arg("point"), py::arg("fitness"));

  m.def("forward_dct", [](const F64Array& a) { return from_block(forward_dct(to_block(a))); });
  m.def("inverse_dct", [](const F64Array& a) { return from_block(inverse_dct(to_block(a))); });
  m.def("encode", [](const U8Array& image, const py::object& luma, const py::object& chroma,
                     const std::string& subsampling) {
    const RawImage img = to_image(image);
    const QTable l = to_table(luma);
    const QTable c = chroma.is_none() ? l : to_table(chroma);
    JpegStream s;
    {
      py::gil_scoped_release release;
      s = encode(img, l, c, parse_subsampling(subsampling));
    }
    return py::bytes(reinterpret_cast<const char*>(s.bytes.data()), s.bytes.size());
  }, py::arg("image"), py::arg("luma"), py::arg("chroma") = py::none(), py::arg("subsampling") = "420");
  m.def("decode", [](const py::bytes& data) {
    const std::string_view v = data;
    const auto* p = reinterpret_cast<const std::uint8_t*>(v.data());
    return to_array(decode(std::span<const std::uint8_t>(p, v.size())));
  });
  m.def("psnr", [](const U8Array& a, const U8Array& b) { return psnr(to_image(a), to_image(b)); });

  py::class_<Dataset>(m, "Dataset")
      .def("__len__", &Dataset::size)
      .def_property_readonly("class_count", &Dataset::class_count)
      .def_property_readonly("raw_bytes", &Dataset::raw_bytes)
      .def_property_readonly("hash", &Dataset::hash)
      .def_property_readonly("labels", [](const Dataset& d) {
        std::vector<int> l;
        for (const auto& it : d.items()) l.push_back(it.label);
        return l;
      })
      .def("image", [](const Dataset& d, std::size_t i) {
        if (i >= d.size()) throw py::index_error();
        return to_array(d[i].image);
      });
  m.def("load_manifest", [](const std::filesystem::path& p, int threads) { return load_manifest(p, threads); },
        py::arg("path"), py::arg("threads") = 0);
  const auto corpus_spec = [](int classes, int per_class, int width, int height, std::uint64_t seed) {
    SyntheticCorpusSpec s;
    s.n_classes = classes;
    s.images_per_class = per_class;
    s.width = width;
    s.height = height;
    s.seed = seed;
    return s;
  };
  m.def("synthesize_dataset", [corpus_spec](int classes, int per_class, int width, int height, std::uint64_t seed) {
    py::gil_scoped_release release;
    return synthesize_dataset(corpus_spec(classes, per_class, width, height, seed));
  }, py::arg("classes") = 20, py::arg("per_class") = 10, py::arg("width") = 64, py::arg("height") = 64,
     py::arg("seed") = 1);
  m.def("generate_synthetic", [corpus_spec](const std::filesystem::path& root, int classes, int per_class, int width,
                                            int height, std::uint64_t seed) {
    return generate_synthetic(corpus_spec(classes, per_class, width, height, seed), root);
  }, py::arg("root"), py::arg("classes") = 20, py::arg("per_class") = 10, py::arg("width") = 64,
     py::arg("height") = 64, py::arg("seed") = 1);

  m.def("compression_rate", [](const Dataset& d, const py::object& table, const std::string& subsampling,
                               const std::string& chroma, int threads) {
    const QTable t = to_table(table);
    py::gil_scoped_release release;
    return compression_rate(d, t, encode_config(subsampling, chroma), threads);
  }, py::arg("dataset"), py::arg("table"), py::arg("subsampling") = "420", py::arg("chroma") = "same",
     py::arg("threads") = 0);
  m.def("evaluate", [](const Dataset& d, const py::object& table, const std::string& evaluator,
                       const std::string& subsampling, const std::string& chroma, bool psnr, int threads) {
    const QTable t = to_table(table);
    auto ev = make_evaluator(EvaluatorSpec::parse(evaluator), d.class_count());
    EvalOptions o;
    o.encode = encode_config(subsampling, chroma);
    o.compute_psnr = psnr;
    o.threads = threads;
    py::gil_scoped_release release;
    return evaluate(d, t, *ev, o).point;
  }, py::arg("dataset"), py::arg("table"), py::arg("evaluator") = "proxy", py::arg("subsampling") = "420",
     py::arg("chroma") = "same", py::arg("psnr") = false, py::arg("threads") = 0);
  m.def("standard_sweep", [](const Dataset& d, const std::string& evaluator, const std::string& subsampling,
                             const std::string& chroma) {
    auto ev = make_evaluator(EvaluatorSpec::parse(evaluator), d.class_count());
    EvalOptions o;
    o.encode = encode_config(subsampling, chroma);
    py::gil_scoped_release release;
    return standard_sweep(d, *ev, o);
  }, py::arg("dataset"), py::arg("evaluator") = "proxy", py::arg("subsampling") = "420", py::arg("chroma") = "same");

  m.def("tune", [](const Dataset& d, const std::string& strategy, int trials, std::uint64_t seed,
                   const std::string& evaluator, const std::optional<Bounds>& bounds,
                   const std::optional<FitnessCurve>& fitness, int stop_after_good, int bo_init, int bo_rounds,
                   int bo_grid_levels, const std::optional<std::filesystem::path>& log) {
    BoConfig bo;
    bo.n_init = bo_init;
    bo.n_rounds = bo_rounds;
    bo.grid_levels = bo_grid_levels;
    auto proposer = make_proposer(strategy, seed, bounds, fitness, bo);
    auto ev = make_evaluator(EvaluatorSpec::parse(evaluator), d.class_count());
    DatasetObjective objective(d, *ev);
    RunOptions o;
    o.n_trials = trials;
    o.fitness = fitness;
    o.stop_after_good = stop_after_good;
    std::unique_ptr<TrialLogWriter> writer;
    if (log) writer = std::make_unique<TrialLogWriter>(*log, TrialLogContext{seed, d.hash(), ev->id(), EncodeConfig{}.id()});
    RunResult r;
    {
      py::gil_scoped_release release;
      r = run_search(*proposer, objective, o, [&](const Trial& t) {
        if (writer) writer->append(t);
      });
    }
    py::list out;
    for (const Trial& t : r.trials) out.append(trial_dict(t));
    return out;
  }, py::arg("dataset"), py::arg("strategy") = "sorted-random", py::arg("trials") = 100, py::arg("seed") = 1,
     py::arg("evaluator") = "proxy", py::arg("bounds") = py::none(), py::arg("fitness") = py::none(),
     py::arg("stop_after_good") = 0, py::arg("bo_init") = 100000, py::arg("bo_rounds") = 20,
     py::arg("bo_grid_levels") = 9, py::arg("log") = py::none());
  m.def("read_trial_log", [](const std::filesystem::path& p) {
    const TrialLog log = read_trial_log(p);
    py::list out;
    for (const Trial& t : log.trials) out.append(trial_dict(t));
    return out;
  });

  py::class_<TTestResult>(m, "TTestResult")
      .def_readonly("mean_diff", &TTestResult::mean_diff)
      .def_readonly("t_statistic", &TTestResult::t_statistic)
      .def_readonly("p_value", &TTestResult::p_value)
      .def_readonly("df", &TTestResult::df);
  m.def("two_sample_t", [](const std::vector<double>& a, const std::vector<double>& b, bool welch) {
    return two_sample_t(a, b, welch);
  }, py::arg("a"), py::arg("b"), py::arg("welch") = false);
  m.def("student_t_cdf", &student_t_cdf, py::arg("t"), py::arg("df"));
  m.def("resample_accuracies", [](const Dataset& d, const py::object& table, int n_resamples, int classes_per_sample,
                                  int images_per_class, std::uint64_t seed, const std::string& evaluator) {
    const QTable t = to_table(table);
    auto ev = make_evaluator(EvaluatorSpec::parse(evaluator), d.class_count());
    ResamplePlan plan{n_resamples, classes_per_sample, images_per_class, seed};
    py::gil_scoped_release release;
    return resample_accuracies(d, tables_for(t, EncodeConfig{}), plan, *ev);
  }, py::arg("dataset"), py::arg("table"), py::arg("n_resamples") = 100, py::arg("classes_per_sample") = 700,
     py::arg("images_per_class") = 4, py::arg("seed") = 0, py::arg("evaluator") = "proxy");
}
