#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "expo/mlp.hpp"
#include "expo/param.hpp"
#include "expo/rng.hpp"

namespace py = pybind11;
using namespace expo;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Core bindings: networks, policies, environments, training loop.";

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", py::overload_cast<>(&Rng::uniform))
      .def("normal", &Rng::normal)
      .def("uniform_int", &Rng::uniform_int, py::arg("n"));

  py::class_<Mlp>(m, "Mlp")
      .def(py::init([](std::uint32_t in, std::uint32_t hidden, int layers, std::uint32_t out,
                       std::uint64_t seed) {
             Mlp net = Mlp::make(in, hidden, layers, out);
             Rng rng(seed);
             net.init(rng);
             return net;
           }),
           py::arg("in_dim"), py::arg("hidden"), py::arg("hidden_layers"), py::arg("out_dim"),
           py::arg("seed"))
      .def("forward",
           [](const Mlp& net, const std::vector<double>& x) { return net.forward(x); })
      .def_property_readonly("n_params", [](const Mlp& net) { return net.params().size(); });

  m.def("save_checkpoint",
        [](const std::string& path, const Mlp& net) { save_checkpoint(path, net.params()); });
}
