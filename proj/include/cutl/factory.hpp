#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cutl/generators.hpp"

// JSON-driven construction of process specs, e.g.
//   {"family": "bd_lamperti", "a": 1.0, "c": 2.0, "x_floor": 2}
//   {"family": "elliptic", "d": 2, "rho": 1.0, "sigma": 2.0}

namespace cutl {

inline std::unique_ptr<ScalarProcess> make_scalar_process(
    const nlohmann::json& j) {
    const std::string family = j.at("family").get<std::string>();
    if (family == "bd_lamperti") {
        std::optional<double> c;
        if (j.contains("c")) c = j.at("c").get<double>();
        return std::make_unique<BdLamperti>(j.at("a").get<double>(), c,
                                            j.value("x_floor", 2.0));
    }
    if (family == "plus_one_minus_two")
        return std::make_unique<PlusOneMinusTwo>(j.at("a").get<double>(),
                                                 j.value("x_floor", 2.0));
    if (family == "deterministic_plus_one")
        return std::make_unique<DeterministicPlusOne>();
    if (family == "ssrw_norm")
        return std::make_unique<SsrwNorm>(j.at("d").get<std::size_t>());
    if (family == "elliptic_radial")
        return std::make_unique<EllipticRadial>(j.at("rho").get<double>(),
                                                j.at("sigma").get<double>());
    throw std::invalid_argument("unknown scalar process family: " + family);
}

inline std::unique_ptr<VectorProcess> make_vector_process(
    const nlohmann::json& j) {
    const std::string family = j.at("family").get<std::string>();
    if (family == "ssrw")
        return std::make_unique<SsrwVector>(j.at("d").get<std::size_t>());
    if (family == "elliptic")
        return std::make_unique<EllipticWalk>(j.at("d").get<std::size_t>(),
                                              j.at("rho").get<double>(),
                                              j.at("sigma").get<double>());
    throw std::invalid_argument("unknown vector process family: " + family);
}

inline bool is_vector_family(const nlohmann::json& j) {
    const std::string family = j.at("family").get<std::string>();
    return family == "ssrw" || family == "elliptic";
}

} // namespace cutl
