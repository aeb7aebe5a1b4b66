#pragma once

#include <string>

#include "json_util.hpp"
#include "xdeval/synth.hpp"

namespace xdeval::jsonio {

inline ordered_json domain_to_json(const DomainSpec& domain) {
  ordered_json j;
  j["name"] = domain.name;
  j["background"] = background_mode_name(domain.background);
  j["clutter_density"] = domain.clutter_density;
  j["noise_sigma"] = domain.noise_sigma;
  j["height"] = domain.height;
  j["width"] = domain.width;
  j["object_scale_min"] = domain.object_scale_min;
  j["object_scale_max"] = domain.object_scale_max;
  return j;
}

inline DomainSpec domain_from_json(const ordered_json& j,
                                   const std::string& context) {
  if (!j.is_object()) {
    throw IntegrityError(context + ": domain must be a JSON object");
  }
  DomainSpec domain;
  try {
    domain.name = j.value("name", domain.name);
    if (j.contains("background")) {
      domain.background =
          background_mode_from_name(j["background"].get<std::string>());
    }
    domain.clutter_density = j.value("clutter_density", domain.clutter_density);
    domain.noise_sigma = j.value("noise_sigma", domain.noise_sigma);
    domain.height = j.value("height", domain.height);
    domain.width = j.value("width", domain.width);
    domain.object_scale_min =
        j.value("object_scale_min", domain.object_scale_min);
    domain.object_scale_max =
        j.value("object_scale_max", domain.object_scale_max);
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(context + ": " + e.what());
  }
  domain.validate();
  return domain;
}

}  // namespace xdeval::jsonio
