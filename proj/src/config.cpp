#include "logsieve/config.hpp"

#include <fstream>

#include "logsieve/errors.hpp"

namespace logsieve {

namespace {

void require_fraction(const char* name, double v) {
  if (!(v > 0.0 && v <= 1.0))
    throw UsageError(std::string(name) + " must be in (0, 1], got " +
                     std::to_string(v));
}

void require_count(const char* name, std::uint64_t v) {
  if (v < 1) throw UsageError(std::string(name) + " must be >= 1");
}

template <typename T>
T read_field(const nlohmann::json& j, const char* name) {
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw UsageError(std::string("config field '") + name + "' has the wrong type");
  }
}

}  // namespace

void Config::validate() const {
  require_fraction("alpha", alpha);
  require_fraction("beta", beta);
  require_fraction("jaccard_threshold", jaccard_threshold);
  require_fraction("coverage_fraction", coverage_fraction);
  require_fraction("file_presence_fraction", file_presence_fraction);
  require_count("shingle_n", shingle_n);
  require_count("num_permutations", num_permutations);
  require_count("gamma", gamma);
  require_count("max_iterations", max_iterations);
}

nlohmann::json to_json(const Config& c) {
  return nlohmann::json{{"alpha", c.alpha},
                        {"beta", c.beta},
                        {"shingle_n", c.shingle_n},
                        {"num_permutations", c.num_permutations},
                        {"jaccard_threshold", c.jaccard_threshold},
                        {"gamma", c.gamma},
                        {"coverage_fraction", c.coverage_fraction},
                        {"file_presence_fraction", c.file_presence_fraction},
                        {"max_iterations", c.max_iterations},
                        {"seed", c.seed}};
}

Config config_from_json(const nlohmann::json& j, Config c) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "alpha") c.alpha = read_field<double>(j, "alpha");
    else if (key == "beta") c.beta = read_field<double>(j, "beta");
    else if (key == "shingle_n") c.shingle_n = read_field<std::size_t>(j, "shingle_n");
    else if (key == "num_permutations")
      c.num_permutations = read_field<std::size_t>(j, "num_permutations");
    else if (key == "jaccard_threshold")
      c.jaccard_threshold = read_field<double>(j, "jaccard_threshold");
    else if (key == "gamma") c.gamma = read_field<std::uint64_t>(j, "gamma");
    else if (key == "coverage_fraction")
      c.coverage_fraction = read_field<double>(j, "coverage_fraction");
    else if (key == "file_presence_fraction")
      c.file_presence_fraction = read_field<double>(j, "file_presence_fraction");
    else if (key == "max_iterations")
      c.max_iterations = read_field<std::size_t>(j, "max_iterations");
    else if (key == "seed") c.seed = read_field<std::uint64_t>(j, "seed");
    else throw UsageError("unknown config field '" + key + "'");
  }
  return c;
}

Config load_config_file(const std::string& path, Config base) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("config file " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, base);
}

}  // namespace logsieve
