#include <filesystem>
#include <fstream>
#include <vector>

#include "gyrad/errors.hpp"
#include "gyrad/simd.hpp"
#include "gyrad/step_distribution.hpp"
#include "json.hpp"

namespace gyrad::kern {

namespace {

// Lexicographic order of (x_1, ..., x_d): x_d advances fastest.
bool advance_lex(std::vector<long long>& x, long long R) {
  for (int i = static_cast<int>(x.size()) - 1; i >= 0; --i) {
    if (++x[i] <= R) return true;
    x[i] = -R;
  }
  return false;
}

}  // namespace

void save_json(const StepDistribution& D, const std::string& path) {
  nlohmann::json j;
  j["d"] = D.d;
  j["L"] = D.L;
  j["alpha"] = D.alpha;
  j["radius"] = D.radius;
  j["c_h"] = D.c_h;
  j["tail_bound"] = D.tail_bound;
  nlohmann::json rows = nlohmann::json::array();
  std::vector<long long> x(D.d, -D.radius);
  do {
    nlohmann::json row = nlohmann::json::array();
    for (int i = 0; i < D.d; ++i) row.push_back(x[i]);
    row.push_back(D.weights[D.index(x)]);
    rows.push_back(std::move(row));
  } while (advance_lex(x, D.radius));
  j["weights"] = std::move(rows);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw error("cannot open " + tmp + " for writing");
    out << j.dump();
    out << '\n';
  }
  std::filesystem::rename(tmp, path);
}

StepDistribution load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_parameter("cannot open kernel file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw invalid_parameter("kernel file " + path + " is not valid JSON: " + e.what());
  }

  StepDistribution D;
  try {
    D.d = j.at("d").get<int>();
    D.L = j.at("L").get<double>();
    D.alpha = j.at("alpha").get<double>();
    D.radius = j.at("radius").get<long long>();
    D.c_h = j.at("c_h").get<double>();
    D.tail_bound = j.at("tail_bound").get<double>();
    const auto& rows = j.at("weights");
    double volume = 1.0;
    for (int i = 0; i < D.d; ++i) volume *= static_cast<double>(2 * D.radius + 1);
    if (volume > 4.0e8) throw resource_limit("kernel box too large to load");
    D.weights.assign(static_cast<std::size_t>(volume), 0.0);
    if (rows.size() != D.weights.size())
      throw invalid_parameter("kernel file has wrong number of weight rows");
    std::vector<long long> x(D.d);
    for (const auto& row : rows) {
      if (row.size() != static_cast<std::size_t>(D.d) + 1)
        throw invalid_parameter("kernel weight row has wrong arity");
      for (int i = 0; i < D.d; ++i) x[i] = row[i].get<long long>();
      D.weights[D.index(x)] = row[D.d].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw invalid_parameter("kernel file " + path + " missing fields: " + e.what());
  }

  const double total = simd::active().sum(D.weights.data(), D.weights.size());
  if (std::abs(total - 1.0) > 1e-10)
    throw invalid_parameter("kernel weights in " + path + " do not sum to 1");
  return D;
}

}  // namespace gyrad::kern
