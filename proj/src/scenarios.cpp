#include "netlqg/scenarios.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace netlqg {

namespace {

using Json = nlohmann::ordered_json;

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < v.size(); ++r) out.push_back(v(r));
  return out;
}

Matrix matrix_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) {
    throw std::runtime_error("config field '" + field + "' must be a nested array");
  }
  const auto rows = j.size();
  const auto cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) {
    throw std::runtime_error("config field '" + field + "' must be a nested array");
  }
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const Json& row = j.at(r);
    if (!row.is_array() || row.size() != cols) {
      throw std::runtime_error("config field '" + field + "' has ragged rows");
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = row.at(c).get<double>();
  }
  return m;
}

Vector vector_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) {
    throw std::runtime_error("config field '" + field + "' must be an array");
  }
  Vector v(j.size());
  for (std::size_t r = 0; r < j.size(); ++r) v(r) = j.at(r).get<double>();
  return v;
}

InfoMode mode_from_string(const std::string& s, const std::string& field) {
  if (s == "perfect") return InfoMode::kPerfect;
  if (s == "imperfect") return InfoMode::kImperfect;
  throw std::runtime_error("config field '" + field +
                           "' must be \"perfect\" or \"imperfect\", got \"" + s + "\"");
}

NetworkSpec uniform_network(int p, double alpha, double success) {
  NetworkSpec net;
  net.p = p;
  net.delay_alpha.assign(p, alpha);
  net.p_sc.assign(p, success);
  net.p_ca.assign(p, success);
  net.p_link.assign(p, std::vector<double>(p, success));
  for (int i = 0; i < p; ++i) net.p_link[i][i] = 1.0;
  net.info_mode = InfoMode::kPerfect;
  return net;
}

}  // namespace

void ScenarioConfig::validate() const {
  plant.validate();
  network.validate(plant.p());
  if (solver.n_samples < 1 ||
      solver.n_samples > std::numeric_limits<int>::max()) {
    throw std::invalid_argument("scenario: solver.n_samples must be in [1, 2^31)");
  }
  if (solver.N_large < 1) {
    throw std::invalid_argument("scenario: solver.N_large must be >= 1");
  }
  if (!(solver.tol > 0.0)) {
    throw std::invalid_argument("scenario: solver.tol must be > 0");
  }
  if (experiment.n_runs < 2) {
    throw std::invalid_argument("scenario: experiment.n_runs must be >= 2");
  }
  for (const auto& b : experiment.baselines) {
    if (b != "single" && b != "imperfect") {
      throw std::invalid_argument("scenario: unknown baseline \"" + b +
                                  "\" (supported: single, imperfect)");
    }
  }
  if (name.empty()) {
    throw std::invalid_argument("scenario: name must be nonempty");
  }
}

ScenarioConfig builtin_generic() {
  ScenarioConfig c;
  c.name = "generic";

  c.plant.A = Matrix{{0.0, 1.0}, {-3.0, -4.0}};
  Matrix B(2, 1);
  B << 0.0, 1.0;
  c.plant.B = {B, B};
  c.plant.T = 0.05;
  c.plant.N = 50;
  const double s35 = std::sqrt(35.0);
  Matrix Q(2, 2);
  Q << 35.0, s35, s35, 1.0;
  Q *= 80.0;
  c.plant.Q_N = Q;
  c.plant.Q_1 = Q;
  Matrix R(1, 1);
  R << 10.0;
  c.plant.R = {R, R};
  c.plant.x0 = Vector{{0.2, 0.1}};

  c.network = uniform_network(2, 1.0, 0.9);

  c.solver.n_samples = 20000;
  c.solver.seed = 101;
  c.solver.mode = InfoMode::kPerfect;
  c.solver.N_large = 200;
  c.solver.tol = 1e-4;

  c.experiment.n_runs = 1000;
  c.experiment.seed = 202;
  c.experiment.baselines = {"single", "imperfect"};

  c.out_dir = "out";
  return c;
}

ScenarioConfig builtin_lfc() {
  ScenarioConfig c;
  c.name = "lfc";

  // Load-frequency dynamics with K_p = 1, T_p = 0.2, T_t = 0.3, T_g = 0.08.
  const double Tp = 0.2, Tt = 0.3, Tg = 0.08, Kp = 1.0;
  Matrix A = Matrix::Zero(4, 4);
  A(1, 1) = -1.0 / Tp;
  A(1, 2) = Kp / Tp;
  A(2, 2) = -1.0 / Tt;
  A(2, 3) = 1.0 / Tt;
  A(3, 0) = 1.0 / Tg;
  A(3, 3) = -1.0 / Tg;
  c.plant.A = A;

  Matrix B(4, 1);
  B << 1.0, 1.0, 0.0, 0.0;
  c.plant.B = {B, B};
  c.plant.T = 0.05;
  c.plant.N = 50;
  c.plant.Q_N = Matrix::Identity(4, 4);
  c.plant.Q_1 = Matrix::Identity(4, 4);
  Matrix R(1, 1);
  R << 1.0;
  c.plant.R = {R, R};
  c.plant.x0 = Vector{{0.25, 0.15, 0.2, 0.1}};

  c.network = uniform_network(2, 1.0, 0.9);

  c.solver.n_samples = 20000;
  c.solver.seed = 103;
  c.solver.mode = InfoMode::kPerfect;
  c.solver.N_large = 200;
  c.solver.tol = 1e-4;

  c.experiment.n_runs = 1000;
  c.experiment.seed = 204;
  c.experiment.baselines = {"single", "imperfect"};

  c.out_dir = "out";
  return c;
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {"generic", "lfc"};
  return names;
}

ScenarioConfig builtin_scenario(const std::string& name) {
  if (name == "generic") return builtin_generic();
  if (name == "lfc") return builtin_lfc();
  std::string listing;
  for (const auto& n : builtin_names()) {
    if (!listing.empty()) listing += ", ";
    listing += n;
  }
  throw std::invalid_argument("unknown scenario \"" + name +
                              "\" (builtins: " + listing + ")");
}

std::string serialize_config(const ScenarioConfig& config) {
  Json j;
  j["name"] = config.name;

  Json plant;
  plant["A"] = matrix_to_json(config.plant.A);
  Json bs = Json::array();
  for (const auto& b : config.plant.B) bs.push_back(matrix_to_json(b));
  plant["B"] = std::move(bs);
  plant["T"] = config.plant.T;
  plant["N"] = config.plant.N;
  plant["Q_N"] = matrix_to_json(config.plant.Q_N);
  plant["Q_1"] = matrix_to_json(config.plant.Q_1);
  Json rs = Json::array();
  for (const auto& r : config.plant.R) rs.push_back(matrix_to_json(r));
  plant["R"] = std::move(rs);
  plant["x0"] = vector_to_json(config.plant.x0);
  j["plant"] = std::move(plant);

  Json net;
  net["p"] = config.network.p;
  net["delay_alpha"] = config.network.delay_alpha;
  net["p_sc"] = config.network.p_sc;
  net["p_ca"] = config.network.p_ca;
  net["p_link"] = config.network.p_link;
  net["info_mode"] = to_string(config.network.info_mode);
  j["network"] = std::move(net);

  Json solver;
  solver["n_samples"] = config.solver.n_samples;
  solver["seed"] = config.solver.seed;
  solver["mode"] = to_string(config.solver.mode);
  solver["N_large"] = config.solver.N_large;
  solver["tol"] = config.solver.tol;
  j["solver"] = std::move(solver);

  Json exp;
  exp["n_runs"] = config.experiment.n_runs;
  exp["seed"] = config.experiment.seed;
  exp["baselines"] = config.experiment.baselines;
  j["experiment"] = std::move(exp);

  j["out_dir"] = config.out_dir;
  return j.dump(2) + "\n";
}

ScenarioConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("config parse error: ") + e.what());
  }

  ScenarioConfig c;
  try {
    c.name = j.at("name").get<std::string>();

    const Json& plant = j.at("plant");
    c.plant.A = matrix_from_json(plant.at("A"), "plant.A");
    for (const auto& b : plant.at("B")) {
      c.plant.B.push_back(matrix_from_json(b, "plant.B"));
    }
    c.plant.T = plant.at("T").get<double>();
    c.plant.N = plant.at("N").get<int>();
    c.plant.Q_N = matrix_from_json(plant.at("Q_N"), "plant.Q_N");
    c.plant.Q_1 = matrix_from_json(plant.at("Q_1"), "plant.Q_1");
    for (const auto& r : plant.at("R")) {
      c.plant.R.push_back(matrix_from_json(r, "plant.R"));
    }
    c.plant.x0 = vector_from_json(plant.at("x0"), "plant.x0");

    const Json& net = j.at("network");
    c.network.p = net.at("p").get<int>();
    c.network.delay_alpha = net.at("delay_alpha").get<std::vector<double>>();
    c.network.p_sc = net.at("p_sc").get<std::vector<double>>();
    c.network.p_ca = net.at("p_ca").get<std::vector<double>>();
    c.network.p_link = net.at("p_link").get<std::vector<std::vector<double>>>();
    c.network.info_mode =
        mode_from_string(net.at("info_mode").get<std::string>(), "network.info_mode");

    const Json& solver = j.at("solver");
    c.solver.n_samples = solver.at("n_samples").get<std::int64_t>();
    c.solver.seed = solver.at("seed").get<std::uint64_t>();
    c.solver.mode = mode_from_string(solver.at("mode").get<std::string>(), "solver.mode");
    c.solver.N_large = solver.at("N_large").get<int>();
    c.solver.tol = solver.at("tol").get<double>();

    const Json& exp = j.at("experiment");
    c.experiment.n_runs = exp.at("n_runs").get<int>();
    c.experiment.seed = exp.at("seed").get<std::uint64_t>();
    c.experiment.baselines = exp.at("baselines").get<std::vector<std::string>>();

    c.out_dir = j.at("out_dir").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("config field error: ") + e.what());
  }

  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void save_config(const ScenarioConfig& config, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << serialize_config(config);
  if (!out) throw std::runtime_error("short write to config file: " + path);
}

PlantSpec single_controller_plant(const PlantSpec& plant) {
  plant.validate();
  PlantSpec one = plant;
  one.B = {plant.B.front()};
  one.R = {plant.R.front()};
  return one;
}

NetworkSpec single_controller_network(const NetworkSpec& network) {
  NetworkSpec one;
  one.p = 1;
  one.delay_alpha = {network.delay_alpha.front()};
  one.p_sc = {network.p_sc.front()};
  one.p_ca = {network.p_ca.front()};
  one.p_link = {{1.0}};
  one.info_mode = network.info_mode;
  return one;
}

}  // namespace netlqg
