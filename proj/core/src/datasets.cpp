#include "tfn/datasets.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "tfn/rotation.hpp"

namespace tfn::tasks {

using json = nlohmann::ordered_json;

namespace {

void transform_cloud(PointCloud& cloud, bool rotate, bool translate, RandomEngine& rng) {
  const so3::Rotation g = rotate ? so3::Rotation::random(rng) : so3::Rotation();
  so3::Vec3 shift{0, 0, 0};
  if (translate) {
    for (auto& s : shift) s = rng.uniform(-5.0, 5.0);
  }
  const so3::Mat3 r = g.matrix();
  for (int64_t a = 0; a < cloud.num_points(); ++a) {
    const so3::Vec3 p{cloud.positions.at({a, 0}), cloud.positions.at({a, 1}), cloud.positions.at({a, 2})};
    const so3::Vec3 q = so3::mat_vec(r, p);
    for (int64_t k = 0; k < 3; ++k) cloud.positions.at({a, k}) = q[static_cast<size_t>(k)] + shift[static_cast<size_t>(k)];
  }
}

so3::Vec3 transform_point(const so3::Vec3& p, const so3::Rotation& g, const so3::Vec3& shift) {
  const so3::Vec3 q = g(p);
  return {q[0] + shift[0], q[1] + shift[1], q[2] + shift[2]};
}

double min_pairwise_distance(const NdArray& positions) {
  const int64_t n = positions.extent(0);
  double best = 1e300;
  for (int64_t a = 0; a < n; ++a)
    for (int64_t b = a + 1; b < n; ++b) {
      double sq = 0.0;
      for (int64_t k = 0; k < 3; ++k) {
        const double d = positions.at({a, k}) - positions.at({b, k});
        sq += d * d;
      }
      best = std::min(best, std::sqrt(sq));
    }
  return best;
}

}  // namespace

std::vector<LabeledSample> gen_tetris(bool rotate, bool translate, uint64_t seed) {
  RandomEngine rng(seed);
  std::vector<LabeledSample> out;
  for (const TetrisShape& shape : tetris_shapes()) {
    LabeledSample sample;
    sample.task = "tetris";
    sample.seed = seed;
    sample.label = shape.label;
    sample.cloud = tetris_cloud(shape);
    transform_cloud(sample.cloud, rotate, translate, rng);
    out.push_back(std::move(sample));
  }
  return out;
}

std::vector<LabeledSample> gen_tetris_n(int count, bool rotate, bool translate, uint64_t seed) {
  RandomEngine rng(seed);
  const auto& shapes = tetris_shapes();
  std::vector<LabeledSample> out;
  for (int i = 0; i < count; ++i) {
    const TetrisShape& shape = shapes[static_cast<size_t>(i) % shapes.size()];
    LabeledSample sample;
    sample.task = "tetris";
    sample.seed = seed;
    sample.label = shape.label;
    sample.cloud = tetris_cloud(shape);
    transform_cloud(sample.cloud, rotate, translate, rng);
    out.push_back(std::move(sample));
  }
  return out;
}

LabeledSample gen_gravity(uint64_t seed) {
  RandomEngine rng(seed);
  LabeledSample sample;
  sample.task = "gravity";
  sample.seed = seed;

  const int64_t n = 2 + rng.uniform_int(9);  // 2..10
  NdArray positions({n, 3});
  // resample the whole configuration until the 0.5 minimum distance holds
  do {
    for (int64_t i = 0; i < positions.size(); ++i) positions[i] = rng.uniform(-2.0, 2.0);
  } while (min_pairwise_distance(positions) < 0.5);

  sample.cloud.positions = positions;
  sample.cloud.masses.resize(static_cast<size_t>(n));
  for (auto& m : sample.cloud.masses) m = rng.uniform(0.5, 2.0);

  sample.vectors = NdArray({n, 3});
  for (int64_t p = 0; p < n; ++p) {
    for (int64_t q = 0; q < n; ++q) {
      if (q == p) continue;
      // r_np = r_n - r_p, target is -sum m_n rhat_np / r^2
      double d[3];
      double sq = 0.0;
      for (int64_t k = 0; k < 3; ++k) {
        d[k] = positions.at({q, k}) - positions.at({p, k});
        sq += d[k] * d[k];
      }
      const double r = std::sqrt(sq);
      for (int64_t k = 0; k < 3; ++k) {
        sample.vectors.at({p, k}) -= sample.cloud.masses[static_cast<size_t>(q)] * d[k] / (r * sq);
      }
    }
  }
  return sample;
}

LabeledSample gen_inertia(uint64_t seed) {
  RandomEngine rng(seed);
  LabeledSample sample;
  sample.task = "inertia";
  sample.seed = seed;

  const int64_t n = 2 + rng.uniform_int(9);  // 2..10 mass points
  NdArray positions({n + 1, 3});
  for (int64_t a = 0; a < n + 1; ++a) {
    for (int64_t k = 0; k < 3; ++k) positions.at({a, k}) = rng.uniform(-0.5, 0.5);
  }
  // the query point rides along as a massless extra point
  sample.cloud.positions = positions;
  sample.cloud.masses.assign(static_cast<size_t>(n + 1), 0.0);
  for (int64_t a = 0; a < n; ++a) sample.cloud.masses[static_cast<size_t>(a)] = rng.uniform(0.5, 2.0);
  sample.cloud.query_index = n;

  sample.matrix = NdArray({3, 3});
  for (int64_t p = 0; p < n; ++p) {
    double d[3];
    double sq = 0.0;
    for (int64_t k = 0; k < 3; ++k) {
      d[k] = positions.at({p, k}) - positions.at({n, k});
      sq += d[k] * d[k];
    }
    const double m = sample.cloud.masses[static_cast<size_t>(p)];
    for (int64_t i = 0; i < 3; ++i)
      for (int64_t j = 0; j < 3; ++j) {
        sample.matrix.at({i, j}) += m * ((i == j ? sq : 0.0) - d[i] * d[j]);
      }
  }
  return sample;
}

std::vector<LabeledSample> gen_gravity_set(int count, uint64_t seed) {
  std::vector<LabeledSample> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(gen_gravity(seed + static_cast<uint64_t>(i)));
  return out;
}

std::vector<LabeledSample> gen_inertia_set(int count, uint64_t seed) {
  std::vector<LabeledSample> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(gen_inertia(seed + static_cast<uint64_t>(i)));
  return out;
}

const std::vector<MissingPointCase>& missing_point_cases() {
  // square: any corner completes the square (the symmetric completion).
  // line: interior gap.  chiral_l: the marked end (kept out of chiral_r,
  // whose mirror context would make the pair ambiguous).  lshape/tshape:
  // interior block on the stem.  zigzag: interior elbow.
  static const std::vector<MissingPointCase> cases = {
      {0, 3}, {1, 1}, {2, 0}, {5, 1}, {6, 1}, {7, 1},
  };
  return cases;
}

int missing_point_num_types() { return 3; }

namespace {

int coordination(const TetrisShape& shape, int block) {
  int count = 0;
  for (int other = 0; other < 4; ++other) {
    if (other == block) continue;
    int sq = 0;
    for (int k = 0; k < 3; ++k) {
      const int d = shape.blocks[static_cast<size_t>(block)][static_cast<size_t>(k)] -
                    shape.blocks[static_cast<size_t>(other)][static_cast<size_t>(k)];
      sq += d * d;
    }
    if (sq == 1) ++count;
  }
  return count;
}

}  // namespace

std::vector<LabeledSample> gen_missing_point(int count, bool rotate, bool translate, uint64_t seed) {
  RandomEngine rng(seed);
  const auto& cases = missing_point_cases();
  const auto& shapes = tetris_shapes();
  std::vector<LabeledSample> out;
  for (int i = 0; i < count; ++i) {
    const MissingPointCase& mpc = cases[static_cast<size_t>(i) % cases.size()];
    const TetrisShape& shape = shapes[static_cast<size_t>(mpc.shape)];

    LabeledSample sample;
    sample.task = "missing_point";
    sample.seed = seed;
    sample.missing_type = coordination(shape, mpc.removed) - 1;

    const so3::Rotation g = rotate ? so3::Rotation::random(rng) : so3::Rotation();
    so3::Vec3 shift{0, 0, 0};
    if (translate) {
      for (auto& s : shift) s = rng.uniform(-5.0, 5.0);
    }

    sample.cloud.positions = NdArray({3, 3});
    int row = 0;
    for (int b = 0; b < 4; ++b) {
      const so3::Vec3 p{static_cast<double>(shape.blocks[static_cast<size_t>(b)][0]),
                        static_cast<double>(shape.blocks[static_cast<size_t>(b)][1]),
                        static_cast<double>(shape.blocks[static_cast<size_t>(b)][2])};
      const so3::Vec3 q = transform_point(p, g, shift);
      if (b == mpc.removed) {
        sample.missing_position = q;
        continue;
      }
      for (int64_t k = 0; k < 3; ++k) sample.cloud.positions.at({row, k}) = q[static_cast<size_t>(k)];
      ++row;
    }
    out.push_back(std::move(sample));
  }
  return out;
}

// --- JSON-lines persistence ----------------------------------------------------

void save_jsonl(const std::string& path, const std::vector<LabeledSample>& samples,
                const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_jsonl: cannot write '" + path + "'");
  json header;
  header["schema"] = "tfn.dataset.v1";
  header["config_hash"] = config_hash;
  out << header.dump() << '\n';

  for (const LabeledSample& s : samples) {
    json j;
    j["task"] = s.task;
    j["seed"] = s.seed;
    json pos = json::array();
    for (int64_t a = 0; a < s.cloud.num_points(); ++a) {
      pos.push_back({s.cloud.positions.at({a, 0}), s.cloud.positions.at({a, 1}), s.cloud.positions.at({a, 2})});
    }
    j["positions"] = std::move(pos);
    if (!s.cloud.masses.empty()) j["masses"] = s.cloud.masses;
    if (!s.cloud.types.empty()) j["types"] = s.cloud.types;
    if (s.cloud.query_index >= 0) j["query_index"] = s.cloud.query_index;

    if (s.task == "tetris") {
      j["target"] = {{"label", s.label}};
    } else if (s.task == "gravity") {
      json acc = json::array();
      for (int64_t a = 0; a < s.vectors.extent(0); ++a) {
        acc.push_back({s.vectors.at({a, 0}), s.vectors.at({a, 1}), s.vectors.at({a, 2})});
      }
      j["target"] = {{"accelerations", std::move(acc)}};
    } else if (s.task == "inertia") {
      json rows = json::array();
      for (int64_t i = 0; i < 3; ++i) {
        rows.push_back({s.matrix.at({i, 0}), s.matrix.at({i, 1}), s.matrix.at({i, 2})});
      }
      j["target"] = {{"inertia", std::move(rows)}};
    } else if (s.task == "missing_point") {
      j["target"] = {{"position", {s.missing_position[0], s.missing_position[1], s.missing_position[2]}},
                     {"type", s.missing_type}};
    } else {
      throw std::invalid_argument("save_jsonl: unknown task '" + s.task + "'");
    }
    out << j.dump() << '\n';
  }
}

std::vector<LabeledSample> load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_jsonl: cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_jsonl: empty file '" + path + "'");
  const json header = json::parse(line);
  if (header.value("schema", "") != "tfn.dataset.v1") {
    throw std::invalid_argument("load_jsonl: unsupported schema in '" + path + "'");
  }

  std::vector<LabeledSample> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    LabeledSample s;
    s.task = j.at("task").get<std::string>();
    s.seed = j.value("seed", 0ULL);
    const auto& pos = j.at("positions");
    const int64_t n = static_cast<int64_t>(pos.size());
    s.cloud.positions = NdArray({n, 3});
    for (int64_t a = 0; a < n; ++a) {
      for (int64_t k = 0; k < 3; ++k) s.cloud.positions.at({a, k}) = pos[static_cast<size_t>(a)][static_cast<size_t>(k)].get<double>();
    }
    if (j.contains("masses")) s.cloud.masses = j.at("masses").get<std::vector<double>>();
    if (j.contains("types")) s.cloud.types = j.at("types").get<std::vector<int>>();
    s.cloud.query_index = j.value("query_index", -1);

    const json& target = j.at("target");
    if (s.task == "tetris") {
      s.label = target.at("label").get<int>();
    } else if (s.task == "gravity") {
      const auto& acc = target.at("accelerations");
      s.vectors = NdArray({n, 3});
      for (int64_t a = 0; a < n; ++a) {
        for (int64_t k = 0; k < 3; ++k) s.vectors.at({a, k}) = acc[static_cast<size_t>(a)][static_cast<size_t>(k)].get<double>();
      }
    } else if (s.task == "inertia") {
      const auto& rows = target.at("inertia");
      s.matrix = NdArray({3, 3});
      for (int64_t i = 0; i < 3; ++i) {
        for (int64_t k = 0; k < 3; ++k) s.matrix.at({i, k}) = rows[static_cast<size_t>(i)][static_cast<size_t>(k)].get<double>();
      }
    } else if (s.task == "missing_point") {
      const auto& p = target.at("position");
      for (size_t k = 0; k < 3; ++k) s.missing_position[k] = p[k].get<double>();
      s.missing_type = target.at("type").get<int>();
    } else {
      throw std::invalid_argument("load_jsonl: unknown task '" + s.task + "'");
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace tfn::tasks
