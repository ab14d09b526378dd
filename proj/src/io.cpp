#include "dsse/io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "dsse/format.hpp"

namespace dsse {
namespace {

const std::set<std::string> kShuntKeys{"gs", "bs", "g_shunt", "b_shunt", "shunt", "bsh", "gsh",
                                       "charging", "b_charging", "line_charging"};

// Location-aware accessors over a parsed YAML document.
class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  YAML::Node load(const std::string& text) const {
    try {
      return YAML::Load(text);
    } catch (const YAML::ParserException& e) {
      throw ParseError(source_, e.mark.line + 1, e.mark.column + 1, e.msg);
    }
  }

  [[noreturn]] void fail(const YAML::Node& node, const std::string& what) const {
    const YAML::Mark mark = node.Mark();
    throw ParseError(source_, mark.line + 1, mark.column + 1, what);
  }

  void require_map(const YAML::Node& node, const std::string& what) const {
    if (!node.IsMap()) fail(node, what + " must be a mapping");
  }

  void require_seq(const YAML::Node& node, const std::string& what) const {
    if (!node.IsSequence()) fail(node, what + " must be a sequence");
  }

  // Rejects keys outside `allowed`; shunt keys get their own message.
  void check_keys(const YAML::Node& map, const std::set<std::string>& allowed,
                  const std::string& what) const {
    for (const auto& kv : map) {
      const std::string key = kv.first.as<std::string>();
      if (allowed.count(key)) continue;
      if (kShuntKeys.count(key)) {
        fail(kv.first, what + ": shunt field '" + key +
                           "' is not supported (shunt elements are outside the model)");
      }
      fail(kv.first, what + ": unknown field '" + key + "'");
    }
  }

  const YAML::Node field(const YAML::Node& map, const std::string& key, const std::string& what) const {
    const YAML::Node node = map[key];
    if (!node) fail(map, what + ": missing field '" + key + "'");
    return node;
  }

  double real(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be a number");
    try {
      return node.as<double>();
    } catch (const YAML::Exception&) {
      fail(node, what + " must be a number, got '" + node.Scalar() + "'");
    }
  }

  int integer(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be an integer");
    try {
      return node.as<int>();
    } catch (const YAML::Exception&) {
      fail(node, what + " must be an integer, got '" + node.Scalar() + "'");
    }
  }

  std::string text(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be a string");
    return node.Scalar();
  }

  double optional_real(const YAML::Node& map, const std::string& key, double fallback,
                       const std::string& what) const {
    const YAML::Node node = map[key];
    return node ? real(node, what + "." + key) : fallback;
  }

  template <int N>
  Eigen::Matrix<double, N, 1> vector(const YAML::Node& node, const std::string& what) const {
    require_seq(node, what);
    if (node.size() != N) fail(node, what + " must have " + std::to_string(N) + " entries");
    Eigen::Matrix<double, N, 1> v;
    for (int i = 0; i < N; ++i) v(i) = real(node[i], what);
    return v;
  }

  template <int N>
  Eigen::Matrix<double, N, N> matrix(const YAML::Node& node, const std::string& what) const {
    require_seq(node, what);
    if (node.size() != N) fail(node, what + " must have " + std::to_string(N) + " rows");
    Eigen::Matrix<double, N, N> m;
    for (int i = 0; i < N; ++i) m.row(i) = vector<N>(node[i], what).transpose();
    return m;
  }

 private:
  std::string source_;
};

BusKind parse_kind(const Reader& reader, const YAML::Node& node) {
  const std::string kind = reader.text(node, "bus kind");
  if (kind == "slack") return BusKind::Slack;
  if (kind == "pv") return BusKind::PV;
  if (kind == "pq") return BusKind::PQ;
  reader.fail(node, "bus kind must be slack, pv or pq, got '" + kind + "'");
}

const char* kind_name(BusKind kind) {
  switch (kind) {
    case BusKind::Slack:
      return "slack";
    case BusKind::PV:
      return "pv";
    case BusKind::PQ:
      return "pq";
  }
  return "pq";
}

void emit_number(YAML::Emitter& out, const char* key, double value) {
  out << YAML::Key << key << YAML::Value << format_double(value);
}

template <typename Derived>
void emit_vector(YAML::Emitter& out, const Eigen::MatrixBase<Derived>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (Index i = 0; i < v.size(); ++i) out << format_double(v(i));
  out << YAML::EndSeq;
}

template <typename Derived>
void emit_matrix(YAML::Emitter& out, const Eigen::MatrixBase<Derived>& m) {
  out << YAML::Flow << YAML::BeginSeq;
  for (Index i = 0; i < m.rows(); ++i) emit_vector(out, m.row(i));
  out << YAML::EndSeq;
}

std::string path_source(const std::filesystem::path& path) { return path.string(); }

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("failed writing " + path.string());
}

GridCase parse_case_string(const std::string& text, const std::string& source) {
  const Reader reader(source);
  const YAML::Node root = reader.load(text);
  reader.require_map(root, "case");
  reader.check_keys(root, {"name", "base_mva", "buses", "lines"}, "case");

  GridCase grid;
  grid.name = root["name"] ? reader.text(root["name"], "name") : std::string();
  grid.base_mva = reader.optional_real(root, "base_mva", 100.0, "case");
  if (!(grid.base_mva > 0.0)) reader.fail(root["base_mva"], "base_mva must be positive");

  const YAML::Node buses = reader.field(root, "buses", "case");
  reader.require_seq(buses, "buses");
  std::map<int, YAML::Node> bus_nodes;
  for (const auto& node : buses) {
    reader.require_map(node, "bus record");
    reader.check_keys(node, {"id", "kind", "p_load", "q_load", "p_gen", "q_gen", "v_setpoint"}, "bus");
    Bus bus;
    bus.id = reader.integer(reader.field(node, "id", "bus"), "bus id");
    bus.kind = node["kind"] ? parse_kind(reader, node["kind"]) : BusKind::PQ;
    bus.p_load = reader.optional_real(node, "p_load", 0.0, "bus");
    bus.q_load = reader.optional_real(node, "q_load", 0.0, "bus");
    bus.p_gen = reader.optional_real(node, "p_gen", 0.0, "bus");
    bus.q_gen = reader.optional_real(node, "q_gen", 0.0, "bus");
    bus.v_setpoint = reader.optional_real(node, "v_setpoint", 1.0, "bus");
    if (!(bus.v_setpoint > 0.0)) reader.fail(node, "bus " + std::to_string(bus.id) + ": v_setpoint must be positive");
    if (!bus_nodes.emplace(bus.id, node).second) {
      reader.fail(node, "duplicate bus id " + std::to_string(bus.id));
    }
    grid.buses.push_back(bus);
  }

  const YAML::Node lines = reader.field(root, "lines", "case");
  reader.require_seq(lines, "lines");
  std::set<std::pair<int, int>> seen;
  for (const auto& node : lines) {
    reader.require_map(node, "line record");
    reader.check_keys(node, {"from", "to", "r", "x", "g", "b"}, "line");
    const int from = reader.integer(reader.field(node, "from", "line"), "line from");
    const int to = reader.integer(reader.field(node, "to", "line"), "line to");
    const std::string label = "line " + std::to_string(from) + "-" + std::to_string(to);
    if (!bus_nodes.count(from) || !bus_nodes.count(to)) {
      reader.fail(node, label + " references an unknown bus");
    }
    if (from == to) reader.fail(node, label + " is a self loop");
    if (!seen.insert(std::minmax(from, to)).second) reader.fail(node, "duplicate " + label);
    const bool impedance = node["r"] || node["x"];
    const bool admittance = node["g"] || node["b"];
    if (impedance == admittance) {
      reader.fail(node, label + ": give either r and x or g and b");
    }
    if (impedance) {
      const double r = reader.real(reader.field(node, "r", label), label + ".r");
      const double x = reader.real(reader.field(node, "x", label), label + ".x");
      if (r * r + x * x == 0.0) reader.fail(node, label + " has zero impedance");
      grid.lines.push_back(Line::from_impedance(from, to, r, x));
    } else {
      const double g = reader.real(reader.field(node, "g", label), label + ".g");
      const double b = reader.real(reader.field(node, "b", label), label + ".b");
      grid.lines.push_back(Line{from, to, g, b});
    }
  }
  try {
    validate_case(grid);
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": " + e.what());
  }
  return grid;
}

GridCase parse_case(const std::filesystem::path& path) {
  return parse_case_string(read_text_file(path), path_source(path));
}

std::string emit_case(const GridCase& grid) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << grid.name;
  emit_number(out, "base_mva", grid.base_mva);
  out << YAML::Key << "buses" << YAML::Value << YAML::BeginSeq;
  for (const auto& bus : grid.buses) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << bus.id;
    out << YAML::Key << "kind" << YAML::Value << kind_name(bus.kind);
    emit_number(out, "p_load", bus.p_load);
    emit_number(out, "q_load", bus.q_load);
    emit_number(out, "p_gen", bus.p_gen);
    emit_number(out, "q_gen", bus.q_gen);
    emit_number(out, "v_setpoint", bus.v_setpoint);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "lines" << YAML::Value << YAML::BeginSeq;
  for (const auto& line : grid.lines) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "from" << YAML::Value << line.from;
    out << YAML::Key << "to" << YAML::Value << line.to;
    emit_number(out, "g", line.g);
    emit_number(out, "b", line.b);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

RegionAssignment parse_partition_string(const std::string& text, const std::string& source) {
  const Reader reader(source);
  const YAML::Node root = reader.load(text);
  reader.require_map(root, "partition");
  reader.check_keys(root, {"name", "regions"}, "partition");
  const YAML::Node regions = reader.field(root, "regions", "partition");
  reader.require_map(regions, "regions");
  RegionAssignment assignment;
  std::set<int> assigned;
  for (const auto& kv : regions) {
    const int label = reader.integer(kv.first, "region label");
    reader.require_seq(kv.second, "region " + std::to_string(label));
    if (kv.second.size() == 0) reader.fail(kv.second, "region " + std::to_string(label) + " is empty");
    auto& buses = assignment[label];
    for (const auto& bus_node : kv.second) {
      const int bus = reader.integer(bus_node, "bus id");
      if (!assigned.insert(bus).second) {
        reader.fail(bus_node, "bus " + std::to_string(bus) + " assigned to more than one region");
      }
      buses.push_back(bus);
    }
  }
  return assignment;
}

RegionAssignment parse_partition(const std::filesystem::path& path) {
  return parse_partition_string(read_text_file(path), path_source(path));
}

std::string emit_partition(const RegionAssignment& assignment) {
  YAML::Emitter out;
  out << YAML::BeginMap << YAML::Key << "regions" << YAML::Value << YAML::BeginMap;
  for (const auto& [label, buses] : assignment) {
    out << YAML::Key << label << YAML::Value << YAML::Flow << buses;
  }
  out << YAML::EndMap << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

MeasurementSet parse_measurements_string(const std::string& text, const std::string& source) {
  const Reader reader(source);
  const YAML::Node root = reader.load(text);
  reader.require_map(root, "measurement file");
  reader.check_keys(root, {"seed", "nodal", "lines"}, "measurement file");
  MeasurementSet set;
  if (root["seed"]) {
    try {
      set.seed = root["seed"].as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      reader.fail(root["seed"], "seed must be a non-negative integer");
    }
  }
  if (root["nodal"]) {
    reader.require_seq(root["nodal"], "nodal");
    for (const auto& node : root["nodal"]) {
      reader.require_map(node, "nodal record");
      reader.check_keys(node, {"bus", "value", "weight"}, "nodal record");
      NodalMeasurement m;
      m.bus = reader.integer(reader.field(node, "bus", "nodal record"), "bus");
      m.value = reader.vector<4>(reader.field(node, "value", "nodal record"), "nodal value");
      m.weight = reader.matrix<4>(reader.field(node, "weight", "nodal record"), "nodal weight");
      set.nodal.push_back(m);
    }
  }
  if (root["lines"]) {
    reader.require_seq(root["lines"], "lines");
    for (const auto& node : root["lines"]) {
      reader.require_map(node, "line record");
      reader.check_keys(node, {"from", "to", "value", "weight"}, "line record");
      LineMeasurement m;
      m.from = reader.integer(reader.field(node, "from", "line record"), "from");
      m.to = reader.integer(reader.field(node, "to", "line record"), "to");
      m.value = reader.vector<3>(reader.field(node, "value", "line record"), "line value");
      m.weight = reader.matrix<3>(reader.field(node, "weight", "line record"), "line weight");
      set.lines.push_back(m);
    }
  }
  return set;
}

MeasurementSet parse_measurements(const std::filesystem::path& path) {
  return parse_measurements_string(read_text_file(path), path_source(path));
}

std::string emit_measurements(const MeasurementSet& set) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "seed" << YAML::Value << set.seed;
  out << YAML::Key << "nodal" << YAML::Value << YAML::BeginSeq;
  for (const auto& m : set.nodal) {
    out << YAML::BeginMap;
    out << YAML::Key << "bus" << YAML::Value << m.bus;
    out << YAML::Key << "value" << YAML::Value;
    emit_vector(out, m.value);
    out << YAML::Key << "weight" << YAML::Value;
    emit_matrix(out, m.weight);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "lines" << YAML::Value << YAML::BeginSeq;
  for (const auto& m : set.lines) {
    out << YAML::BeginMap;
    out << YAML::Key << "from" << YAML::Value << m.from;
    out << YAML::Key << "to" << YAML::Value << m.to;
    out << YAML::Key << "value" << YAML::Value;
    emit_vector(out, m.value);
    out << YAML::Key << "weight" << YAML::Value;
    emit_matrix(out, m.weight);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

namespace {

struct MatTable {
  std::vector<std::vector<double>> rows;
  int line = 0;  // 1-based line of the opening bracket
};

// Extracts `mpc.<name> = [ ... ];` as numeric rows. Rows end at ';' or a
// newline; '%' starts a comment.
MatTable read_table(const std::string& text, const std::string& name, const std::string& source) {
  const std::string key = "mpc." + name;
  std::size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    const std::size_t after = pos + key.size();
    std::size_t eq = text.find_first_not_of(" \t", after);
    if (eq != std::string::npos && text[eq] == '=') break;
    pos = after;
  }
  if (pos == std::string::npos) throw ParseError(source, 1, 1, "missing table " + key);
  const std::size_t open = text.find('[', pos);
  if (open == std::string::npos) {
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + pos, '\n'));
    throw ParseError(source, line, 1, key + " is not a bracketed table");
  }
  MatTable table;
  table.line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + open, '\n'));
  int line = table.line;
  std::vector<double> row;
  std::string token;
  const auto flush_token = [&] {
    if (token.empty()) return;
    double value = 0.0;
    const char* begin = token.data();
    const auto [end, ec] = std::from_chars(begin, begin + token.size(), value);
    if (ec != std::errc() || end != begin + token.size()) {
      throw ParseError(source, line, 1, key + ": bad number '" + token + "'");
    }
    row.push_back(value);
    token.clear();
  };
  const auto flush_row = [&] {
    flush_token();
    if (!row.empty()) table.rows.push_back(std::move(row));
    row.clear();
  };
  for (std::size_t i = open + 1; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '%') {
      while (i < text.size() && text[i] != '\n') ++i;
      flush_row();
      ++line;
      continue;
    }
    if (c == ']') {
      flush_row();
      return table;
    }
    if (c == '\n') {
      flush_row();
      ++line;
    } else if (c == ';') {
      flush_row();
    } else if (c == ' ' || c == '\t' || c == ',' || c == '\r') {
      flush_token();
    } else {
      token.push_back(c);
    }
  }
  throw ParseError(source, table.line, 1, key + ": missing closing ']'");
}

}  // namespace

GridCase parse_matpower_string(const std::string& text, const std::string& name,
                               std::vector<std::string>* dropped) {
  const std::string source = name;
  GridCase grid;
  grid.name = name;
  {
    const std::regex base(R"(mpc\.baseMVA\s*=\s*([0-9.eE+-]+))");
    std::smatch match;
    if (!std::regex_search(text, match, base)) throw ParseError(source, 1, 1, "missing mpc.baseMVA");
    grid.base_mva = std::stod(match[1]);
  }
  const MatTable bus = read_table(text, "bus", source);
  const MatTable gen = read_table(text, "gen", source);
  const MatTable branch = read_table(text, "branch", source);
  std::set<std::string> notes;

  std::map<int, std::size_t> index;
  for (std::size_t r = 0; r < bus.rows.size(); ++r) {
    const auto& row = bus.rows[r];
    if (row.size() < 8) throw ParseError(source, bus.line + 1 + static_cast<int>(r), 1, "bus row has fewer than 8 columns");
    Bus b;
    b.id = static_cast<int>(row[0]);
    const int type = static_cast<int>(row[1]);
    b.kind = type == 3 ? BusKind::Slack : type == 2 ? BusKind::PV : BusKind::PQ;
    if (type == 4) notes.insert("isolated bus type treated as PQ");
    b.p_load = row[2] / grid.base_mva;
    b.q_load = row[3] / grid.base_mva;
    if (row[4] != 0.0 || row[5] != 0.0) notes.insert("bus shunts (Gs, Bs)");
    b.v_setpoint = row[7];
    index[b.id] = grid.buses.size();
    grid.buses.push_back(b);
  }
  for (std::size_t r = 0; r < gen.rows.size(); ++r) {
    const auto& row = gen.rows[r];
    if (row.size() < 8) throw ParseError(source, gen.line + 1 + static_cast<int>(r), 1, "gen row has fewer than 8 columns");
    if (row[7] <= 0.0) {
      notes.insert("out-of-service generators");
      continue;
    }
    const auto it = index.find(static_cast<int>(row[0]));
    if (it == index.end()) throw UnknownBusReference(source + ": generator at unknown bus");
    Bus& b = grid.buses[it->second];
    b.p_gen += row[1] / grid.base_mva;
    b.q_gen += row[2] / grid.base_mva;
    if (b.kind != BusKind::PQ) b.v_setpoint = row[5];
  }
  std::map<std::pair<int, int>, std::size_t> line_index;
  for (std::size_t r = 0; r < branch.rows.size(); ++r) {
    const auto& row = branch.rows[r];
    if (row.size() < 4) throw ParseError(source, branch.line + 1 + static_cast<int>(r), 1, "branch row has fewer than 4 columns");
    if (row.size() > 10 && row[10] <= 0.0) {
      notes.insert("out-of-service branches");
      continue;
    }
    if (row.size() > 4 && row[4] != 0.0) notes.insert("line charging (branch b)");
    if (row.size() > 8 && row[8] != 0.0 && row[8] != 1.0) notes.insert("transformer tap ratios");
    if (row.size() > 9 && row[9] != 0.0) notes.insert("phase shift angles");
    const int from = static_cast<int>(row[0]);
    const int to = static_cast<int>(row[1]);
    const Line line = Line::from_impedance(from, to, row[2], row[3]);
    const auto key = std::minmax(from, to);
    const auto found = line_index.find(key);
    if (found != line_index.end()) {
      grid.lines[found->second].g += line.g;
      grid.lines[found->second].b += line.b;
      notes.insert("parallel branches merged");
      continue;
    }
    line_index[key] = grid.lines.size();
    grid.lines.push_back(line);
  }
  validate_case(grid);
  if (dropped != nullptr) dropped->assign(notes.begin(), notes.end());
  return grid;
}

GridCase parse_matpower(const std::filesystem::path& path, std::vector<std::string>* dropped) {
  return parse_matpower_string(read_text_file(path), path.stem().string(), dropped);
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string output_header(std::uint64_t seed, std::uint64_t config_hash) {
  std::ostringstream out;
  out << "# " << kToolVersion << "\n# seed: " << seed << "\n# config_hash: " << std::hex
      << config_hash << "\n";
  return out.str();
}

std::string history_csv_header(std::size_t regions) {
  std::ostringstream out;
  out << "method,k,consensus_violation,step_norm,objective";
  for (std::size_t i = 1; i <= regions; ++i) out << ",inner_" << i;
  out << ",upload_floats,download_floats,state_error,regularized\n";
  return out.str();
}

std::string history_csv_rows(const std::vector<IterationRecord>& history, const std::string& method) {
  std::ostringstream out;
  for (const auto& rec : history) {
    out << method << ',' << rec.iteration << ',' << format_double(rec.consensus_violation) << ','
        << format_double(rec.step_norm) << ',' << format_double(rec.objective);
    for (int inner : rec.inner_iterations) out << ',' << inner;
    out << ',' << rec.upload_floats << ',' << rec.download_floats << ','
        << (std::isnan(rec.state_error) ? std::string() : format_double(rec.state_error)) << ','
        << (rec.regularized ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string comm_csv(const CommLog& log) {
  std::ostringstream out;
  out << "k,upload_formula,upload_actual,upload_delta,download_formula,download_actual,download_delta\n";
  for (const auto& r : log.records) {
    out << r.iteration << ',' << r.upload_formula << ',' << r.upload_actual << ',' << r.upload_delta()
        << ',';
    if (r.download_phase) {
      out << r.download_formula << ',' << r.download_actual << ',' << r.download_delta();
    } else {
      out << ",0,";
    }
    out << '\n';
  }
  return out.str();
}

std::string emit_summary(const RunSummary& s) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "tool" << YAML::Value << kToolVersion;
  out << YAML::Key << "method" << YAML::Value << s.method;
  out << YAML::Key << "case" << YAML::Value << s.case_name;
  out << YAML::Key << "regions" << YAML::Value << s.regions;
  out << YAML::Key << "aux_pairs" << YAML::Value << s.aux_pairs;
  out << YAML::Key << "seed" << YAML::Value << s.seed;
  emit_number(out, "rho", s.rho);
  emit_number(out, "tolerance", s.tolerance);
  out << YAML::Key << "converged" << YAML::Value << s.converged;
  out << YAML::Key << "iterations" << YAML::Value << s.iterations;
  emit_number(out, "consensus_violation", s.consensus_violation);
  emit_number(out, "step_norm", s.step_norm);
  emit_number(out, "objective", s.objective);
  emit_number(out, "state_error", s.state_error);
  out << YAML::Key << "diagnostic" << YAML::Value << s.diagnostic;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string state_csv(const GridCase& grid, const DenseVector& state) {
  if (state.size() != kStatesPerNode * grid.size()) throw DimensionMismatch("state_csv: state size");
  std::ostringstream out;
  out << "bus,theta,v,p,q\n";
  for (Index k = 0; k < grid.size(); ++k) {
    out << grid.buses[k].id;
    for (Index c = 0; c < kStatesPerNode; ++c) out << ',' << format_double(state(kStatesPerNode * k + c));
    out << '\n';
  }
  return out.str();
}

}  // namespace dsse
