#include "gmshape/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace gmshape {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error(path + ": " + what);
}

[[noreturn]] void fail_line(const std::string& path, std::size_t line, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) fail(path, "cannot open for reading");
  return in;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) fail(path, "cannot open for writing");
  return out;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
void write_le(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const std::string& path) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) fail(path, "unexpected end of file");
  return value;
}

}  // namespace

void write_gmm(const std::string& path, const GaussianMixture3& m) {
  std::ofstream out = open_out(path);
  out << "{\n  \"k\": " << m.size() << ",\n  \"components\": [\n";
  for (int i = 0; i < m.size(); ++i) {
    const GaussianComponent& c = m.components[i];
    const Mat3& l = c.precision_factor;
    out << "    {\"weight\": " << fmt17(c.weight) << ", \"mean\": [" << fmt17(c.mean.x()) << ", "
        << fmt17(c.mean.y()) << ", " << fmt17(c.mean.z()) << "], \"precision_factor_lower\": ["
        << fmt17(l(0, 0)) << ", " << fmt17(l(1, 0)) << ", " << fmt17(l(1, 1)) << ", "
        << fmt17(l(2, 0)) << ", " << fmt17(l(2, 1)) << ", " << fmt17(l(2, 2)) << "]}"
        << (i + 1 < m.size() ? "," : "") << "\n";
  }
  out << "  ]\n}\n";
  if (!out) fail(path, "write failed");
}

GaussianMixture3 read_gmm(const std::string& path) {
  std::ifstream in = open_in(path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(path, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.contains("k") || !doc.contains("components")) fail(path, "missing k/components");
  const auto& comps = doc["components"];
  if (!comps.is_array() || comps.empty()) fail(path, "components must be a non-empty array");
  if (doc["k"].get<int>() != static_cast<int>(comps.size()))
    fail(path, "k does not match the component count");

  GaussianMixture3 m;
  double wsum = 0.0;
  for (const auto& jc : comps) {
    GaussianComponent c;
    c.weight = jc.at("weight").get<double>();
    const auto& mean = jc.at("mean");
    const auto& lower = jc.at("precision_factor_lower");
    if (mean.size() != 3 || lower.size() != 6) fail(path, "component fields have wrong arity");
    for (int a = 0; a < 3; ++a) c.mean[a] = mean[a].get<double>();
    Mat3 l = Mat3::Zero();
    l(0, 0) = lower[0].get<double>();
    l(1, 0) = lower[1].get<double>();
    l(1, 1) = lower[2].get<double>();
    l(2, 0) = lower[3].get<double>();
    l(2, 1) = lower[4].get<double>();
    l(2, 2) = lower[5].get<double>();
    if (l(0, 0) <= 0.0 || l(1, 1) <= 0.0 || l(2, 2) <= 0.0)
      fail(path, "precision factor diagonal must be positive");
    if (c.weight <= 0.0) fail(path, "weights must be positive");
    c.precision_factor = l;
    wsum += c.weight;
    m.components.push_back(c);
  }
  if (std::abs(wsum - 1.0) > 1e-6) fail(path, "weights do not sum to 1");
  return m;
}

void write_pgm(const std::string& path, const SilhouetteImage& image) {
  std::ofstream out = open_out(path, std::ios::binary);
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  std::vector<unsigned char> row(image.width);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const double v = std::clamp(image.at(x, y), 0.0, 1.0);
      row[x] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
  if (!out) fail(path, "write failed");
}

SilhouetteImage read_pgm(const std::string& path) {
  std::ifstream in = open_in(path, std::ios::binary);
  auto next_token = [&]() {
    std::string tok;
    while (in) {
      const int c = in.get();
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) break;
        continue;
      }
      if (c == EOF) break;
      tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) fail(path, "truncated PGM header");
    return tok;
  };
  if (next_token() != "P5") fail(path, "not a binary PGM (P5) file");
  const int w = std::stoi(next_token());
  const int h = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (w < 1 || h < 1 || maxval != 255) fail(path, "unsupported PGM geometry or depth");

  SilhouetteImage img(w, h);
  std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(buf.data()), buf.size());
  if (!in) fail(path, "truncated PGM pixel data");
  for (std::size_t i = 0; i < buf.size(); ++i) img.values[i] = buf[i] / 255.0;
  return img;
}

void write_voxel_grid(const std::string& path, const VoxelGrid& grid) {
  std::ofstream out = open_out(path, std::ios::binary);
  for (int a = 0; a < 3; ++a) write_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid.dims[a]));
  write_le<float>(out, static_cast<float>(grid.spacing));
  for (int a = 0; a < 3; ++a) write_le<float>(out, static_cast<float>(grid.origin[a]));
  for (double v : grid.values) write_le<float>(out, static_cast<float>(v));
  if (!out) fail(path, "write failed");
}

VoxelGrid read_voxel_grid(const std::string& path) {
  std::ifstream in = open_in(path, std::ios::binary);
  VoxelGrid grid;
  for (int a = 0; a < 3; ++a) grid.dims[a] = static_cast<int>(read_le<std::uint32_t>(in, path));
  if ((grid.dims.array() < 1).any() || grid.size() > (1ull << 33))
    fail(path, "implausible voxel grid dimensions");
  grid.spacing = read_le<float>(in, path);
  for (int a = 0; a < 3; ++a) grid.origin[a] = read_le<float>(in, path);
  grid.values.resize(grid.size());
  std::vector<float> buf(grid.size());
  in.read(reinterpret_cast<char*>(buf.data()), buf.size() * sizeof(float));
  if (!in) fail(path, "truncated voxel data");
  std::copy(buf.begin(), buf.end(), grid.values.begin());
  return grid;
}

VoxelGrid read_binvox(const std::string& path) {
  std::ifstream in = open_in(path, std::ios::binary);
  std::string line;
  if (!std::getline(in, line) || line.rfind("#binvox", 0) != 0)
    fail(path, "missing #binvox header");

  int d0 = 0, d1 = 0, d2 = 0;
  Vec3 translate = Vec3::Zero();
  double scale = 1.0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "data") break;
    if (key == "dim") ls >> d0 >> d1 >> d2;
    else if (key == "translate") ls >> translate.x() >> translate.y() >> translate.z();
    else if (key == "scale") ls >> scale;
  }
  if (d0 < 1 || d1 < 1 || d2 < 1) fail(path, "missing or invalid dim line");

  const std::size_t total = static_cast<std::size_t>(d0) * d1 * d2;
  std::vector<unsigned char> dense(total);
  std::size_t filled = 0;
  while (filled < total) {
    const int value = in.get();
    const int count = in.get();
    if (value == EOF || count == EOF) fail(path, "truncated run-length data");
    if (filled + count > total) fail(path, "run-length data overruns the grid");
    std::memset(dense.data() + filled, static_cast<unsigned char>(value), count);
    filled += count;
  }

  // binvox stores y fastest, then z, then x; re-order to x-fastest.
  VoxelGrid grid;
  grid.dims = Vec3i(d0, d1, d2);
  grid.spacing = scale / d0;
  grid.origin = translate + Vec3::Constant(0.5 * grid.spacing);
  grid.values.assign(total, 0.0);
  std::size_t src = 0;
  for (int x = 0; x < d0; ++x)
    for (int z = 0; z < d2; ++z)
      for (int y = 0; y < d1; ++y, ++src)
        grid.values[grid.index(x, y, z)] = dense[src] ? 1.0 : 0.0;
  return grid;
}

void write_cameras(const std::string& path, const std::vector<Camera>& cameras) {
  std::ofstream out = open_out(path);
  for (const Camera& cam : cameras) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out << fmt17(cam.rotation(r, c)) << " ";
    for (int a = 0; a < 3; ++a) out << fmt17(cam.translation[a]) << " ";
    out << fmt17(cam.focal_px) << " " << fmt17(cam.principal_point.x()) << " "
        << fmt17(cam.principal_point.y()) << " " << cam.width << " " << cam.height << "\n";
  }
  if (!out) fail(path, "write failed");
}

std::vector<Camera> read_cameras(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<Camera> cams;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Camera cam;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        if (!(ls >> cam.rotation(r, c))) fail_line(path, line_no, "bad rotation entry");
    for (int a = 0; a < 3; ++a)
      if (!(ls >> cam.translation[a])) fail_line(path, line_no, "bad translation entry");
    if (!(ls >> cam.focal_px >> cam.principal_point.x() >> cam.principal_point.y() >> cam.width >>
          cam.height))
      fail_line(path, line_no, "bad intrinsics");
    cams.push_back(cam);
  }
  return cams;
}

void write_obj(const std::string& path, const TriangleMesh& mesh) {
  std::ofstream out = open_out(path);
  for (const Vec3& v : mesh.vertices)
    out << "v " << fmt17(v.x()) << " " << fmt17(v.y()) << " " << fmt17(v.z()) << "\n";
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
  if (!out) fail(path, "write failed");
}

TriangleMesh read_obj(const std::string& path) {
  std::ifstream in = open_in(path);
  TriangleMesh mesh;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z())) fail_line(path, line_no, "malformed vertex");
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        // "i", "i/t", "i/t/n", "i//n"; negative indices count from the end
        const std::size_t slash = tok.find('/');
        const std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
        int v = 0;
        try {
          v = std::stoi(head);
        } catch (...) {
          fail_line(path, line_no, "malformed face index '" + tok + "'");
        }
        if (v < 0) v = static_cast<int>(mesh.vertices.size()) + v + 1;
        if (v < 1 || v > static_cast<int>(mesh.vertices.size()))
          fail_line(path, line_no, "face index out of range");
        idx.push_back(v - 1);
      }
      if (idx.size() < 3) fail_line(path, line_no, "face with fewer than 3 vertices");
      for (std::size_t i = 1; i + 1 < idx.size(); ++i)
        mesh.triangles.push_back({idx[0], idx[i], idx[i + 1]});
    }
  }
  return mesh;
}

void write_ply(const std::string& path, const TriangleMesh& mesh) {
  std::ofstream out = open_out(path, std::ios::binary);
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << mesh.vertices.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "element face " << mesh.triangles.size() << "\n"
      << "property list uchar int vertex_indices\nend_header\n";
  for (const Vec3& v : mesh.vertices) {
    write_le<float>(out, static_cast<float>(v.x()));
    write_le<float>(out, static_cast<float>(v.y()));
    write_le<float>(out, static_cast<float>(v.z()));
  }
  for (const auto& t : mesh.triangles) {
    write_le<unsigned char>(out, 3);
    for (int a = 0; a < 3; ++a) write_le<std::int32_t>(out, t[a]);
  }
  if (!out) fail(path, "write failed");
}

namespace {

double read_scalar(std::istream& in, const std::string& type, const std::string& path) {
  if (type == "float" || type == "float32") return read_le<float>(in, path);
  if (type == "double" || type == "float64") return read_le<double>(in, path);
  if (type == "char" || type == "int8") return read_le<std::int8_t>(in, path);
  if (type == "uchar" || type == "uint8") return read_le<std::uint8_t>(in, path);
  if (type == "short" || type == "int16") return read_le<std::int16_t>(in, path);
  if (type == "ushort" || type == "uint16") return read_le<std::uint16_t>(in, path);
  if (type == "int" || type == "int32") return read_le<std::int32_t>(in, path);
  if (type == "uint" || type == "uint32") return read_le<std::uint32_t>(in, path);
  fail(path, "unsupported PLY property type " + type);
}

}  // namespace

TriangleMesh read_ply(const std::string& path) {
  std::ifstream in = open_in(path, std::ios::binary);
  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply") fail(path, "missing ply magic");

  bool binary = false;
  std::size_t n_vertices = 0, n_faces = 0;
  struct Property {
    std::string type;
    std::string name;
    bool is_list = false;
    std::string count_type, item_type;
  };
  std::vector<Property> vertex_props, face_props;
  std::vector<Property>* current = nullptr;

  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "end_header") break;
    if (key == "comment") continue;
    if (key == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "binary_little_endian") binary = true;
      else if (fmt == "ascii") binary = false;
      else fail(path, "unsupported PLY format " + fmt);
    } else if (key == "element") {
      std::string name;
      std::size_t count;
      ls >> name >> count;
      if (name == "vertex") {
        n_vertices = count;
        current = &vertex_props;
      } else if (name == "face") {
        n_faces = count;
        current = &face_props;
      } else {
        current = nullptr;  // skipping unknown elements is unsupported below
        if (count != 0) fail(path, "unsupported PLY element " + name);
      }
    } else if (key == "property") {
      if (!current) continue;
      Property p;
      ls >> p.type;
      if (p.type == "list") {
        p.is_list = true;
        ls >> p.count_type >> p.item_type >> p.name;
      } else {
        ls >> p.name;
      }
      current->push_back(p);
    }
  }

  TriangleMesh mesh;
  mesh.vertices.resize(n_vertices);

  if (binary) {
    for (std::size_t v = 0; v < n_vertices; ++v) {
      for (const Property& p : vertex_props) {
        const double value = read_scalar(in, p.type, path);
        if (p.name == "x") mesh.vertices[v].x() = value;
        else if (p.name == "y") mesh.vertices[v].y() = value;
        else if (p.name == "z") mesh.vertices[v].z() = value;
      }
    }
    for (std::size_t f = 0; f < n_faces; ++f) {
      std::vector<int> idx;
      for (const Property& p : face_props) {
        if (!p.is_list) {
          read_scalar(in, p.type, path);
          continue;
        }
        const int count = static_cast<int>(read_scalar(in, p.count_type, path));
        idx.resize(count);
        for (int i = 0; i < count; ++i)
          idx[i] = static_cast<int>(read_scalar(in, p.item_type, path));
      }
      for (std::size_t i = 1; i + 1 < idx.size(); ++i)
        mesh.triangles.push_back({idx[0], idx[i], idx[i + 1]});
    }
  } else {
    for (std::size_t v = 0; v < n_vertices; ++v) {
      if (!std::getline(in, line)) fail(path, "truncated vertex data");
      std::istringstream ls(line);
      double value;
      for (const Property& p : vertex_props) {
        if (!(ls >> value)) fail(path, "malformed vertex line");
        if (p.name == "x") mesh.vertices[v].x() = value;
        else if (p.name == "y") mesh.vertices[v].y() = value;
        else if (p.name == "z") mesh.vertices[v].z() = value;
      }
    }
    for (std::size_t f = 0; f < n_faces; ++f) {
      if (!std::getline(in, line)) fail(path, "truncated face data");
      std::istringstream ls(line);
      int count;
      if (!(ls >> count)) fail(path, "malformed face line");
      std::vector<int> idx(count);
      for (int i = 0; i < count; ++i)
        if (!(ls >> idx[i])) fail(path, "malformed face line");
      for (std::size_t i = 1; i + 1 < idx.size(); ++i)
        mesh.triangles.push_back({idx[0], idx[i], idx[i + 1]});
    }
  }

  for (const auto& t : mesh.triangles)
    for (int a = 0; a < 3; ++a)
      if (t[a] < 0 || t[a] >= static_cast<int>(mesh.vertices.size()))
        fail(path, "face index out of range");
  return mesh;
}

void write_xyz(const std::string& path, const PointList& points) {
  std::ofstream out = open_out(path);
  for (const Vec3& p : points)
    out << fmt17(p.x()) << " " << fmt17(p.y()) << " " << fmt17(p.z()) << "\n";
  if (!out) fail(path, "write failed");
}

PointList read_xyz(const std::string& path) {
  std::ifstream in = open_in(path);
  PointList points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Vec3 p;
    if (!(ls >> p.x() >> p.y() >> p.z())) fail_line(path, line_no, "malformed point");
    points.push_back(p);
  }
  return points;
}

}  // namespace gmshape
