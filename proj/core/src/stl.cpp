#include "tacsim/stl.hpp"

#include "tacsim/errors.hpp"
#include "tacsim/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <string_view>
#include <unordered_map>

namespace tacsim {

namespace {

static_assert(std::endian::native == std::endian::little, "STL reader assumes a little-endian host");

constexpr std::size_t kHeaderBytes = 80;
constexpr std::size_t kFacetBytes = 50;

class VertexWelder {
public:
  explicit VertexWelder(TriangleMesh& mesh) : mesh_(mesh) {}

  std::uint32_t add(const Vec3& p) {
    const Key k = key_of(p);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = map_.find({k.x + dx, k.y + dy, k.z + dz});
          if (it == map_.end()) continue;
          for (auto idx : it->second) {
            if ((mesh_.vertices[idx] - p).norm() <= kStlWeldTolerance) return idx;
          }
        }
    if (mesh_.vertices.size() >= std::numeric_limits<std::uint32_t>::max()) {
      throw ParseError("vertex count overflow", offset_);
    }
    const auto idx = static_cast<std::uint32_t>(mesh_.vertices.size());
    mesh_.vertices.push_back(p);
    map_[k].push_back(idx);
    return idx;
  }

  void set_offset(std::size_t offset) { offset_ = offset; }

private:
  struct Key {
    std::int64_t x, y, z;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = 1469598103934665603ull;
      for (auto v : {k.x, k.y, k.z}) {
        h ^= static_cast<std::uint64_t>(v);
        h *= 1099511628211ull;
      }
      return static_cast<std::size_t>(h);
    }
  };

  static Key key_of(const Vec3& p) {
    return {static_cast<std::int64_t>(std::floor(p.x() / kStlWeldTolerance)),
            static_cast<std::int64_t>(std::floor(p.y() / kStlWeldTolerance)),
            static_cast<std::int64_t>(std::floor(p.z() / kStlWeldTolerance))};
  }

  TriangleMesh& mesh_;
  std::unordered_map<Key, std::vector<std::uint32_t>, KeyHash> map_;
  std::size_t offset_ = 0;
};

void add_facet(TriangleMesh& mesh, VertexWelder& welder, const Vec3 (&v)[3]) {
  std::array<std::uint32_t, 3> tri{welder.add(v[0]), welder.add(v[1]), welder.add(v[2])};
  if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) return;
  const Vec3 e1 = mesh.vertices[tri[1]] - mesh.vertices[tri[0]];
  const Vec3 e2 = mesh.vertices[tri[2]] - mesh.vertices[tri[0]];
  if (e1.cross(e2).squaredNorm() == 0.0) return;
  mesh.faces.push_back(tri);
}

float read_f32(const std::byte* p) {
  float f;
  std::memcpy(&f, p, sizeof f);
  return f;
}

TriangleMesh parse_binary(std::span<const std::byte> payload) {
  if (payload.size() < kHeaderBytes + 4) {
    throw ParseError("binary STL shorter than header and facet count", payload.size());
  }
  std::uint32_t count;
  std::memcpy(&count, payload.data() + kHeaderBytes, 4);
  if (static_cast<std::uint64_t>(count) * 3 > std::numeric_limits<std::uint32_t>::max()) {
    throw ParseError("vertex count overflow: " + std::to_string(count) + " facets declared", kHeaderBytes);
  }
  TriangleMesh mesh;
  VertexWelder welder(mesh);
  mesh.faces.reserve(count);
  for (std::uint32_t f = 0; f < count; ++f) {
    const std::size_t offset = kHeaderBytes + 4 + static_cast<std::size_t>(f) * kFacetBytes;
    if (offset + kFacetBytes > payload.size()) {
      throw ParseError("truncated binary STL: facet " + std::to_string(f + 1) + " of " +
                           std::to_string(count) + " is incomplete",
                       offset);
    }
    welder.set_offset(offset);
    const std::byte* rec = payload.data() + offset + 12;  // skip normal
    Vec3 v[3];
    for (int k = 0; k < 3; ++k) {
      v[k] = Vec3(read_f32(rec + 12 * k), read_f32(rec + 12 * k + 4), read_f32(rec + 12 * k + 8));
      if (!v[k].allFinite()) throw ParseError("non-finite vertex in facet " + std::to_string(f + 1), offset);
    }
    add_facet(mesh, welder, v);
  }
  return mesh;
}

class AsciiTokenizer {
public:
  explicit AsciiTokenizer(std::string_view text) : text_(text) {}

  // Returns empty view at end of input.
  std::string_view next() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
    start_ = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_])) ++pos_;
    return text_.substr(start_, pos_ - start_);
  }

  std::size_t offset() const { return start_; }

  void expect(std::string_view word) {
    const auto tok = next();
    if (tok != word) {
      throw ParseError("expected '" + std::string(word) + "' but found '" + std::string(tok) + "'", start_);
    }
  }

  double number() {
    const auto tok = next();
    double value = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (tok.empty() || res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
      throw ParseError("expected a number but found '" + std::string(tok) + "'", start_);
    }
    return value;
  }

  void skip_line() {
    while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
  }

private:
  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t start_ = 0;
};

TriangleMesh parse_ascii(std::span<const std::byte> payload) {
  const std::string_view text(reinterpret_cast<const char*>(payload.data()), payload.size());
  AsciiTokenizer tok(text);
  tok.expect("solid");
  tok.skip_line();  // optional solid name

  TriangleMesh mesh;
  VertexWelder welder(mesh);
  for (;;) {
    const auto word = tok.next();
    if (word == "endsolid") break;
    if (word.empty()) throw ParseError("missing 'endsolid'", tok.offset());
    if (word != "facet") {
      throw ParseError("expected 'facet' but found '" + std::string(word) + "'", tok.offset());
    }
    welder.set_offset(tok.offset());
    tok.expect("normal");
    tok.number();
    tok.number();
    tok.number();
    tok.expect("outer");
    tok.expect("loop");
    Vec3 v[3];
    for (auto& vert : v) {
      tok.expect("vertex");
      const double x = tok.number();
      const double y = tok.number();
      const double z = tok.number();
      vert = Vec3(x, y, z);
    }
    tok.expect("endloop");
    tok.expect("endfacet");
    add_facet(mesh, welder, v);
  }
  return mesh;
}

bool looks_ascii(std::span<const std::byte> payload) {
  constexpr std::string_view kSolid = "solid";
  if (payload.size() < kSolid.size()) return false;
  if (std::memcmp(payload.data(), kSolid.data(), kSolid.size()) != 0) return false;
  // Some binary exporters also start their header with "solid"; trust the
  // declared facet count when it matches the payload size exactly.
  if (payload.size() >= kHeaderBytes + 4) {
    std::uint32_t count;
    std::memcpy(&count, payload.data() + kHeaderBytes, 4);
    if (kHeaderBytes + 4 + static_cast<std::uint64_t>(count) * kFacetBytes == payload.size()) return false;
  }
  return true;
}

}  // namespace

TriangleMesh parse_stl(std::span<const std::byte> payload) {
  return looks_ascii(payload) ? parse_ascii(payload) : parse_binary(payload);
}

TriangleMesh read_stl_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return parse_stl(bytes);
}

std::vector<std::byte> serialize_stl_binary(const TriangleMesh& mesh, const std::string& header) {
  std::vector<std::byte> out(kHeaderBytes + 4 + mesh.faces.size() * kFacetBytes, std::byte{0});
  std::memcpy(out.data(), header.data(), std::min(header.size(), kHeaderBytes));
  const auto count = static_cast<std::uint32_t>(mesh.faces.size());
  std::memcpy(out.data() + kHeaderBytes, &count, 4);
  std::byte* rec = out.data() + kHeaderBytes + 4;
  for (const auto& tri : mesh.faces) {
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    Vec3 normal = (b - a).cross(c - a);
    if (normal.norm() > 0.0) normal.normalize();
    float values[12];
    for (int k = 0; k < 3; ++k) {
      values[k] = static_cast<float>(normal[k]);
      values[3 + k] = static_cast<float>(a[k]);
      values[6 + k] = static_cast<float>(b[k]);
      values[9 + k] = static_cast<float>(c[k]);
    }
    std::memcpy(rec, values, sizeof values);
    rec += kFacetBytes;  // attribute byte count stays zero
  }
  return out;
}

}  // namespace tacsim
