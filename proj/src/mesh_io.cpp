#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "qcmc/error.hpp"
#include "qcmc/mesh.hpp"

namespace qcmc {
namespace {

[[noreturn]] void parse_error(const std::filesystem::path& path, std::size_t line, const std::string& msg) {
    throw Error(ErrorKind::parse, path.string() + ":" + std::to_string(line) + ": " + msg);
}

// Resolves an OBJ index token ("7", "7/2", "7//3", "-1") to a zero-based vertex index.
std::int64_t obj_vertex_index(const std::string& token, std::int64_t vertex_count) {
    const std::string head = token.substr(0, token.find('/'));
    std::size_t used = 0;
    const long long raw = std::stoll(head, &used);
    if (used != head.size() || raw == 0) throw std::invalid_argument("bad index");
    return raw > 0 ? raw - 1 : vertex_count + raw;
}

TriMesh load_obj(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            Vec3 v{0.0, 0.0, 0.0};
            if (!(ss >> v[0] >> v[1])) parse_error(path, line_no, "malformed vertex record");
            if (!(ss >> v[2])) v[2] = 0.0;
            vertices.push_back(v);
        } else if (tag == "f") {
            std::vector<std::string> tokens;
            for (std::string t; ss >> t;) tokens.push_back(t);
            if (tokens.size() != 3) {
                parse_error(path, line_no, "face with " + std::to_string(tokens.size()) +
                                               " vertices; only triangles are supported");
            }
            Face face{};
            for (int k = 0; k < 3; ++k) {
                std::int64_t idx = -1;
                try {
                    idx = obj_vertex_index(tokens[k], static_cast<std::int64_t>(vertices.size()));
                } catch (const std::exception&) {
                    parse_error(path, line_no, "malformed face index '" + tokens[k] + "'");
                }
                // OBJ allows forward references, so range is checked after the whole file is read.
                if (idx < 0) parse_error(path, line_no, "face index out of range");
                face[k] = static_cast<std::uint32_t>(idx);
            }
            faces.push_back(face);
        }
    }
    for (std::size_t j = 0; j < faces.size(); ++j) {
        for (const auto idx : faces[j]) {
            if (idx >= vertices.size()) {
                throw Error(ErrorKind::parse, path.string() + ": face " + std::to_string(j) +
                                                  " references vertex beyond vertex count");
            }
        }
    }
    return TriMesh::from_arrays(std::move(vertices), std::move(faces));
}

// Next whitespace-separated token of an OFF file, skipping comments.
class OffTokens {
public:
    explicit OffTokens(std::istream& in) : in_(in) {}

    bool next(std::string& out) {
        while (!(line_ >> out)) {
            std::string raw;
            if (!std::getline(in_, raw)) return false;
            ++line_no_;
            raw = raw.substr(0, raw.find('#'));
            line_.clear();
            line_.str(raw);
        }
        return true;
    }

    [[nodiscard]] std::size_t line() const noexcept { return line_no_; }

private:
    std::istream& in_;
    std::istringstream line_;
    std::size_t line_no_ = 0;
};

TriMesh load_off(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    OffTokens tokens(in);
    std::string tok;
    auto number = [&](auto& value) {
        if (!tokens.next(tok)) parse_error(path, tokens.line(), "unexpected end of file");
        std::istringstream ss(tok);
        if (!(ss >> value) || !ss.eof()) parse_error(path, tokens.line(), "malformed number '" + tok + "'");
    };
    if (!tokens.next(tok) || tok != "OFF") parse_error(path, tokens.line(), "missing OFF header");
    long long nv = 0;
    long long nf = 0;
    long long ne = 0;
    number(nv);
    number(nf);
    number(ne);
    if (nv < 0 || nf < 0) parse_error(path, tokens.line(), "negative element count");
    std::vector<Vec3> vertices(static_cast<std::size_t>(nv));
    for (auto& v : vertices) {
        number(v[0]);
        number(v[1]);
        number(v[2]);
    }
    std::vector<Face> faces(static_cast<std::size_t>(nf));
    for (auto& f : faces) {
        long long count = 0;
        number(count);
        if (count != 3) {
            parse_error(path, tokens.line(), "face with " + std::to_string(count) +
                                                 " vertices; only triangles are supported");
        }
        for (auto& idx : f) {
            long long raw = 0;
            number(raw);
            if (raw < 0 || raw >= nv) parse_error(path, tokens.line(), "face index out of range");
            idx = static_cast<std::uint32_t>(raw);
        }
    }
    return TriMesh::from_arrays(std::move(vertices), std::move(faces));
}

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

} // namespace

TriMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
    return format == MeshFormat::obj ? load_obj(path) : load_off(path);
}

TriMesh load_mesh(const std::filesystem::path& path) {
    const std::string ext = lower_extension(path);
    if (ext == ".obj") return load_obj(path);
    if (ext == ".off") return load_off(path);
    throw Error(ErrorKind::parse, "unrecognized mesh extension '" + ext + "' (expected .obj or .off)");
}

void save_mesh(const std::filesystem::path& path, const TriMesh& mesh, MeshFormat format,
               std::span<const Complex> uv) {
    if (!uv.empty() && uv.size() != mesh.vertex_count()) {
        throw Error(ErrorKind::config, "uv count does not match vertex count");
    }
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    out << std::setprecision(17);
    if (format == MeshFormat::obj) {
        for (const auto& v : mesh.vertices()) out << "v " << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
        for (const auto& t : uv) out << "vt " << t.real() << ' ' << t.imag() << '\n';
        for (const auto& f : mesh.faces()) {
            out << 'f';
            for (const auto idx : f) {
                out << ' ' << idx + 1;
                if (!uv.empty()) out << '/' << idx + 1;
            }
            out << '\n';
        }
    } else {
        out << "OFF\n" << mesh.vertex_count() << ' ' << mesh.face_count() << " 0\n";
        for (const auto& v : mesh.vertices()) out << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
        for (const auto& f : mesh.faces()) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
    }
    if (!out) throw Error(ErrorKind::io, "failed writing " + path.string());
}

} // namespace qcmc
