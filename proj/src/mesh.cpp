#include "qcmc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>
#include <unordered_map>

#include "qcmc/error.hpp"

namespace qcmc {
namespace {

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) noexcept {
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

Vec3 sub(const Vec3& a, const Vec3& b) noexcept { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

Vec3 cross(const Vec3& a, const Vec3& b) noexcept {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot(const Vec3& a, const Vec3& b) noexcept { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double norm(const Vec3& a) noexcept { return std::sqrt(dot(a, a)); }

double bounding_diagonal(std::span<const Vec3> vertices) {
    if (vertices.empty()) return 0.0;
    Vec3 lo = vertices.front();
    Vec3 hi = vertices.front();
    for (const auto& v : vertices) {
        for (int k = 0; k < 3; ++k) {
            lo[k] = std::min(lo[k], v[k]);
            hi[k] = std::max(hi[k], v[k]);
        }
    }
    return norm(sub(hi, lo));
}

// Enclosed area of a loop; signed for planar input, vector-area magnitude otherwise.
double loop_area(std::span<const Vec3> vertices, const BoundaryLoop& loop, bool planar) {
    Vec3 acc{0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < loop.size(); ++k) {
        const Vec3 c = cross(vertices[loop[k]], vertices[loop[(k + 1) % loop.size()]]);
        for (int d = 0; d < 3; ++d) acc[d] += c[d];
    }
    return planar ? 0.5 * acc[2] : 0.5 * norm(acc);
}

bool all_planar(std::span<const Vec3> vertices) {
    return std::all_of(vertices.begin(), vertices.end(), [](const Vec3& v) { return v[2] == 0.0; });
}

} // namespace

std::vector<BoundaryLoop> extract_boundary_loops(std::span<const Vec3> vertices, std::span<const Face> faces) {
    std::unordered_map<std::uint64_t, int> directed;
    directed.reserve(faces.size() * 3);
    for (const auto& f : faces) {
        for (int k = 0; k < 3; ++k) ++directed[edge_key(f[k], f[(k + 1) % 3])];
    }

    std::unordered_map<std::uint32_t, std::uint32_t> next;
    for (const auto& f : faces) {
        for (int k = 0; k < 3; ++k) {
            const std::uint32_t a = f[k];
            const std::uint32_t b = f[(k + 1) % 3];
            if (directed.contains(edge_key(b, a))) continue;
            if (!next.emplace(a, b).second) {
                throw Error(ErrorKind::topology,
                            "non-manifold boundary vertex " + std::to_string(a));
            }
        }
    }

    std::vector<std::uint32_t> starts;
    starts.reserve(next.size());
    for (const auto& [a, b] : next) starts.push_back(a);
    std::sort(starts.begin(), starts.end());

    std::unordered_map<std::uint32_t, bool> visited;
    std::vector<BoundaryLoop> loops;
    for (const std::uint32_t start : starts) {
        if (visited[start]) continue;
        BoundaryLoop loop;
        std::uint32_t v = start;
        do {
            if (visited[v]) {
                throw Error(ErrorKind::topology, "boundary chain revisits vertex " + std::to_string(v));
            }
            visited[v] = true;
            loop.push_back(v);
            const auto it = next.find(v);
            if (it == next.end()) {
                throw Error(ErrorKind::topology, "open boundary chain at vertex " + std::to_string(v));
            }
            v = it->second;
        } while (v != start);
        loops.push_back(std::move(loop));
    }

    const bool planar = all_planar(vertices);
    std::vector<double> area(loops.size());
    for (std::size_t i = 0; i < loops.size(); ++i) area[i] = std::abs(loop_area(vertices, loops[i], planar));
    std::vector<std::size_t> order(loops.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (area[a] != area[b]) return area[a] > area[b];
        return loops[a].front() < loops[b].front();
    });
    std::vector<BoundaryLoop> sorted;
    sorted.reserve(loops.size());
    for (const std::size_t i : order) sorted.push_back(std::move(loops[i]));
    return sorted;
}

std::vector<BoundaryLoop> extract_boundary_loops(const TriMesh& mesh) {
    return extract_boundary_loops(mesh.vertices(), mesh.faces());
}

double loop_signed_area(std::span<const Complex> positions, const BoundaryLoop& loop) {
    double acc = 0.0;
    for (std::size_t k = 0; k < loop.size(); ++k) {
        const Complex a = positions[loop[k]];
        const Complex b = positions[loop[(k + 1) % loop.size()]];
        acc += a.real() * b.imag() - a.imag() * b.real();
    }
    return 0.5 * acc;
}

TriMesh TriMesh::from_arrays(std::vector<Vec3> vertices, std::vector<Face> faces) {
    const std::size_t nv = vertices.size();
    if (faces.empty()) throw Error(ErrorKind::topology, "mesh has no faces");
    for (const auto& v : vertices) {
        if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2])) {
            throw Error(ErrorKind::parse, "non-finite vertex coordinate");
        }
    }
    for (std::size_t j = 0; j < faces.size(); ++j) {
        const auto& f = faces[j];
        for (const auto idx : f) {
            if (idx >= nv) {
                throw Error(ErrorKind::parse, "face " + std::to_string(j) + " references vertex " +
                                                  std::to_string(idx) + " out of range");
            }
        }
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
            throw Error(ErrorKind::degenerate, "face " + std::to_string(j) + " repeats a vertex");
        }
    }

    // Undirected edge -> incident faces.
    std::unordered_map<std::uint64_t, std::array<std::int64_t, 2>> edge_faces;
    edge_faces.reserve(faces.size() * 2);
    for (std::size_t j = 0; j < faces.size(); ++j) {
        for (int k = 0; k < 3; ++k) {
            const std::uint32_t a = faces[j][k];
            const std::uint32_t b = faces[j][(k + 1) % 3];
            auto [it, inserted] = edge_faces.try_emplace(edge_key(std::min(a, b), std::max(a, b)),
                                                         std::array<std::int64_t, 2>{-1, -1});
            auto& slot = it->second;
            if (slot[0] < 0) {
                slot[0] = static_cast<std::int64_t>(j);
            } else if (slot[1] < 0) {
                slot[1] = static_cast<std::int64_t>(j);
            } else {
                throw Error(ErrorKind::topology, "non-manifold edge (" + std::to_string(a) + ", " +
                                                     std::to_string(b) + ") shared by more than two faces");
            }
        }
    }

    // Propagate a consistent orientation across the face adjacency graph.
    auto has_directed = [](const Face& f, std::uint32_t a, std::uint32_t b) {
        for (int k = 0; k < 3; ++k) {
            if (f[k] == a && f[(k + 1) % 3] == b) return true;
        }
        return false;
    };
    std::vector<int> state(faces.size(), -1);  // -1 unvisited, 0 kept, 1 flipped
    std::queue<std::size_t> queue;
    state[0] = 0;
    queue.push(0);
    std::size_t reached = 1;
    while (!queue.empty()) {
        const std::size_t j = queue.front();
        queue.pop();
        for (int k = 0; k < 3; ++k) {
            const std::uint32_t a = faces[j][k];
            const std::uint32_t b = faces[j][(k + 1) % 3];
            const auto& slot = edge_faces.at(edge_key(std::min(a, b), std::max(a, b)));
            const std::int64_t other = slot[0] == static_cast<std::int64_t>(j) ? slot[1] : slot[0];
            if (other < 0) continue;
            const auto g = static_cast<std::size_t>(other);
            // With j in its original orientation, a consistent neighbour contains b->a.
            const bool same_direction = has_directed(faces[g], a, b);
            const int wanted = state[j] ^ (same_direction ? 1 : 0);
            if (state[g] < 0) {
                state[g] = wanted;
                ++reached;
                queue.push(g);
            } else if (state[g] != wanted) {
                throw Error(ErrorKind::topology, "mesh is not orientable");
            }
        }
    }
    if (reached != faces.size()) throw Error(ErrorKind::topology, "mesh is disconnected");
    for (std::size_t j = 0; j < faces.size(); ++j) {
        if (state[j] == 1) std::swap(faces[j][1], faces[j][2]);
    }

    std::vector<char> referenced(nv, 0);
    for (const auto& f : faces) {
        for (const auto idx : f) referenced[idx] = 1;
    }
    if (std::find(referenced.begin(), referenced.end(), 0) != referenced.end()) {
        throw Error(ErrorKind::topology, "mesh has vertices not referenced by any face");
    }

    TriMesh mesh;
    mesh.planar_ = all_planar(vertices);
    const double diag = bounding_diagonal(vertices);
    const double area_floor = 1e-14 * diag * diag;

    if (mesh.planar_) {
        auto pos = [&](std::uint32_t v) { return Complex(vertices[v][0], vertices[v][1]); };
        double total = 0.0;
        for (const auto& f : faces) total += signed_area(pos(f[0]), pos(f[1]), pos(f[2]));
        if (total < 0.0) {
            for (auto& f : faces) std::swap(f[1], f[2]);
        }
        for (std::size_t j = 0; j < faces.size(); ++j) {
            const auto& f = faces[j];
            const double a = signed_area(pos(f[0]), pos(f[1]), pos(f[2]));
            if (a <= area_floor) {
                throw Error(ErrorKind::degenerate, "face " + std::to_string(j) +
                                                       (a < -area_floor ? " is folded over" : " is degenerate"));
            }
        }
    } else {
        for (std::size_t j = 0; j < faces.size(); ++j) {
            const auto& f = faces[j];
            const double a =
                0.5 * norm(cross(sub(vertices[f[1]], vertices[f[0]]), sub(vertices[f[2]], vertices[f[0]])));
            if (a <= area_floor) throw Error(ErrorKind::degenerate, "face " + std::to_string(j) + " is degenerate");
        }
    }

    mesh.loops_ = extract_boundary_loops(vertices, faces);
    if (mesh.loops_.empty()) throw Error(ErrorKind::topology, "mesh has no boundary");

    const auto edges = static_cast<long long>(edge_faces.size());
    const long long euler = static_cast<long long>(nv) - edges + static_cast<long long>(faces.size());
    if (euler != 2 - static_cast<long long>(mesh.loops_.size())) {
        throw Error(ErrorKind::topology, "mesh is not a planar domain (Euler characteristic " +
                                             std::to_string(euler) + " with " +
                                             std::to_string(mesh.loops_.size()) + " boundary loops)");
    }

    if (mesh.planar_) {
        for (std::size_t k = 0; k < mesh.loops_.size(); ++k) {
            const double a = loop_area(vertices, mesh.loops_[k], true);
            if ((k == 0 && a <= 0.0) || (k > 0 && a >= 0.0)) {
                throw Error(ErrorKind::topology, "boundary loop " + std::to_string(k) +
                                                     " has unexpected orientation; outer loop must enclose the others");
            }
        }
    }

    mesh.vertex_info_.assign(nv, BoundaryVertexInfo{});
    std::size_t boundary = 0;
    for (std::size_t k = 0; k < mesh.loops_.size(); ++k) {
        for (std::size_t p = 0; p < mesh.loops_[k].size(); ++p) {
            auto& info = mesh.vertex_info_[mesh.loops_[k][p]];
            info.loop_index = static_cast<std::int32_t>(k);
            info.position_in_loop = static_cast<std::uint32_t>(p);
            ++boundary;
        }
    }
    mesh.boundary_vertices_ = boundary;
    mesh.boundary_edges_ = static_cast<std::size_t>(std::count_if(
        edge_faces.begin(), edge_faces.end(), [](const auto& e) { return e.second[1] < 0; }));
    mesh.vertices_ = std::move(vertices);
    mesh.faces_ = std::move(faces);
    return mesh;
}

TriMesh TriMesh::with_planar_positions(std::span<const Complex> positions) const {
    if (positions.size() != vertices_.size()) {
        throw Error(ErrorKind::config, "position count does not match vertex count");
    }
    std::vector<Vec3> verts(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) verts[i] = {positions[i].real(), positions[i].imag(), 0.0};
    return from_arrays(std::move(verts), faces_);
}

ComplexMap TriMesh::planar_positions() const {
    if (!planar_) throw Error(ErrorKind::config, "mesh is not planar; flatten it first");
    ComplexMap out(vertices_.size());
    for (std::size_t i = 0; i < vertices_.size(); ++i) out[i] = Complex(vertices_[i][0], vertices_[i][1]);
    return out;
}

std::vector<FaceFrame> TriMesh::face_frames() const {
    std::vector<FaceFrame> frames(faces_.size());
    for (std::size_t j = 0; j < faces_.size(); ++j) {
        const auto& f = faces_[j];
        if (planar_) {
            for (int k = 0; k < 3; ++k) frames[j][k] = Complex(vertices_[f[k]][0], vertices_[f[k]][1]);
            continue;
        }
        const Vec3 e1 = sub(vertices_[f[1]], vertices_[f[0]]);
        const Vec3 e2 = sub(vertices_[f[2]], vertices_[f[0]]);
        const double len = norm(e1);
        const Vec3 x{e1[0] / len, e1[1] / len, e1[2] / len};
        Vec3 y = cross(cross(e1, e2), x);
        const double ylen = norm(y);
        y = {y[0] / ylen, y[1] / ylen, y[2] / ylen};
        frames[j] = {Complex(0.0, 0.0), Complex(len, 0.0), Complex(dot(e2, x), dot(e2, y))};
    }
    return frames;
}

std::vector<double> TriMesh::face_areas() const {
    const auto frames = face_frames();
    std::vector<double> out(frames.size());
    for (std::size_t j = 0; j < frames.size(); ++j) out[j] = signed_area(frames[j][0], frames[j][1], frames[j][2]);
    return out;
}

double TriMesh::total_area() const {
    const auto a = face_areas();
    return std::accumulate(a.begin(), a.end(), 0.0);
}

std::size_t flip_count(const TriMesh& mesh, std::span<const Complex> map) {
    if (map.size() != mesh.vertex_count()) throw Error(ErrorKind::config, "map size does not match vertex count");
    std::size_t flips = 0;
    for (const auto& f : mesh.faces()) {
        if (!(signed_area(map[f[0]], map[f[1]], map[f[2]]) > 0.0)) ++flips;
    }
    return flips;
}

} // namespace qcmc
