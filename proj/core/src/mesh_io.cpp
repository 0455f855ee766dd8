#include <cstring>
#include <fstream>

#include "csd/volume.hpp"

namespace csd {

void save_mesh_obj(const TriangleMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    out << "# csd mesh: " << mesh.vertices.size() << " vertices, " << mesh.triangles.size()
        << " triangles\n";
    out.precision(9);
    for (const Vec3& v : mesh.vertices) out << "v " << v.x << " " << v.y << " " << v.z << "\n";
    for (const auto& t : mesh.triangles)
        out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
}

void save_mesh_stl(const TriangleMesh& mesh, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    char header[80] = {};
    std::strncpy(header, "csd binary stl", sizeof(header) - 1);
    out.write(header, sizeof(header));
    std::uint32_t n = std::uint32_t(mesh.triangles.size());
    out.write(reinterpret_cast<const char*>(&n), 4);

    auto put_vec = [&](const Vec3& v) {
        float f[3] = {float(v.x), float(v.y), float(v.z)};
        out.write(reinterpret_cast<const char*>(f), 12);
    };
    for (const auto& t : mesh.triangles) {
        const Vec3& a = mesh.vertices[t[0]];
        const Vec3& b = mesh.vertices[t[1]];
        const Vec3& c = mesh.vertices[t[2]];
        put_vec(normalized(cross(b - a, c - a)));
        put_vec(a);
        put_vec(b);
        put_vec(c);
        std::uint16_t attr = 0;
        out.write(reinterpret_cast<const char*>(&attr), 2);
    }
}

}  // namespace csd
