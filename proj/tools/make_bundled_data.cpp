// Regenerates the data/ catalog.  Run from the repository root:
//   build/tools/make-bundled-data [out_dir]
// Output is deterministic; the committed files should match exactly.

#include "toruscope/mesh.hpp"
#include "toruscope/mesh_io.hpp"
#include "toruscope/meshgen.hpp"
#include "toruscope/rng.hpp"

#include <filesystem>
#include <iostream>
#include <random>

using namespace toruscope;

namespace {

void write(const std::filesystem::path& dir, const std::string& name, const json& doc) {
  std::filesystem::path p = dir / name;
  write_text_file(p.string(), doc.dump(2) + "\n");
  std::cout << "wrote " << p.string() << "\n";
}

json system_doc(int dim, const json& structure, const std::vector<std::string>& integrals,
                int rank, double lo, double hi) {
  json doc;
  doc["dimension"] = dim;
  doc["structure"] = structure;
  doc["integrals"] = integrals;
  doc["rank"] = rank;
  json box = json::array();
  for (int i = 0; i < dim; ++i) box.push_back(json::array({lo, hi}));
  doc["box"] = box;
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  std::filesystem::path dir = argc > 1 ? argv[1] : "data";
  std::filesystem::create_directories(dir);

  SimplicialComplex torus = flat_torus(8);
  SimplicialComplex klein = klein_bottle(8);
  write(dir, "torus_8.json", mesh_to_json(torus));
  write(dir, "klein_8.json", mesh_to_json(klein));
  write(dir, "octahedron.json", mesh_to_json(octahedron()));

  // Winding form on the torus: dx + 0.3 dy plus an exact perturbation, so the
  // cohomology class is (1, 0.3) but no edge value is a clean grid fraction.
  RealCochain dx = coordinate_cochain(torus, 0);
  RealCochain dy = coordinate_cochain(torus, 1);
  std::mt19937_64 gen(42);
  std::vector<double> pot(torus.num_vertices());
  for (double& v : pot) v = 0.01 * (2.0 * uniform01(gen) - 1.0);
  RealCochain beta1{1, std::vector<double>(torus.edges().size(), 0.0)};
  for (size_t e = 0; e < torus.edges().size(); ++e) {
    int u = torus.edges()[e][0], v = torus.edges()[e][1];
    beta1.values[e] = dx.values[e] + 0.3 * dy.values[e] + (pot[v] - pot[u]);
  }
  write(dir, "torus_beta1.json", cochain_to_json(beta1));
  write(dir, "torus_beta2.json", cochain_to_json(dy));

  // Klein bottle: dy survives in real cohomology; the tent function
  // min(x, 1-x) is invariant under the flip, so its coboundary is globally
  // exact yet has slope +-1 in x on every triangle.  The pair is pointwise
  // independent even though the classes cannot both be nontrivial.
  RealCochain kdy = coordinate_cochain(klein, 1);
  RealCochain tent = vertex_cochain(klein, [](const std::vector<double>& x) {
    return std::min(x[0], 1.0 - x[0]);
  });
  RealCochain kbeta2{1, std::vector<double>(klein.edges().size(), 0.0)};
  for (size_t e = 0; e < klein.edges().size(); ++e) {
    int u = klein.edges()[e][0], v = klein.edges()[e][1];
    kbeta2.values[e] = tent.values[v] - tent.values[u];
  }
  write(dir, "klein_beta1.json", cochain_to_json(kdy));
  write(dir, "klein_beta2.json", cochain_to_json(kbeta2));

  json canonical;
  canonical["kind"] = "canonical";
  write(dir, "oscillator.json",
        system_doc(4, canonical, {"(x1^2+x3^2)/2", "(x2^2+x4^2)/2"}, 2, -2.0, 2.0));
  write(dir, "anisotropic_oscillator.json",
        system_doc(4, canonical, {"(x1^2+x3^2)/2", "(x2^2+2*x4^2)/2"}, 2, -2.0, 2.0));

  json so3;
  so3["kind"] = "poisson";
  so3["bivector"] = json::array({json::array({"-x3", "x2"}), json::array({"-x1"})});
  write(dir, "so3.json", system_doc(3, so3, {"x3", "x1^2+x2^2+x3^2"}, 1, -3.0, 3.0));

  json broken;
  broken["kind"] = "poisson";
  broken["bivector"] = json::array({json::array({"x1", "x2"}), json::array({"1"})});
  write(dir, "broken_bivector.json", system_doc(3, broken, {"x3"}, 1, -2.0, 2.0));
  return 0;
}
