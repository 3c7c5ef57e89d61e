// SPDX-License-Identifier: Apache-2.0
//
// End-to-end checks through the installed binary. RAYSEL_CLI_PATH is
// injected by the build.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "raysel/harness.hpp"

using namespace raysel;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code{-1};
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "raysel_cli_tests";
  fs::create_directories(dir);
  return dir;
}

CliResult run_cli(const std::string& args) {
  const fs::path dir = work_dir();
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(RAYSEL_CLI_PATH) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  CliResult res;
  res.code = WEXITSTATUS(raw);
  res.out = slurp(out);
  res.err = slurp(err);
  return res;
}

}  // namespace

TEST_CASE("cli gen-scene: empty scene file is valid and loadable") {
  const fs::path dir = work_dir();
  const fs::path scene_path = dir / "empty.json";
  const CliResult res =
      run_cli("gen-scene --seed 7 --boxes 0 --out " + scene_path.string());
  REQUIRE(res.code == 0);
  const Scene scene = load_scene(scene_path.string());
  CHECK(scene.boxes.empty());
  CHECK(res.out.find("boxes: 0") != std::string::npos);
}

TEST_CASE("cli gen-scene: identical flags give identical files") {
  const fs::path dir = work_dir();
  const std::string flags = "gen-scene --seed 9 --boxes 40 --class-mix 0.9,0.1";
  REQUIRE(run_cli(flags + " --out " + (dir / "a.json").string()).code == 0);
  REQUIRE(run_cli(flags + " --out " + (dir / "b.json").string()).code == 0);
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
}

TEST_CASE("cli gen-scene: printed distribution matches a file recount") {
  const fs::path dir = work_dir();
  const fs::path scene_path = dir / "mix.json";
  const CliResult res = run_cli(
      "gen-scene --seed 3 --boxes 200 --class-mix 0.9,0.1 --out " +
      scene_path.string());
  REQUIRE(res.code == 0);
  const ClassDistribution dist =
      gt_distribution(load_scene(scene_path.string()));
  std::ostringstream expected;
  expected << "boxes: 200\ncar: " << dist.counts[0]
           << "\ntraffic_cone: " << dist.counts[1] << '\n';
  CHECK(res.out == expected.str());
}

TEST_CASE("cli supervise: empty scene produces all-zero masks") {
  const fs::path dir = work_dir();
  const fs::path scene_path = dir / "sup_empty.json";
  REQUIRE(run_cli("gen-scene --seed 1 --boxes 0 --cameras 2 --out " +
                  scene_path.string())
              .code == 0);
  const fs::path out_dir = dir / "sup_empty_masks";
  REQUIRE(run_cli("supervise --scene " + scene_path.string() + " --out-dir " +
                  out_dir.string())
              .code == 0);
  for (const char* name : {"camera0.mask", "camera1.mask", "bev.mask"}) {
    const SupervisionMask mask = read_mask((out_dir / name).string());
    CHECK(mask.positive_count() == 0);
  }
}

TEST_CASE("cli supervise: oracle disagreements are zero outside grazing") {
  const fs::path dir = work_dir();
  const fs::path scene_path = dir / "sup7.json";
  REQUIRE(run_cli("gen-scene --seed 7 --boxes 20 --out " +
                  scene_path.string())
              .code == 0);
  const fs::path out_dir = dir / "sup7_masks";
  const CliResult res =
      run_cli("supervise --scene " + scene_path.string() + " --out-dir " +
              out_dir.string() + " --oracle --march-step 0.01");
  REQUIRE(res.code == 0);

  std::ifstream report(out_dir / "oracle_report.csv");
  std::string line;
  std::getline(report, line);
  CHECK(line == "mask,cells,excluded,disagreements");
  int rows = 0;
  while (std::getline(report, line)) {
    if (line.empty()) continue;
    ++rows;
    CHECK(line.substr(line.rfind(',') + 1) == "0");
  }
  CHECK(rows == 7);  // 6 cameras + bev
}

TEST_CASE("cli supervise: missing scene file exits 3 naming the path") {
  const CliResult res =
      run_cli("supervise --scene /nonexistent/nope.json --out-dir /tmp/x");
  CHECK(res.code == 3);
  CHECK(res.err.find("/nonexistent/nope.json") != std::string::npos);
}

TEST_CASE("cli sample: rho 1.0 keeps every token") {
  const fs::path dir = work_dir();
  const fs::path scene_path = dir / "smp.json";
  REQUIRE(run_cli("gen-scene --seed 5 --boxes 30 --out " +
                  scene_path.string())
              .code == 0);
  const fs::path tokens = dir / "tokens.csv";
  const CliResult res =
      run_cli("sample --scene " + scene_path.string() +
              " --logits perfect --rho 1.0 --out " + tokens.string());
  REQUIRE(res.code == 0);
  const TokenSet tok = read_token_set(tokens.string());
  CHECK(tok.kept.size() == 180 * 180);
  CHECK(fs::exists(dir / "tokens.csv.weights.csv"));
}

TEST_CASE("cli sample: perfect logits at rho 0.25 recall the foreground") {
  const fs::path dir = work_dir();
  const fs::path scene_path = dir / "smp25.json";
  REQUIRE(run_cli("gen-scene --seed 6 --boxes 40 --out " +
                  scene_path.string())
              .code == 0);
  const CliResult res = run_cli(
      "sample --scene " + scene_path.string() +
      " --logits perfect --rho 0.25 --out " + (dir / "t25.csv").string());
  REQUIRE(res.code == 0);
  CHECK(res.out.find("foreground recall 1") != std::string::npos);
}

TEST_CASE("cli sample: camera grids and logits files") {
  const fs::path dir = work_dir();
  const fs::path scene_path = dir / "smp_cam.json";
  REQUIRE(run_cli("gen-scene --seed 12 --boxes 20 --out " +
                  scene_path.string())
              .code == 0);

  // Camera grid: 20x50 cells, rho 0.5 keeps half of them.
  const fs::path tokens = dir / "cam_tokens.csv";
  REQUIRE(run_cli("sample --scene " + scene_path.string() +
                  " --grid cam:2 --logits perfect --rho 0.5 --out " +
                  tokens.string())
              .code == 0);
  CHECK(read_token_set(tokens.string()).kept.size() == 500);

  // Logits from a file must match the grid they are used on.
  const Scene scene = load_scene(scene_path.string());
  const SupervisionMask mask = ras_camera_mask(scene, 2);
  const fs::path logits = dir / "cam.logits";
  save_logits(noisy_logits(scene, mask, 0.5, 11), logits.string());
  REQUIRE(run_cli("sample --scene " + scene_path.string() +
                  " --grid cam:2 --logits " + logits.string() +
                  " --rho 0.25 --out " + tokens.string())
              .code == 0);
  CHECK(read_token_set(tokens.string()).kept.size() == 250);
  CHECK(run_cli("sample --scene " + scene_path.string() +
                " --grid bev --logits " + logits.string() + " --out " +
                tokens.string())
            .code == 3);
  CHECK(run_cli("sample --scene " + scene_path.string() +
                " --grid cam:7 --out " + tokens.string())
            .code == 2);
}

TEST_CASE("cli sample: lambda below one is a usage error") {
  const fs::path dir = work_dir();
  const fs::path scene_path = dir / "smp_bad.json";
  REQUIRE(run_cli("gen-scene --seed 5 --boxes 2 --out " +
                  scene_path.string())
              .code == 0);
  const CliResult res = run_cli(
      "sample --scene " + scene_path.string() + " --lambda 0.5 --out " +
      (dir / "never.csv").string());
  CHECK(res.code == 2);
  CHECK(res.err.find("lambda") != std::string::npos);
}

TEST_CASE("cli eval: sweep rows carry exact flop proxies") {
  const fs::path dir = work_dir();
  const fs::path scene_path = dir / "ev.json";
  REQUIRE(run_cli("gen-scene --seed 7 --boxes 50 --class-mix 0.9,0.1 --out " +
                  scene_path.string())
              .code == 0);
  const fs::path csv = dir / "eval.csv";
  const CliResult res = run_cli(
      "eval --scene " + scene_path.string() +
      " --logits perfect --rhos 0.25,0.5,0.75,1.0 --out " + csv.string());
  REQUIRE(res.code == 0);

  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    rows.push_back(fields);
  }
  REQUIRE(rows.size() == 4);
  // flop_proxy is the last column, after the per-class recalls.
  CHECK(std::stod(rows[0].back()) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(std::stod(rows[3].back()) == 1.0);
  CHECK(std::stoi(rows[0][1]) == 8100);
  CHECK(std::stod(rows[0][2]) == 1.0);  // perfect logits, fg below capacity

  CHECK(run_cli("eval --scene " + scene_path.string() +
                " --rhos 0.25,1.5 --out " + csv.string())
            .code == 2);
}

TEST_CASE("cli render: masks and overlays round trip") {
  const fs::path dir = work_dir();
  const fs::path scene_path = dir / "ren.json";
  REQUIRE(run_cli("gen-scene --seed 8 --boxes 25 --out " +
                  scene_path.string())
              .code == 0);
  const fs::path masks = dir / "ren_masks";
  REQUIRE(run_cli("supervise --scene " + scene_path.string() + " --out-dir " +
                  masks.string())
              .code == 0);
  const fs::path pgm = dir / "bev.pgm";
  REQUIRE(run_cli("render --mask " + (masks / "bev.mask").string() +
                  " --out " + pgm.string())
              .code == 0);
  const ImageU8 img = read_image(pgm.string());
  const SupervisionMask mask = read_mask((masks / "bev.mask").string());
  REQUIRE(img.channels == 1);
  int on = 0;
  for (auto p : img.pixels) on += (p == 255);
  CHECK(on == mask.positive_count());

  const fs::path tokens = dir / "ren_tokens.csv";
  REQUIRE(run_cli("sample --scene " + scene_path.string() +
                  " --logits perfect --rho 0.1 --out " + tokens.string())
              .code == 0);
  const fs::path ppm = dir / "bev_overlay.ppm";
  REQUIRE(run_cli("render --mask " + (masks / "bev.mask").string() +
                  " --tokens " + tokens.string() + " --out " + ppm.string())
              .code == 0);
  CHECK(read_image(ppm.string()).channels == 3);

  CHECK(run_cli("render --mask /nonexistent.mask --out " + pgm.string())
            .code == 3);
}

TEST_CASE("cli raype: anchor dumps satisfy the sequence invariants") {
  const fs::path dir = work_dir();
  const fs::path scene_path = dir / "pe.json";
  REQUIRE(run_cli("gen-scene --seed 2 --boxes 5 --out " +
                  scene_path.string())
              .code == 0);
  const std::string prefix = (dir / "pe_").string();
  const CliResult res =
      run_cli("raype --scene " + scene_path.string() +
              " --camera 1 --pixel 10,25 --d 16 --out " + prefix);
  REQUIRE(res.code == 0);

  // Invariant-checking pass over the dumped CSV.
  const Scene scene = load_scene(scene_path.string());
  const Ray ray = backproject_pixel_ray(scene.rig(1), 10, 25);
  std::ifstream in(prefix + "camera_anchors.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "source,k,x,y,z,clamped");
  int count = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string src, k, x, y, z, clamped;
    std::getline(ss, src, ',');
    std::getline(ss, k, ',');
    std::getline(ss, x, ',');
    std::getline(ss, y, ',');
    std::getline(ss, z, ',');
    std::getline(ss, clamped, ',');
    CHECK(src == "camera:1:10:25");
    if (clamped == "0") {
      const Vec3 p{std::stod(x), std::stod(y), std::stod(z)};
      CHECK((p - ray.origin).cross(ray.direction).norm() <= 1e-9);
    }
    ++count;
  }
  CHECK(count == 16);
  CHECK(fs::exists(prefix + "bev_anchors.csv"));
  CHECK(fs::exists(prefix + "query_encoding.csv"));

  // d = 2 produces exactly 2 + 2 anchors.
  const std::string p2 = (dir / "pe2_").string();
  REQUIRE(run_cli("raype --scene " + scene_path.string() +
                  " --camera 0 --pixel 0,0 --d 2 --out " + p2)
              .code == 0);
  auto count_rows = [](const std::string& path) {
    std::ifstream f(path);
    std::string l;
    int n = -1;  // header
    while (std::getline(f, l))
      if (!l.empty()) ++n;
    return n;
  };
  CHECK(count_rows(p2 + "camera_anchors.csv") == 2);
  CHECK(count_rows(p2 + "bev_anchors.csv") == 2);

  CHECK(run_cli("raype --scene " + scene_path.string() +
                " --camera 0 --pixel 99,0 --d 4 --out " + p2)
            .code == 2);
  CHECK(run_cli("raype --scene " + scene_path.string() +
                " --camera 9 --pixel 0,0 --d 4 --out " + p2)
            .code == 2);
}

TEST_CASE("cli raype: identity extrinsics sample straight up the z axis") {
  // Hand-written scene: one camera at the origin with identity extrinsics,
  // principal point on the center of feature cell (2, 4). Its pixel ray is
  // the +z axis, so unclamped anchors keep x = y = 0 with increasing z.
  Scene scene;
  scene.region = SceneRegion{};
  scene.bev = GridSpec::bev(scene.region, kDefaultBevCellSize);
  scene.class_names = {"car"};
  CameraRig rig;
  rig.id = 0;
  rig.intrinsics = {100, 100, 16 * 4.5, 16 * 2.5, 320, 240};
  rig.feature_stride = 16;
  scene.rigs.push_back(rig);

  const fs::path dir = work_dir();
  const fs::path scene_path = dir / "identity.json";
  save_scene(scene, scene_path.string());
  const std::string prefix = (dir / "idpe_").string();
  REQUIRE(run_cli("raype --scene " + scene_path.string() +
                  " --camera 0 --pixel 2,4 --d 8 --out " + prefix)
              .code == 0);

  std::ifstream in(prefix + "camera_anchors.csv");
  std::string line;
  std::getline(in, line);
  double prev_z = -1e30;
  int unclamped = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string src, k, x, y, z, clamped;
    std::getline(ss, src, ',');
    std::getline(ss, k, ',');
    std::getline(ss, x, ',');
    std::getline(ss, y, ',');
    std::getline(ss, z, ',');
    std::getline(ss, clamped, ',');
    if (clamped != "0") continue;
    ++unclamped;
    CHECK(std::abs(std::stod(x)) <= 1e-12);
    CHECK(std::abs(std::stod(y)) <= 1e-12);
    CHECK(std::stod(z) > prev_z);
    prev_z = std::stod(z);
  }
  // d_min = 1 m up a region topping out at z = 3: the first anchors fit,
  // the far ones clamp.
  CHECK(unclamped >= 1);
}

TEST_CASE("cli: unknown flags are usage errors") {
  CHECK(run_cli("gen-scene --frobnicate 1 --out /tmp/x.json").code == 2);
  CHECK(run_cli("").code == 2);  // missing subcommand
}

TEST_CASE("cli: config file supplies defaults, flags win") {
  const fs::path dir = work_dir();
  const fs::path cfg = dir / "raysel.ini";
  {
    std::ofstream out(cfg);
    out << "[gen-scene]\nseed=9\nboxes=12\n";
  }
  const fs::path a = dir / "cfg_a.json";
  const fs::path b = dir / "cfg_b.json";
  REQUIRE(run_cli("--config " + cfg.string() + " gen-scene --out " +
                  a.string())
              .code == 0);
  REQUIRE(run_cli("gen-scene --seed 9 --boxes 12 --out " + b.string())
              .code == 0);
  CHECK(slurp(a) == slurp(b));

  // Flag overrides the config value.
  const fs::path c = dir / "cfg_c.json";
  const fs::path d = dir / "cfg_d.json";
  REQUIRE(run_cli("--config " + cfg.string() + " gen-scene --seed 4 --out " +
                  c.string())
              .code == 0);
  REQUIRE(run_cli("gen-scene --seed 4 --boxes 12 --out " + d.string())
              .code == 0);
  CHECK(slurp(c) == slurp(d));
}
