#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <httplib.h>
#include <json.hpp>

#include "latentcloud/autoencoder.hpp"
#include "latentcloud/data.hpp"
#include "latentcloud/latent.hpp"
#include "process.hpp"

using namespace latentcloud;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = LATENTCLOUD_CLI_PATH;

fs::path workdir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "latentcloud_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string at(const std::string& name) { return (workdir() / name).string(); }

proc::Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), kCli);
  return proc::run(args);
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// A tiny dataset and a briefly trained model shared by the tests below.
struct Trained {
  std::string data = at("data");
  std::string model = at("model.dcae");
  Trained() {
    const auto g = cli({"gen-data", "--out", data, "--count", "12", "--points", "32", "--seed", "5"});
    REQUIRE(g.exit_code == 0);
    const auto t = cli({"train", "--dataset", data, "--out-model", model, "--latent", "8",
                        "--epochs", "3", "--batch-size", "4", "--encoder-widths", "8,16",
                        "--decoder-widths", "16,32", "--seed", "2", "--val-split", "0.25"});
    REQUIRE(t.exit_code == 0);
  }
};

Trained& trained() {
  static Trained t;
  return t;
}

}  // namespace

TEST_CASE("gen-data") {
  const auto a = cli({"gen-data", "--out", at("g1"), "--count", "9", "--points", "16", "--seed", "4"});
  const auto b = cli({"gen-data", "--out", at("g2"), "--count", "9", "--points", "16", "--seed", "4"});
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(read_file(at("g1/manifest.json")) == read_file(at("g2/manifest.json")));
  const auto m = load_manifest(at("g1"));
  CHECK(m.entries.size() == 9);
  for (const auto& e : m.entries) {
    CHECK(read_file(m.entry_path(e)) == read_file(fs::path(at("g2")) / e.path));
  }
  CHECK(cli({"gen-data", "--out", at("g3"), "--count", "0"}).exit_code == 2);
  CHECK(cli({"gen-data", "--out", at("g3"), "--families", "sofa"}).exit_code == 2);
  CHECK(cli({"gen-data"}).exit_code == 2);
  CHECK(cli({}).exit_code == 2);
  CHECK(cli({"bogus"}).exit_code == 2);
}

TEST_CASE("train") {
  auto& t = trained();
  SUBCASE("writes a loadable model and one CSV row per epoch") {
    const AEModel m = load_model(t.model);
    CHECK(m.config.latent_size == 8);
    CHECK(m.metadata.epochs_trained == 3);
    const std::string csv = read_file(t.model + ".loss.csv");
    CHECK(csv.rfind("epoch,train_chamfer,val_chamfer,val_emd_approx\n", 0) == 0);
    CHECK(count_lines(csv) == 4);
  }
  SUBCASE("zero epochs") {
    const std::string out = at("zero.dcae");
    const auto r = cli({"train", "--dataset", t.data, "--out-model", out, "--latent", "4",
                        "--epochs", "0", "--encoder-widths", "8", "--decoder-widths", "8",
                        "--loss-log", at("zero.csv")});
    REQUIRE(r.exit_code == 0);
    const AEModel m = load_model(out);
    CHECK(m.metadata.epochs_trained == 0);
    CHECK(count_lines(read_file(at("zero.csv"))) == 1);
  }
  SUBCASE("usage and I/O failures") {
    CHECK(cli({"train", "--dataset", t.data, "--out-model", at("x.dcae"), "--encoder-widths",
               "16,8"}).exit_code == 2);
    CHECK(cli({"train", "--dataset", t.data, "--out-model", at("x.dcae"), "--batch-size", "0"})
              .exit_code == 2);
    CHECK(cli({"train", "--dataset", at("missing"), "--out-model", at("x.dcae")}).exit_code == 4);
  }
  SUBCASE("divergence exits 3") {
    const auto r = cli({"train", "--dataset", t.data, "--out-model", at("div.dcae"), "--latent", "4",
                        "--epochs", "3", "--encoder-widths", "8", "--decoder-widths", "8", "--lr",
                        "1e300"});
    CHECK(r.exit_code == 3);
  }
}

TEST_CASE("eval") {
  auto& t = trained();
  for (const std::string subset : {"held-out", "train", "all"}) {
    const auto r = cli({"eval", "--model", t.model, "--dataset", t.data, "--subset", subset});
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(std::isfinite(j["mean_chamfer"].get<double>()));
    CHECK(std::isfinite(j["median_emd_approx"].get<double>()));
    const double acc = j["family_accuracy"];
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);
    CHECK(j["count"] == (subset == "held-out" ? 3 : subset == "train" ? 9 : 12));
  }
  const auto written = cli({"eval", "--model", t.model, "--dataset", t.data, "--out", at("eval.json")});
  REQUIRE(written.exit_code == 0);
  CHECK(json::parse(read_file(at("eval.json")))["count"] == 3);
  CHECK(cli({"eval", "--model", at("nothing.dcae"), "--dataset", t.data}).exit_code == 4);
  CHECK(cli({"eval", "--model", t.model, "--dataset", t.data, "--subset", "some"}).exit_code == 2);
}

TEST_CASE("eval after memorizing a single item") {
  const std::string data = at("single"), model = at("single.dcae");
  REQUIRE(cli({"gen-data", "--out", data, "--count", "1", "--points", "32", "--seed", "8"}).exit_code == 0);
  REQUIRE(cli({"train", "--dataset", data, "--out-model", model, "--latent", "8", "--epochs", "1000",
               "--batch-size", "1", "--encoder-widths", "16,32", "--decoder-widths", "64,128",
               "--seed", "1"})
              .exit_code == 0);
  const auto r = cli({"eval", "--model", model, "--dataset", data, "--subset", "all"});
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j["count"] == 1);
  CHECK(j["mean_chamfer"].get<double>() < 1e-3);
}

TEST_CASE("encode, decode and interp") {
  auto& t = trained();
  const AEModel model = load_model(t.model);
  const auto manifest = load_manifest(t.data);
  const std::string in0 = manifest.entry_path(manifest.entries[0]).string();
  const std::string in1 = manifest.entry_path(manifest.entries[1]).string();

  REQUIRE(cli({"encode", "--model", t.model, "--in", in0, "--out", at("z0.txt")}).exit_code == 0);
  REQUIRE(cli({"encode", "--model", t.model, "--in", in1, "--out", at("z1.txt")}).exit_code == 0);
  const auto z0 = load_latent(at("z0.txt"));
  CHECK(z0 == encode(model, normalize(load_cloud(in0)).cloud));

  REQUIRE(cli({"decode", "--model", t.model, "--latent", at("z0.txt"), "--out", at("r0.xyz")})
              .exit_code == 0);
  const PointCloud recon = load_cloud(at("r0.xyz"));
  CHECK(recon == decode(model, encode(model, normalize(load_cloud(in0)).cloud)));

  REQUIRE(cli({"interp", "--model", t.model, "--latents", at("z0.txt") + "," + at("z1.txt"),
               "--weights", "1,0", "--out", at("i.xyz")})
              .exit_code == 0);
  CHECK(load_cloud(at("i.xyz")) == recon);

  REQUIRE(cli({"interp", "--model", t.model, "--latents", at("z0.txt") + "," + at("z1.txt"),
               "--weights", "1,1", "--out", at("mid.pcb")})
              .exit_code == 0);
  CHECK(load_cloud(at("mid.pcb")).size() == 32);

  write_file(at("bad.txt"), "0.5\nabc\n");
  const auto bad = cli({"decode", "--model", t.model, "--latent", at("bad.txt"), "--out", at("b.xyz")});
  CHECK(bad.exit_code == 2);
  CHECK(bad.err.find("line 2") != std::string::npos);
  write_file(at("short.txt"), "0.5\n");
  CHECK(cli({"decode", "--model", t.model, "--latent", at("short.txt"), "--out", at("b.xyz")})
            .exit_code == 2);
  CHECK(cli({"interp", "--model", t.model, "--latents", at("z0.txt") + "," + at("z1.txt"),
             "--weights", "0,0", "--out", at("b.xyz")})
            .exit_code == 2);
  CHECK(cli({"encode", "--model", t.model, "--in", at("missing.xyz"), "--out", at("z.txt")})
            .exit_code == 4);
}

TEST_CASE("serve") {
  auto& t = trained();
  SUBCASE("ready line, requests, clean shutdown on SIGINT") {
    proc::Child server({kCli, "serve", "--model", t.model, "--dataset", t.data, "--bind", "127.0.0.1:0"});
    REQUIRE(server.started());
    const std::string line = server.read_line(std::chrono::seconds(30));
    const std::string prefix = "latentcloud: serving on http://127.0.0.1:";
    REQUIRE(line.rfind(prefix, 0) == 0);
    const int port = std::stoi(line.substr(prefix.size()));
    httplib::Client client("127.0.0.1", port);
    const auto info = client.Get("/api/v1/info");
    REQUIRE(info);
    CHECK(info->status == 200);
    CHECK(json::parse(info->body)["model"]["latent_size"] == 8);
    server.signal(SIGINT);
    const auto r = server.wait();
    CHECK(r.exit_code == 0);
  }
  SUBCASE("bad model path exits 4") {
    const auto r = cli({"serve", "--model", at("none.dcae"), "--dataset", t.data, "--bind", "127.0.0.1:0"});
    CHECK(r.exit_code == 4);
  }
  SUBCASE("bad bind address exits 2") {
    const auto r = cli({"serve", "--model", t.model, "--dataset", t.data, "--bind", "nowhere"});
    CHECK(r.exit_code == 2);
  }
}
