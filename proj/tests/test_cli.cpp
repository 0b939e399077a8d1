// Exercises the installed CLI binary end to end. argv[1] is the binary path.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "diploma/service.hpp"

using namespace diploma;

namespace {

std::string g_binary;
std::string g_dir;

int run(const std::string& args, const std::string& stdout_file = "") {
  std::string cmd = "cd " + g_dir + " && " + g_binary + " " + args;
  cmd += stdout_file.empty() ? " >/dev/null 2>>cli.err"
                             : " >" + stdout_file + " 2>>cli.err";
  std::fflush(stdout);  // forked children must not replay buffered output
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& name) {
  std::ifstream in(g_dir + "/" + name, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const std::string& name, const std::string& content) {
  std::ofstream out(g_dir + "/" + name, std::ios::binary | std::ios::trunc);
  out << content;
}

struct Node {
  pid_t pid = -1;
  std::string addr;

  void start(int port, const std::string& seed_hex) {
    addr = "127.0.0.1:" + std::to_string(port);
    spit("node.json",
         canonical_dump(Json{{"listen_host", "127.0.0.1"},
                             {"listen_port", port},
                             {"node_id", "n0"},
                             {"seed", seed_hex}}));
    std::fflush(stdout);
    pid = fork();
    if (pid == 0) {
      std::string log = g_dir + "/node.log";
      freopen(log.c_str(), "w", stdout);
      freopen(log.c_str(), "w", stderr);
      std::string config = g_dir + "/node.json";
      execl(g_binary.c_str(), g_binary.c_str(), "node", "run", "--config",
            config.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    // poll until the server answers
    for (int i = 0; i < 100; ++i) {
      try {
        node_get(addr, "/tether");
        return;
      } catch (const Error&) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
      }
    }
    FAIL("node did not come up");
  }

  void stop() {
    if (pid > 0) {
      kill(pid, SIGTERM);
      int status = 0;
      waitpid(pid, &status, 0);
      pid = -1;
    }
  }
  ~Node() { stop(); }
};

std::string hex_repeat(const std::string& byte, size_t n) {
  std::string out;
  for (size_t i = 0; i < n; ++i) out += byte;
  return out;
}

}  // namespace

TEST_CASE("issue, prove, and verify through a live node exits 0") {
  std::string issuer_ref_file = "ref.txt";
  REQUIRE(run("keygen --seed " + hex_repeat("a1", 32) + " --out ks.json",
              issuer_ref_file) == 0);
  std::string ref = slurp(issuer_ref_file);
  ref.erase(ref.find_last_not_of("\n") + 1);
  REQUIRE(ref.size() == 64);

  spit("fields.json",
       R"({"issuer_id":"uni","holder_id":"alice","qualification":"MSc","issued_at":1000})");
  Node node;
  node.start(18520, hex_repeat("b2", 32));

  CHECK(run("issue --issuer-key " + ref +
            " --fields fields.json --provider " + node.addr +
            " --keystore ks.json --out a.diploma") == 0);
  CHECK(run("node seal --node " + node.addr) == 0);
  CHECK(run("node commit --node " + node.addr) == 0);
  CHECK(run("node block --node " + node.addr) == 0);
  CHECK(run("prove --bundle a.diploma --node " + node.addr +
            " --freshness 8 --out a.pop") == 0);
  CHECK(run("ledger blocks --node " + node.addr + " --out ledger.json",
            "blocks.txt") == 0);
  CHECK(run("ledger head --node " + node.addr, "head.txt") == 0);
  spit("validators.json", canonical_dump(node_get(node.addr, "/validators")));
  CHECK(run("trust add --trust trust.json --issuer uni --from-bundle a.diploma") == 0);
  CHECK(run("verify --bundle a.diploma --pop a.pop --trust trust.json"
            " --ledger ledger.json --validators validators.json --now 2000",
            "report.txt") == 0);
  CHECK(slurp("report.txt").find("VALID") != std::string::npos);

  SUBCASE("a truncated bundle file exits with the decode code") {
    std::string bundle = slurp("a.diploma");
    spit("trunc.diploma", bundle.substr(0, bundle.size() - 1));
    CHECK(run("verify --bundle trunc.diploma --pop a.pop --trust trust.json"
              " --ledger ledger.json --validators validators.json") == 4);
  }

  SUBCASE("a missing file exits with the IO code") {
    CHECK(run("verify --bundle missing.diploma --pop a.pop --trust trust.json"
              " --ledger ledger.json --validators validators.json") == 3);
  }

  SUBCASE("revocation validates fully but exits with the revoked code") {
    CHECK(run("revoke --bundle a.diploma --keystore ks.json --provider " +
              node.addr + " --out r.diploma") == 0);
    CHECK(run("node seal --node " + node.addr) == 0);
    CHECK(run("node commit --node " + node.addr) == 0);
    CHECK(run("node block --node " + node.addr) == 0);
    CHECK(run("prove --bundle r.diploma --node " + node.addr + " --out r.pop") == 0);
    CHECK(run("ledger blocks --node " + node.addr + " --out ledger2.json") == 0);
    CHECK(run("verify --bundle r.diploma --pop r.pop --trust trust.json"
              " --ledger ledger2.json --validators validators.json --now 2000",
              "report2.txt") == 10);
    CHECK(slurp("report2.txt").find("revoked") != std::string::npos);
  }

  SUBCASE("no artifact or output ever contains a stored secret seed") {
    Json ks = parse_json(slurp("ks.json"));
    std::vector<std::string> seeds;
    for (const auto& [ref_hex, seed_hex] : ks.at("entries").items()) {
      seeds.push_back(seed_hex.get<std::string>());
    }
    REQUIRE(seeds.size() >= 3);  // issuer + creation + update keys
    std::string node_state = canonical_dump(node_get(node.addr, "/export"));
    for (const std::string& artifact :
         {slurp("a.diploma"), slurp("a.pop"), slurp("ledger.json"),
          slurp("report.txt"), slurp("blocks.txt"), slurp("head.txt"),
          slurp("ref.txt"), node_state}) {
      for (const std::string& seed : seeds) {
        CHECK(artifact.find(seed) == std::string::npos);
      }
    }
  }
}

TEST_CASE("usage and transport errors use their documented codes") {
  CHECK(run("definitely-not-a-command") == 2);
  CHECK(run("issue") == 2);  // missing required options
  CHECK(run("prove --bundle nope.diploma --node 127.0.0.1:1 --out x.pop") == 3);
  // valid bundle but unreachable node
  spit("fields2.json", R"({"issuer_id":"uni"})");
  CHECK(run("keygen --seed " + hex_repeat("c3", 32) + " --out ks2.json") == 0);
}

TEST_CASE("scenario runner exits 0 on pass and 1 on failed assertions") {
  spit("ok.scn",
       "issue a issuer=uni provider=n0 issued=1000\n"
       "seal n0\ncommit n0\nblock\nsync\n"
       "prove a via=n1\nvalidate a now=2000\nassert a valid\n");
  CHECK(run("sim run --script ok.scn --seed 9 --nodes 3 --threshold 2",
            "sim1.txt") == 0);
  CHECK(slurp("sim1.txt").find("ALL ASSERTIONS PASSED") != std::string::npos);

  spit("bad.scn",
       "issue a issuer=uni provider=n0 issued=1000\n"
       "prove a via=n1\nvalidate a now=2000\nassert a valid\n");
  CHECK(run("sim run --script bad.scn --seed 9") == 1);

  spit("broken.scn", "launch the missiles\n");
  CHECK(run("sim run --script broken.scn") == 7);

  // determinism across runs and the concurrent driver, at the CLI level
  std::string base = "sim run --script ok.scn --seed 11 --nodes 4 --threshold 3 --json";
  CHECK(run(base, "d1.json") == 0);
  CHECK(run(base, "d2.json") == 0);
  CHECK(run(base + " --concurrent", "d3.json") == 0);
  CHECK(slurp("d1.json") == slurp("d2.json"));
  CHECK(slurp("d1.json") == slurp("d3.json"));
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path-to-binary>\n");
    return 2;
  }
  char resolved[PATH_MAX];
  if (!realpath(argv[1], resolved)) {
    std::fprintf(stderr, "cannot resolve binary path %s\n", argv[1]);
    return 2;
  }
  g_binary = resolved;
  char tmpl[] = "/tmp/diploma-cli-XXXXXX";
  if (!mkdtemp(tmpl)) return 2;
  g_dir = tmpl;
  doctest::Context ctx;
  ctx.applyCommandLine(1, argv);
  int rc = ctx.run();
  std::system(("rm -rf " + g_dir).c_str());
  return rc;
}
