#include <cstdlib>
#include <filesystem>

#include <sys/wait.h>
#include <unistd.h>

#include <doctest.h>

#include "artkg/graph.hpp"
#include "artkg/util.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string output;
};

Result cli(const fs::path& dir, const std::string& args) {
    auto log = dir / "out.log";
    std::string cmd = "cd '" + dir.string() + "' && '" + ARTKG_CLI + "' " + args + " > '" + log.string() + "' 2>&1";
    int rc = std::system(cmd.c_str());
    return {rc == -1 ? -1 : WEXITSTATUS(rc), artkg::read_file(log)};
}

struct TempDir {
    fs::path path = fs::temp_directory_path() / ("artkg_cli_test_" + std::to_string(::getpid()));
    TempDir() { fs::create_directories(path); }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("cli argument handling") {
    TempDir tmp;
    auto r = cli(tmp.path, "foo");
    CHECK(r.code == 2);
    CHECK(r.output.find("unknown subcommand 'foo'") != std::string::npos);
    CHECK(cli(tmp.path, "").code == 2);
    CHECK(cli(tmp.path, "--help").code == 0);
    CHECK(cli(tmp.path, "ingest --in x.json").code == 2);
    auto missing = cli(tmp.path, "ingest --in nope.json --out g.nt");
    CHECK(missing.code == 1);
    CHECK(missing.output.find("error:") != std::string::npos);
}

TEST_CASE("cli ingest, filter and synth") {
    TempDir tmp;
    fs::copy_file(testing::source_path("tests/fixtures/contaminated.json"), tmp.path / "docs.json");
    REQUIRE(cli(tmp.path, "ingest --in docs.json --out akg.nt").code == 0);
    CHECK(fs::exists(tmp.path / "akg.nt.meta.json"));
    auto f = cli(tmp.path, "filter --in akg.nt --out clean.nt");
    REQUIRE(f.code == 0);
    auto planted = testing::golden_counts()["contaminated_planted"].get<std::size_t>();
    CHECK(f.output.find("removed_count " + std::to_string(planted)) != std::string::npos);
    auto before = artkg::parse_ntriples(artkg::read_file(tmp.path / "akg.nt"));
    auto after = artkg::parse_ntriples(artkg::read_file(tmp.path / "clean.nt"));
    CHECK(before.size() - after.size() == planted);

    REQUIRE(cli(tmp.path, "--seed 3 synth --n 21 --out-docs s.json --out-labels l.tsv --out-split sp.tsv").code == 0);
    auto first = artkg::read_file(tmp.path / "s.json");
    REQUIRE(cli(tmp.path, "--seed 3 synth --n 21 --out-docs s.json").code == 0);
    CHECK(artkg::read_file(tmp.path / "s.json") == first);
    CHECK(cli(tmp.path, "synth --n 21 --class-signal 2 --out-docs s.json").code == 2);
}
