#include <doctest.h>

#include "ompforge/util.hpp"

#include <filesystem>

using namespace ompforge;
namespace fs = std::filesystem;

TEST_CASE("sha256 of known vector") {
    CHECK(util::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(util::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("run_command captures output and exit code") {
    auto r = util::run_command("echo hello && exit 3", fs::temp_directory_path(), 10);
    CHECK(r.exit_code == 3);
    CHECK(r.output == "hello\n");
    CHECK(!r.timed_out);
}

TEST_CASE("run_command times out and kills the child") {
    auto r = util::run_command("sleep 30", fs::temp_directory_path(), 1);
    CHECK(r.timed_out);
}

TEST_CASE("tree snapshot and restore round-trip") {
    auto dir = fs::temp_directory_path() / "ofg_snap_test";
    fs::remove_all(dir);
    fs::create_directories(dir / "sub");
    util::write_file(dir / "a.c", "int a;\n");
    util::write_file(dir / "sub" / "b.c", "int b;\n");

    auto snap = util::snapshot_tree(dir);
    auto h0 = util::tree_hash(dir);
    CHECK(snap.hash == h0);

    util::write_file(dir / "a.c", "int changed;\n");
    util::write_file(dir / "new.c", "int n;\n");
    CHECK(util::tree_hash(dir) != h0);

    util::restore_tree(dir, snap);
    CHECK(util::tree_hash(dir) == h0);
    CHECK(!fs::exists(dir / "new.c"));
    fs::remove_all(dir);
}

TEST_CASE("tree hash skips baseline/ and executables") {
    auto dir = fs::temp_directory_path() / "ofg_hash_test";
    fs::remove_all(dir);
    fs::create_directories(dir / "baseline");
    util::write_file(dir / "a.c", "int a;\n");
    auto h0 = util::tree_hash(dir);
    util::write_file(dir / "baseline" / "out.txt", "ref\n");
    CHECK(util::tree_hash(dir) == h0);
    util::write_file(dir / "app", "\x7f" "ELF");
    fs::permissions(dir / "app", fs::perms::owner_all);
    CHECK(util::tree_hash(dir) == h0);
    fs::remove_all(dir);
}

TEST_CASE("string helpers") {
    CHECK(util::trim("  x y \n") == "x y");
    CHECK(util::to_lower("AbC") == "abc");
    CHECK(util::split_lines("a\nb\n").size() == 2);
    CHECK(util::split_lines("a\nb").size() == 2);
    CHECK(util::format_ns_as_us(4181300000000LL) == "4181300000");
    CHECK(util::format_ns_as_us(1500) == "1.500");
}
