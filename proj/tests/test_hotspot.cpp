#include <doctest.h>

#include "ompforge/hotspot.hpp"
#include "ompforge/util.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ompforge;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = OMPFORGE_FIXTURE_DIR;

LoopType classify_snippet(const std::string& src, size_t loop_index = 0) {
    auto unit = enumerate_loops(src, "t.c");
    REQUIRE(unit.loops.size() > loop_index);
    auto accs = extract_array_accesses(unit.loops[loop_index], unit);
    return classify_loop(unit.loops[loop_index], accs, unit);
}

struct Label {
    std::string file, loop_id, type;
    bool rng;
};

std::vector<Label> load_labels() {
    std::ifstream in(kFixtures / "taxonomy" / "labels.tsv");
    REQUIRE(in.good());
    std::vector<Label> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        Label l;
        std::string rng;
        std::getline(ss, l.file, '\t');
        std::getline(ss, l.loop_id, '\t');
        std::getline(ss, l.type, '\t');
        std::getline(ss, rng, '\t');
        l.rng = rng == "1";
        out.push_back(l);
    }
    return out;
}

} // namespace

TEST_CASE("taxonomy corpus: 30/30 labels match, under one second") {
    auto labels = load_labels();
    REQUIRE(labels.size() == 30);

    auto t0 = std::chrono::steady_clock::now();
    int matched = 0;
    for (const auto& label : labels) {
        auto src = util::read_file(kFixtures / "taxonomy" / label.file);
        auto art = analyze_unit(enumerate_loops(src, label.file), label.file);
        const auto* rec = art.find(label.loop_id);
        REQUIRE(rec != nullptr);
        CAPTURE(label.file);
        CHECK(loop_type_name(rec->type) == label.type);
        CHECK(rec->rng_special_case == label.rng);
        if (loop_type_name(rec->type) == label.type && rec->rng_special_case == label.rng) ++matched;
    }
    auto elapsed = std::chrono::steady_clock::now() - t0;
    CHECK(matched == 30);
    CHECK(std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() < 1000);
}

TEST_CASE("CSR pattern: outer loop is Type B") {
    std::string src =
        "for (int i = 0; i < nrows; i++) {\n"
        "  double sum = 0.0;\n"
        "  for (int j = row[i]; j < row[i+1]; j++) sum += a[j] * x[col[j]];\n"
        "  y[i] = sum;\n"
        "}\n";
    CHECK(classify_snippet(src, 0) == LoopType::B);
    CHECK(classify_snippet(src, 1) == LoopType::F); // inner reduction stays a reduction
}

TEST_CASE("canonical recurrence is Type E") {
    CHECK(classify_snippet("for(i=1;i<n;i++) a[i]=a[i-1]+b[i];") == LoopType::E);
}

TEST_CASE("indirect write is Type D") {
    CHECK(classify_snippet("for(i=0;i<n;i++) hist[idx[i]]+=1;") == LoopType::D);
}

TEST_CASE("scalar accumulation is Type F") {
    CHECK(classify_snippet("for(i=0;i<n;i++) s+=x[i];") == LoopType::F);
}

TEST_CASE("precedence: mixed loop never labeled more parallel than it is") {
    // recurrence + reduction in one body stays E
    std::string src = "for(i=1;i<n;i++){ a[i]=a[i-1]+b[i]; s+=a[i]; }";
    CHECK(classify_snippet(src) == LoopType::E);
    // indirect write + reduction stays D
    std::string src2 = "for(i=0;i<n;i++){ hist[idx[i]]+=1; s+=x[i]; }";
    CHECK(classify_snippet(src2) == LoopType::D);
}

TEST_CASE("classification is deterministic across repeated runs") {
    auto labels = load_labels();
    for (const auto& label : labels) {
        auto src = util::read_file(kFixtures / "taxonomy" / label.file);
        auto a1 = analyze_unit(enumerate_loops(src, label.file), label.file);
        auto a2 = analyze_unit(enumerate_loops(src, label.file), label.file);
        REQUIRE(a1.records.size() == a2.records.size());
        for (size_t i = 0; i < a1.records.size(); ++i) CHECK(a1.records[i].type == a2.records[i].type);
    }
}

TEST_CASE("unclassifiable irregular loop defaults to E with a warning") {
    std::string src = "for(;;) { step(); }";
    auto unit = enumerate_loops(src, "t.c");
    std::vector<Hazard> hz;
    std::string note;
    auto t = classify_loop(unit.loops[0], {}, unit, &hz, &note);
    CHECK(t == LoopType::E);
    CHECK(!note.empty());
}

TEST_CASE("work model: spec example counts") {
    auto unit = enumerate_loops("for(i=0;i<1000;i++) y[i]=a*x[i]+y[i];", "t.c");
    auto accs = extract_array_accesses(unit.loops[0], unit);
    auto we = estimate_work(unit.loops[0], accs, unit);
    REQUIRE(we.trip_count.has_value());
    CHECK(*we.trip_count == 1000);
    CHECK(we.ops_per_iter == 4); // {*, +} plus reads x[i], y[i]; the write not double-counted
    REQUIRE(we.work.has_value());
    CHECK(*we.work == 4000);
}

TEST_CASE("work model: symbolic bound and empty body floor") {
    auto u1 = enumerate_loops("for(i=0;i<n;i++) y[i]=x[i];", "t.c");
    auto w1 = estimate_work(u1.loops[0], extract_array_accesses(u1.loops[0], u1), u1);
    CHECK(!w1.trip_count.has_value());
    CHECK(w1.trip_text() == "n");

    auto u2 = enumerate_loops("for(i=0;i<n;i++);", "t.c");
    auto w2 = estimate_work(u2.loops[0], {}, u2);
    CHECK(w2.ops_per_iter == 1);
}

TEST_CASE("work model: folded bounds with steps and shifts") {
    auto u = enumerate_loops("for(i=0;i<1<<10;i++) y[i]=0; for(j=2;j<=20;j+=2) z[j]=0;", "t.c");
    auto w0 = estimate_work(u.loops[0], {}, u);
    REQUIRE(w0.trip_count.has_value());
    CHECK(*w0.trip_count == 1024);
    auto w1 = estimate_work(u.loops[1], {}, u);
    REQUIRE(w1.trip_count.has_value());
    CHECK(*w1.trip_count == 10);
}

TEST_CASE("priorities: timed-region dominance, setup, small fixups") {
    std::string src =
        "void bench(int n) {\n"
        "  for (int i = 0; i < 100000; i++) init[i] = 0;\n" // one-time setup
        "  timer_start();\n"
        "  for (int i = 0; i < 1000; i++)\n"
        "    for (int j = 0; j < 1000; j++)\n"
        "      acc[i] += m[i * 1000 + j];\n"
        "  for (int k = 0; k < 4; k++) fix[k] = acc[k];\n" // unrolled fixup
        "  timer_stop();\n"
        "}\n";
    auto art = analyze_unit(enumerate_loops(src, "t.c"), "bench");
    REQUIRE(art.records.size() == 4);
    CHECK(art.records[0].priority == Priority::SECONDARY); // setup before the timed region
    CHECK(art.records[1].priority == Priority::CRITICAL);  // dominant nest
    CHECK(art.records[3].priority == Priority::AVOID);     // 4-iteration fixup
    CHECK(art.records[3].has_hazard(HazardKind::small_trip_count));
    CHECK(!art.records[0].in_timed_region);
    CHECK(art.records[1].in_timed_region);
}

TEST_CASE("priority monotonicity: more work never lowers the class") {
    auto rank = [](Priority p) {
        switch (p) {
        case Priority::AVOID: return 0;
        case Priority::SECONDARY: return 1;
        case Priority::IMPORTANT: return 2;
        case Priority::CRITICAL: return 3;
        }
        return 0;
    };
    int prev_rank = -1;
    for (long long trip : {8LL, 100LL, 20000LL, 1000000LL}) {
        std::string src = "timer_start();\n"
                          "for (int i = 0; i < 1000000; i++) big[i] = i;\n"
                          "for (int j = 0; j < " + std::to_string(trip) + "; j++) s += x[j];\n"
                          "timer_stop();\n";
        auto art = analyze_unit(enumerate_loops(src, "t.c"), "mono");
        REQUIRE(art.records.size() == 2);
        int r = rank(art.records[1].priority);
        CHECK(r >= prev_rank);
        prev_rank = r;
    }
}

TEST_CASE("rng special case: EP-shaped nest true, dense and reduction-only false") {
    auto ep = util::read_file(kFixtures / "taxonomy" / "rng_block_sum.c");
    auto u1 = enumerate_loops(ep, "ep.c");
    REQUIRE(u1.loops.size() == 2);
    CHECK(detect_rng_special_case(u1.loops[0], u1.loops[1], u1));

    auto dense = util::read_file(kFixtures / "taxonomy" / "a_matmul.c");
    auto u2 = enumerate_loops(dense, "mm.c");
    CHECK(!detect_rng_special_case(u2.loops[0], u2.loops[1], u2));

    auto u3 = enumerate_loops("for(i=0;i<n;i++){ for(j=0;j<m;j++){ s += x[i][j]; } }", "red.c");
    CHECK(!detect_rng_special_case(u3.loops[0], u3.loops[1], u3));
}

TEST_CASE("artifact emission: round-trip, determinism, source non-interference") {
    auto dir = fs::temp_directory_path() / "ofg_emit_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string src = util::read_file(kFixtures / "taxonomy" / "b_spmv.c");
    util::write_file(dir / "kernel.c", src);
    auto before = util::sha256_hex(util::read_file(dir / "kernel.c"));

    auto art = analyze_unit(enumerate_loops(src, "kernel.c"), "spmv");
    REQUIRE(art.records.size() == 2);
    emit_analysis_artifact(art, dir);

    CHECK(fs::exists(dir / "analysis.md"));
    CHECK(fs::exists(dir / "analysis.json"));
    CHECK(util::sha256_hex(util::read_file(dir / "kernel.c")) == before);

    auto loaded = load_analysis_artifact(dir);
    REQUIRE(loaded.records.size() == art.records.size());
    for (size_t i = 0; i < art.records.size(); ++i) {
        CHECK(loaded.records[i].loop_id == art.records[i].loop_id);
        CHECK(loaded.records[i].type == art.records[i].type);
        CHECK(loaded.records[i].priority == art.records[i].priority);
        CHECK(loaded.records[i].work.ops_per_iter == art.records[i].work.ops_per_iter);
        CHECK(loaded.records[i].in_timed_region == art.records[i].in_timed_region);
    }

    auto md1 = util::read_file(dir / "analysis.md");
    auto js1 = util::read_file(dir / "analysis.json");
    emit_analysis_artifact(art, dir);
    CHECK(util::read_file(dir / "analysis.md") == md1);
    CHECK(util::read_file(dir / "analysis.json") == js1);
    fs::remove_all(dir);
}

TEST_CASE("analysis markdown lists every record") {
    auto dir = fs::temp_directory_path() / "ofg_emit_md";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string src = "timer_start(); for(i=0;i<n;i++){s+=x[i];} for(j=1;j<n;j++){a[j]=a[j-1];} "
                      "for(k=0;k<n;k++){y[k]=x[k];} timer_stop();";
    auto art = analyze_unit(enumerate_loops(src, "t.c"), "three");
    REQUIRE(art.records.size() == 3);
    emit_analysis_artifact(art, dir);
    auto md = util::read_file(dir / "analysis.md");
    for (const auto& rec : art.records) CHECK(md.find("| " + rec.loop_id + " |") != std::string::npos);
    CHECK(md.find("## Data Notes") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("fold_int_expr handles the common constant shapes") {
    CHECK(fold_int_expr("1000") == 1000);
    CHECK(fold_int_expr("1 << 4") == 16);
    CHECK(fold_int_expr("(2048/2) + 1") == 1025);
    CHECK(fold_int_expr("3*4 - 2") == 10);
    CHECK(!fold_int_expr("n").has_value());
    CHECK(!fold_int_expr("N * sizeof(double)").has_value());
}
