#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "spinflip/errors.hpp"
#include "spinflip/experiments.hpp"
#include "spinflip/export.hpp"
#include "spinflip/units.hpp"

using namespace spinflip;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("spinflip_unit_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string csv(const Table& t) {
  std::ostringstream out;
  write_table_csv(out, t, "{}");
  return out.str();
}

ExperimentSettings quick_settings() {
  ExperimentSettings s;
  s.n_segments = 24;
  s.optimizer.restarts = 2;
  s.qsl.rel_tol = 0.02;
  return s;
}

void write_results(const fs::path& dir, const Table& t) {
  fs::create_directories(dir);
  std::ofstream out(dir / "results.csv");
  write_table_csv(out, t, "{\"run\":1}");
}

}  // namespace

TEST_CASE("parallel_for visits every index once and rethrows the first failure") {
  std::vector<std::atomic<int>> hits(50);
  parallel_for(50, 3, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, 2, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}

TEST_CASE("point store keeps results only for a matching fingerprint") {
  const fs::path d = fresh_dir("store");
  PointStore store(d, "abc");
  PointResult r;
  r.values = {1.5, std::nan("")};
  r.status = "BRACKET_FAILED";
  r.waveform = PhaseWaveform({0.1, -0.2}, 1.25);
  store.save(3, r);
  const auto back = store.load(3);
  REQUIRE(back.has_value());
  CHECK(back->values[0] == 1.5);
  CHECK(std::isnan(back->values[1]));
  CHECK(back->status == "BRACKET_FAILED");
  CHECK(back->waveform->phases == r.waveform->phases);
  CHECK_FALSE(store.load(4).has_value());
  CHECK_FALSE(PointStore(d, "other").load(3).has_value());
}

TEST_CASE("optical sweep is independent of the worker count and resumes identically") {
  const std::vector<double> grid = {1.0, 100.0};
  ExperimentSettings s = quick_settings();
  s.workers = 1;
  const ExperimentOutput a = run_optical_blockade_sweep(grid, s);
  s.workers = 2;
  const ExperimentOutput b = run_optical_blockade_sweep(grid, s);
  CHECK(csv(a.table) == csv(b.table));
  CHECK(a.table.columns ==
        std::vector<std::string>{"vrr_over_omega_L", "tau_star_omega_L", "pi_over_vrr", "fidelity", "t_r_omega_L"});

  const fs::path d = fresh_dir("resume");
  PointStore store(d, "fp");
  s.store = &store;
  const ExperimentOutput first = run_optical_blockade_sweep(grid, s);
  CHECK(csv(first.table) == csv(a.table));
  // Drop one checkpoint: only that point is recomputed, the other is reused
  // untouched (its file is never rewritten).
  const auto kept = fs::last_write_time(d / "000000.json");
  fs::remove(d / "000001.json");
  const ExperimentOutput resumed = run_optical_blockade_sweep(grid, s);
  CHECK(csv(resumed.table) == csv(a.table));
  CHECK(fs::last_write_time(d / "000000.json") == kept);
  CHECK(fs::exists(d / "000001.json"));
}

TEST_CASE("detuning sweep rows carry the dressed quantities") {
  ExperimentSettings s = quick_settings();
  const ExperimentOutput out =
      run_detuning_sweep(from_mhz(10.0), from_mhz(1.0), {from_mhz(-5.9)}, 1.0 / 150.0, s);
  REQUIRE(out.table.size() == 1u);
  CHECK(out.table.status[0] == "ok");
  CHECK(out.table.rows[0][out.table.column("j_mhz")] == doctest::Approx(0.999).epsilon(0.01));
  const double tau = out.table.rows[0][out.table.column("tau_star_us")];
  CHECK(tau > 1.1);
  CHECK(tau < 1.45);
  CHECK(out.table.rows[0][out.table.column("f_r")] < out.table.rows[0][out.table.column("fidelity")]);
  REQUIRE(out.waveforms[0].has_value());
  CHECK(out.waveforms[0]->tau == tau);
}

TEST_CASE("export merges, deduplicates and sorts by key") {
  const fs::path d = fresh_dir("export");
  Table t1;
  t1.columns = {"x", "y"};
  t1.add_row({2.0, 20.0});
  t1.add_row({1.0, 10.0});
  Table t2 = t1;
  t2.rows = {{3.0, 30.0}, {1.0, 99.0}};
  write_results(d / "a", t1);
  write_results(d / "b" / "nested", t2);
  const fs::path out = export_results(d, ExportFormat::Csv);
  CHECK(out == d / "export.csv");
  const CsvDocument doc = [&] {
    std::ifstream in(out);
    return read_table_csv(in);
  }();
  REQUIRE(doc.table.size() == 3u);
  CHECK(doc.table.column_values("x") == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(doc.table.rows[0][1] == 10.0);

  const std::string first = slurp(out);
  export_results(d, ExportFormat::Csv);
  CHECK(slurp(out) == first);
  const fs::path js = export_results(d, ExportFormat::Json);
  const std::string json_first = slurp(js);
  export_results(d, ExportFormat::Json);
  CHECK(slurp(js) == json_first);
  CHECK(json_first.find("\"rows\"") != std::string::npos);
}

TEST_CASE("export refuses mixed schemas and empty directories") {
  const fs::path d = fresh_dir("mixed");
  Table t1;
  t1.columns = {"x", "y"};
  t1.add_row({1.0, 2.0});
  Table t2;
  t2.columns = {"x", "z"};
  t2.add_row({1.0, 2.0});
  write_results(d / "a", t1);
  write_results(d / "b", t2);
  try {
    export_results(d, ExportFormat::Csv);
    FAIL("expected MIXED_SCHEMAS");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MixedSchemas);
  }
  const fs::path empty = fresh_dir("empty");
  CHECK_THROWS_AS(export_results(empty, ExportFormat::Csv), Error);
  CHECK_FALSE(fs::exists(empty / "export.csv"));
  CHECK(export_format_from_string("json") == ExportFormat::Json);
  CHECK_THROWS_AS(export_format_from_string("xml"), Error);
}
