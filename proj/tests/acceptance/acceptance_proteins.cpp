// Desk-scale checks on PROTEINS. The dataset is read from the TU files in
// $PAS_PROTEINS_DIR; without it the run is reported as skipped (exit 77).
// summary.json goes to $PAS_ACCEPTANCE_OUT (default: the working directory).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "pas/graphdata/tu_format.hpp"
#include "pas/search/search.hpp"

int main() {
  namespace fs = std::filesystem;
  using namespace pas;
  const char* dir = std::getenv("PAS_PROTEINS_DIR");
  if (dir == nullptr || !fs::exists(fs::path(dir) / "PROTEINS_A.txt")) {
    std::printf("SKIP [7] PROTEINS 10-fold CV: set PAS_PROTEINS_DIR to a directory holding PROTEINS_*.txt\n");
    std::printf("SKIP [8] search vs random-search wall time: needs PROTEINS\n");
    return 77;
  }
  const char* out_env = std::getenv("PAS_ACCEPTANCE_OUT");
  const fs::path out = out_env ? fs::path(out_env) : fs::current_path();
  fs::create_directories(out);

  const Dataset ds = load_tu_dataset(dir, "PROTEINS");
  SearchConfig cfg;  // L = 2, d = 32, T = 200
  cfg.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  const SearchResult searched = pas_search(ds, cfg);
  const CvResult cv = cross_validate(ds, searched.arch, 10, cfg);
  const bool pass7 = ds.size() == 1113 && cv.mean >= 0.70;
  std::printf("%s [7] PROTEINS 10-fold CV: %zu graphs, %s, test acc %.4f +- %.4f (need 0.70), %.0fs\n",
              pass7 ? "PASS" : "FAIL", ds.size(), searched.arch.describe().c_str(), cv.mean, cv.std,
              cv.wall_time_seconds);
  std::fflush(stdout);

  SearchConfig rcfg = cfg;
  rcfg.epochs = 100;
  // The search loop is sequential, so the baseline runs on one thread too.
  rcfg.threads = 1;
  const RandomSearchResult random = random_search(ds, rcfg, 50);
  const double search_secs = searched.report.wall_time_seconds;
  const bool pass8 = search_secs < random.wall_time_seconds;
  std::printf("%s [8] search vs random-search wall time: search %.0fs, random (50 x 100 epochs) %.0fs\n",
              pass8 ? "PASS" : "FAIL", search_secs, random.wall_time_seconds);

  const nlohmann::json summary = {
      {"arch", to_json(searched.arch)},
      {"mean", cv.mean},
      {"std", cv.std},
      {"folds", cv.folds.size()},
      {"wall_time_seconds", cv.wall_time_seconds},
      {"search_wall_time_seconds", search_secs},
      {"random_search_wall_time_seconds", random.wall_time_seconds},
  };
  std::ofstream(out / "summary.json") << summary.dump(2) << "\n";
  return pass7 && pass8 ? 0 : 1;
}
