#include <cstdio>
#include <sstream>

#include "pas/search/search.hpp"

namespace pas {

std::string to_csv(const TrainReport& r) {
  std::ostringstream out;
  out << "epoch,train_loss,val_loss,val_acc\n";
  char buf[128];
  for (int e = 0; e < r.epochs(); ++e) {
    const auto i = static_cast<std::size_t>(e);
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g\n", e + 1, r.train_loss[i], r.val_loss[i], r.val_acc[i]);
    out << buf;
  }
  return out.str();
}

nlohmann::json to_json(const TrainReport& r) {
  return {
      {"train_loss", r.train_loss},
      {"val_loss", r.val_loss},
      {"val_acc", r.val_acc},
      {"wall_time_seconds", r.wall_time_seconds},
      {"best_epoch", r.best_epoch},
      {"best_val_acc", r.best_val_acc},
      {"best_val_loss", r.best_val_loss},
  };
}

}  // namespace pas
