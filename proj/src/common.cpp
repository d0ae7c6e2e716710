#include "retscreen/common.hpp"

#include <cstdio>
#include <cstdlib>
#include <thread>

namespace retscreen {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::duplicate_image_id: return "DUPLICATE_IMAGE_ID";
    case Errc::label_conflict: return "LABEL_CONFLICT";
    case Errc::bad_enum: return "BAD_ENUM";
    case Errc::missing_field: return "MISSING_FIELD";
    case Errc::empty_cohort: return "EMPTY_COHORT";
    case Errc::invalid_config: return "INVALID_CONFIG";
    case Errc::io_read_failure: return "IO_READ_FAILURE";
    case Errc::io_write_failure: return "IO_WRITE_FAILURE";
    case Errc::bad_target: return "BAD_TARGET";
    case Errc::crop_too_large: return "CROP_TOO_LARGE";
    case Errc::shape_mismatch: return "SHAPE_MISMATCH";
    case Errc::mode_mismatch: return "MODE_MISMATCH";
    case Errc::checkpoint_io: return "CHECKPOINT_IO";
    case Errc::checkpoint_shape_mismatch: return "CHECKPOINT_SHAPE_MISMATCH";
    case Errc::one_class_only: return "ONE_CLASS_ONLY";
    case Errc::divergence: return "DIVERGENCE";
    case Errc::unknown_individual: return "UNKNOWN_INDIVIDUAL";
    case Errc::no_images: return "NO_IMAGES";
    case Errc::empty_input: return "EMPTY";
    case Errc::bad_usage: return "BAD_USAGE";
  }
  return "UNKNOWN";
}

void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn) {
  if (n == 0) return;
  size_t workers = threads < 1 ? 1 : static_cast<size_t>(threads);
  if (workers > n) workers = n;
  if (workers == 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    size_t begin = n * w / workers;
    size_t end = n * (w + 1) / workers;
    pool.emplace_back([begin, end, &fn] {
      for (size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string format_double(double v) {
  // %.17g always round-trips; prefer the shortest representation that does.
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace retscreen
