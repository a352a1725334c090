#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>

#include "morphalign/error.hpp"
#include "morphalign/parallel.hpp"
#include "morphalign/pipeline.hpp"

namespace morphalign {

namespace {

const std::vector<std::string> kInputColumns = {"id",   "image_a", "image_b", "lm_a",
                                                "lm_b", "method",  "alpha",   "output"};

std::vector<std::string> split_csv_line(const std::string& line, int line_no) {
  if (line.find('"') != std::string::npos)
    throw FormatError("manifest line " + std::to_string(line_no) + ": quoted fields are not supported");
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<MorphJob> parse_manifest(const std::string& text, const std::filesystem::path& base_dir,
                                     const MorphSettings& base) {
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  std::vector<MorphJob> jobs;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line.front() == '#') continue;
    auto cells = split_csv_line(line, line_no);
    if (header.empty()) {
      header = cells;
      const bool prefix_ok = header.size() >= kInputColumns.size() &&
                             std::equal(kInputColumns.begin(), kInputColumns.end(), header.begin());
      const bool extra_ok = header.size() == kInputColumns.size() ||
                            (header.size() == kInputColumns.size() + 1 && header.back() == "jpeg_target");
      if (!prefix_ok || !extra_ok)
        throw FormatError("manifest header must be \"id,image_a,image_b,lm_a,lm_b,method,alpha,output"
                          "[,jpeg_target]\"");
      continue;
    }
    if (cells.size() != header.size())
      throw FormatError("manifest line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields, got " + std::to_string(cells.size()));
    MorphJob job;
    job.settings = base;
    job.id = cells[0];
    job.image_a = resolve(base_dir, cells[1]);
    job.image_b = resolve(base_dir, cells[2]);
    job.landmarks_a = resolve(base_dir, cells[3]);
    job.landmarks_b = resolve(base_dir, cells[4]);
    try {
      job.method = parse_method(cells[5]);
      std::size_t used = 0;
      job.alpha = std::stod(cells[6], &used);
      if (used != cells[6].size() || !(job.alpha >= 0.0 && job.alpha <= 1.0))
        throw ParameterError("alpha must be a number in [0,1]");
      if (header.size() > kInputColumns.size() && !cells.back().empty())
        job.jpeg_target = parse_jpeg_target(cells.back());
    } catch (const std::logic_error&) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": alpha is not a number");
    } catch (const Error& e) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    job.output = resolve(base_dir, cells[7]);
    jobs.push_back(std::move(job));
  }
  if (header.empty()) throw FormatError("manifest is missing its header row");
  return jobs;
}

std::vector<MorphJob> read_manifest(const std::filesystem::path& path, const MorphSettings& base) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest: " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_manifest(ss.str(), path.parent_path(), base);
}

int capped_parallelism(int requested) {
  int n = std::max(1, requested);
  if (const char* env = std::getenv("MORPHALIGN_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) n = std::min<long>(n, cap);
  }
  return n;
}

std::vector<ManifestRow> run_batch(const std::vector<MorphJob>& jobs, int parallelism, bool strict) {
  std::vector<ManifestRow> rows(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto worker = [&](int omp_threads) {
    par::set_thread_limit(omp_threads);
    for (;;) {
      if (stop.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      if (!strict) {
        rows[i] = run_job(jobs[i]);
        continue;
      }
      try {
        rows[i] = run_job_or_throw(jobs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
        stop.store(true);
      }
    }
  };

  const int workers = std::min<int>(capped_parallelism(parallelism), std::max<std::size_t>(jobs.size(), 1));
  if (workers <= 1) {
    worker(par::max_threads());
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker, 1);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

std::string format_manifest(const std::vector<ManifestRow>& rows) {
  std::string out =
      "id,image_a,image_b,lm_a,lm_b,method,alpha,output,initial_energy,final_energy,iterations,"
      "output_bytes,status\n";
  for (const auto& r : rows) {
    out += r.id + ',' + r.image_a + ',' + r.image_b + ',' + r.landmarks_a + ',' + r.landmarks_b + ',' +
           r.method + ',' + format_double(r.alpha) + ',' + r.output + ',' +
           format_double(r.initial_energy) + ',' + format_double(r.final_energy) + ',' +
           std::to_string(r.iterations) + ',' + std::to_string(r.output_bytes) + ',' + r.status + '\n';
  }
  return out;
}

}  // namespace morphalign
