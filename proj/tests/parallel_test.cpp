#include "clustreg/parallel.hpp"

#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <set>
#include <stdexcept>
#include <thread>
#include <vector>

using namespace clustreg;

namespace {

struct EnvGuard {
  explicit EnvGuard(const char* value) {
    if (const char* old = std::getenv("CLUSTREG_THREADS")) saved = old, had = true;
    if (value) setenv("CLUSTREG_THREADS", value, 1);
    else unsetenv("CLUSTREG_THREADS");
  }
  ~EnvGuard() {
    if (had) setenv("CLUSTREG_THREADS", saved.c_str(), 1);
    else unsetenv("CLUSTREG_THREADS");
  }
  std::string saved;
  bool had = false;
};

}  // namespace

TEST_SUITE("parallel") {

TEST_CASE("every index runs once") {
  for (const char* threads : {"1", "4"}) {
    EnvGuard env(threads);
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i].fetch_add(1); });
    for (const auto& h : hits) CHECK(h.load() == 1);
    parallel_for(0, [](std::size_t) { FAIL("no work expected"); });
  }
}

TEST_CASE("nested calls stay on the calling thread") {
  EnvGuard env("3");
  std::atomic<int> mismatches{0};
  std::atomic<int> total{0};
  parallel_for(6, [&](std::size_t) {
    const auto outer = std::this_thread::get_id();
    parallel_for(5, [&](std::size_t) {
      if (std::this_thread::get_id() != outer) mismatches.fetch_add(1);
      total.fetch_add(1);
    });
  });
  CHECK(total.load() == 30);
  CHECK(mismatches.load() == 0);
}

TEST_CASE("lowest failing index wins") {
  for (const char* threads : {"1", "4"}) {
    EnvGuard env(threads);
    try {
      parallel_for(50, [](std::size_t i) {
        if (i % 7 == 3) throw std::runtime_error(std::to_string(i));
      });
      FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "3");
    }
  }
}

TEST_CASE("thread count") {
  {
    EnvGuard env("3");
    CHECK(thread_count() == 3);
  }
  {
    EnvGuard env("0");
    CHECK(thread_count() >= 1);
  }
  {
    EnvGuard env("junk");
    CHECK(thread_count() >= 1);
  }
  EnvGuard env(nullptr);
  CHECK(thread_count() >= 1);
}

TEST_CASE("derived seeds") {
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2, 3) == derive_seed(derive_seed(1, 2), 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 20; ++s) {
    for (std::uint64_t i = 0; i < 50; ++i) seen.insert(derive_seed(s, i));
  }
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(1, 2) != derive_seed(2, 1));
}

}  // TEST_SUITE
