// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Every tolerance is pinned in criteria.cpp.

#include <chrono>
#include <cstdio>
#include <exception>

#include "criteria.hpp"

int main() {
  using namespace csq::acceptance;
  int failures = 0;
  for (const Criterion& crit : all_criteria()) {
    Checks checks;
    const auto t0 = std::chrono::steady_clock::now();
    std::string note;
    try {
      crit.body(checks);
    } catch (const std::exception& e) {
      note = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = note.empty() && checks.passed();
    if (!pass) ++failures;
    std::printf("%s  criterion %2d: %s (%s)%s%s [%.1f s]\n", pass ? "PASS" : "FAIL", crit.id,
                crit.title.c_str(), checks.summary().c_str(), note.empty() ? "" : " ",
                note.c_str(), secs);
    std::fflush(stdout);
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
