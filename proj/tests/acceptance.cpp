// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "contraction_lab/suites.hpp"

#include <cstdio>

using namespace clab;

namespace {

constexpr std::uint64_t kSeed = 20261018;

// Tolerances pinned here, independent of library defaults.
constexpr double kScalarLow = 2.9;
constexpr double kScalarHigh = 3.0;
constexpr double kOracleMatch = 1e-9;
constexpr double kKernelFloor = -1e-9;

int failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail) {
  std::printf("%s %2d %-28s %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string describe(const SuiteResult& r) {
  std::string s = "cases=" + std::to_string(r.cases) + " failures=" + std::to_string(r.failures);
  char buf[64];
  std::snprintf(buf, sizeof buf, " %.1fs", r.seconds);
  s += buf;
  if (!r.failure_notes.empty()) s += " first: " + r.failure_notes.front();
  return s;
}

SuiteResult suite(int id, const char* title, const std::string& name) {
  SuiteResult r = run_suite(name, 0, kSeed, Tolerances{});
  report(id, title, r.passed(), describe(r));
  return r;
}

/// sup over the circle of (1 - t^2)/|1 - t e^{i theta}|^2, the symbol of the
/// whitened scalar kernel against t' = 0, on a dense grid.
double scalar_symbol_sup(double t) {
  double sup = 0.0;
  const int n = 1 << 20;
  for (int j = 0; j < n; ++j) {
    double th = 2.0 * M_PI * j / n;
    sup = std::max(sup, (1.0 - t * t) / std::norm(1.0 - t * std::polar(1.0, th)));
  }
  return sup;
}

}  // namespace

int main() {
  KernelAudit audit;

  suite(1, "route-agreement", "routes");

  SuiteResult s2 = suite(2, "strict-part", "strict-part");
  audit.merge(s2.audit);

  {
    SuiteResult r = run_suite("scalar-constant", 0, kSeed, Tolerances{});
    audit.merge(r.audit);
    const double oracle = scalar_symbol_sup(0.5);
    const double level64 = r.metrics.value("level64", -1.0);
    const double constant = r.metrics.value("constant", -1.0);
    bool ok = r.passed() && level64 >= kScalarLow && level64 <= kScalarHigh && level64 <= oracle &&
              std::abs(constant - oracle) <= kOracleMatch * oracle;
    char buf[160];
    std::snprintf(buf, sizeof buf, "level64=%.6f sup=%.12f oracle=%.12f", level64, constant, oracle);
    report(3, "scalar-constant", ok, buf);
  }

  for (auto [id, title, name] : {std::tuple{4, "partial-isometry-part", "partial-isometry"},
                                 std::tuple{5, "commuting-pairs", "commuting"},
                                 std::tuple{6, "commuting-normal-pipeline", "commuting-normal"}}) {
    SuiteResult r = suite(id, title, name);
    audit.merge(r.audit);
  }

  suite(7, "arcs", "arcs");
  suite(8, "delta-infinity", "delta-infinity");
  suite(9, "regularity", "regularity");

  {
    char buf[160];
    std::snprintf(buf, sizeof buf, "verdicts=%lld kernels=%lld min_eig=%.3e monotone_violations=%lld", audit.verdicts,
                  audit.kernels, audit.min_kernel_eigenvalue, audit.monotone_violations);
    bool ok = audit.verdicts > 0 && audit.monotone_violations == 0 && audit.min_kernel_eigenvalue >= kKernelFloor;
    report(10, "kernel-soundness", ok, buf);
  }

  std::printf("%s\n", failures == 0 ? "ALL PASS" : "SOME FAIL");
  return failures == 0 ? 0 : 1;
}
