// Acceptance runner: one PASS/FAIL line per criterion, details indented.
// Exit status is 0 once every criterion has been evaluated; pass --strict
// to exit 3 when any criterion fails. Criterion numbers given as arguments
// restrict the run. --report <file> writes a copy of the output, since
// ctest hides the output of passing tests.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <string>

#include "ecm/ecm.hpp"
#include "support/properties.hpp"

namespace {

ecm::CheckResult check_properties() {
  ecm::CheckResult r{9, "conservation and invariant properties", true, false, {}};
  for (const auto& p : ecm::props::run_all()) {
    r.pass = r.pass && p.pass;
    r.details.push_back(std::string(p.pass ? "ok   " : "FAIL ") + p.name + " (" + std::to_string(p.cases) +
                        " cases): " + p.detail);
  }
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  std::set<int> only;
  std::ofstream copy;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--strict") == 0) {
      strict = true;
    } else if (std::strcmp(argv[i], "--report") == 0 && i + 1 < argc) {
      copy.open(argv[++i]);
      if (!copy) {
        std::fprintf(stderr, "cannot write '%s'\n", argv[i]);
        return 1;
      }
    } else {
      char* end = nullptr;
      const long n = std::strtol(argv[i], &end, 10);
      if (*end != '\0' || n < 1 || n > 10) {
        std::fprintf(stderr, "usage: %s [--strict] [--report file] [criterion ...]\n", argv[0]);
        return 2;
      }
      only.insert(static_cast<int>(n));
    }
  }
  auto wanted = [&](int n) { return only.empty() || only.count(n) > 0; };

  int failed = 0;
  auto emit = [&](const std::string& text) {
    std::fputs(text.c_str(), stdout);
    std::fflush(stdout);
    if (copy.is_open()) copy << text << std::flush;
  };
  auto report = [&](const ecm::CheckResult& r) {
    emit(ecm::format_check(r));
    if (!r.informational && !r.pass) ++failed;
  };
  auto guarded = [&](int n, const char* name, auto&& check) {
    if (!wanted(n)) return;
    try {
      report(check());
    } catch (const std::exception& e) {
      report({n, name, false, false, {std::string("error: ") + e.what()}});
    }
  };

  guarded(1, "analytic equilibrium gap", [] { return ecm::check_equilibrium_gap(); });
  guarded(2, "planar series rule", [] { return ecm::check_planar_series(); });
  guarded(3, "planar parallel rule", [] { return ecm::check_planar_parallel(); });
  guarded(4, "gap-width convergence", [] { return ecm::check_gap_convergence(); });
  guarded(5, "method A and B agree", [] { return ecm::check_method_equivalence(); });
  guarded(6, "parabolic tool gap", [] { return ecm::check_parabolic(); });
  guarded(7, "wire kerf width", [] { return ecm::check_wire(); });
  guarded(8, "method B not slower than method A", [] { return ecm::check_bench(); });
  guarded(9, "conservation and invariant properties", [] { return check_properties(); });
  guarded(10, "blade machining", [] { return ecm::check_blade(); });
  if (only.empty()) {
    try {
      report(ecm::check_distorted_meshes());
    } catch (const std::exception& e) {
      emit(std::string("INFO distorted planar meshes: error: ") + e.what() + "\n");
    }
  }

  emit(std::to_string(failed) + " criterion(s) failed\n");
  return strict && failed > 0 ? 3 : 0;
}
