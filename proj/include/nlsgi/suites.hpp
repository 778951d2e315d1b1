#pragma once

#include <string>
#include <vector>

#include "nlsgi/config.hpp"
#include "nlsgi/io.hpp"

namespace nlsgi {

struct CheckRecord {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckRecord> checks;
  bool pass = true;
  std::string config_hash;
  Json provenance;

  void add(std::string name, double measured, double bound, bool pass);
  // measured <= bound
  void add_le(std::string name, double measured, double bound);
  Json to_json() const;
};

const std::vector<std::string>& suite_names();

// throws InputError for an unknown suite name
SuiteReport run_suite(const std::string& name, const RunConfig& cfg, int threads);

std::string version_string();

}  // namespace nlsgi
