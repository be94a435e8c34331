#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "refugia/refugia.h"

namespace refugia_cli {

// Exit codes of the command-line tool.
enum ExitCode { kOk = 0, kConfigError = 1, kSolverError = 2, kMonitorAbort = 3 };

class CliError : public std::runtime_error {
 public:
  CliError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

inline int exit_code_for(rf_status s) {
  switch (s) {
    case RF_OK: return kOk;
    case RF_ERR_SOLVER:
    case RF_ERR_INTERNAL: return kSolverError;
    case RF_ERR_MONITOR: return kMonitorAbort;
    default: return kConfigError;
  }
}

inline void check(rf_status s, const char* context) {
  if (s != RF_OK) {
    throw CliError(exit_code_for(s), std::string(context) + ": " + rf_last_error());
  }
}

struct ParamsDeleter { void operator()(rf_params* p) const { rf_params_free(p); } };
struct MaskDeleter { void operator()(rf_mask* p) const { rf_mask_free(p); } };
struct LayoutDeleter { void operator()(rf_layout* p) const { rf_layout_free(p); } };
struct FieldsDeleter { void operator()(rf_fields* p) const { rf_fields_free(p); } };
struct RunDeleter { void operator()(rf_run* p) const { rf_run_free(p); } };

using ParamsPtr = std::unique_ptr<rf_params, ParamsDeleter>;
using MaskPtr = std::unique_ptr<rf_mask, MaskDeleter>;
using LayoutPtr = std::unique_ptr<rf_layout, LayoutDeleter>;
using FieldsPtr = std::unique_ptr<rf_fields, FieldsDeleter>;
using RunPtr = std::unique_ptr<rf_run, RunDeleter>;

}  // namespace refugia_cli
