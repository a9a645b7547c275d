#pragma once

namespace amnet::cli {

// Dispatches train/eval/bench/info/synth/sweep-margin. Returns 0 on success,
// 1 on a validation error, 2 on a runtime error. Errors go to stderr with an
// "error:" prefix.
int run(int argc, const char* const* argv);

}  // namespace amnet::cli
