#include "sgim/autodiff/tensor.h"

namespace sgim::ad {

namespace {
thread_local bool g_checked = false;
}  // namespace

void set_checked_mode(bool enabled) { g_checked = enabled; }
bool checked_mode() { return g_checked; }

}  // namespace sgim::ad
