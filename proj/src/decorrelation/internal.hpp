#pragma once

namespace oodgnn::decorrelation::detail {

void note_invocation();

}  // namespace oodgnn::decorrelation::detail
