#pragma once

#include "iris/anchor.hpp"
#include "iris/field.hpp"

namespace iris {

// The persisted scene artifact: the anchor set plus the frozen world-to-grid
// normalization and the bake flag. The field model is persisted separately.
struct Scene {
    AnchorList anchors;
    NormTransform norm;
    bool baked = false;
};

}  // namespace iris
