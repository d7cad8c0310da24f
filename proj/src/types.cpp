#include "vimu/types.hpp"

#include <cmath>
#include <stdexcept>

namespace vimu {

double euclidean(const Vec2& a, const Vec2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

std::string placement_name(Placement p) {
    switch (p) {
        case Placement::left_wrist: return "left_wrist";
        case Placement::right_wrist: return "right_wrist";
        case Placement::left_calf: return "left_calf";
        case Placement::right_calf: return "right_calf";
    }
    throw std::invalid_argument("unknown placement");
}

Placement placement_from_name(const std::string& name) {
    for (Placement p : kAllPlacements) {
        if (placement_name(p) == name) return p;
    }
    throw std::invalid_argument("unknown placement name: " + name);
}

}  // namespace vimu
