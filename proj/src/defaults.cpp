#include "ecpo/defaults.hpp"

namespace ecpo::defaults {

const std::string_view kControlLexicon = R"__(# Impermissible low-level control language.
# One pattern per line; matched case-insensitively at word boundaries.
throttle
accelerate by
brake
brakes
braking( force)?
steer
steering( angle)?
set speed to \d+
)__";

const std::string_view kHazardRules = R"__(# triggers (| separated) ; scopes (labels,summaries,snippets,policy_text or all) ; hazard id
rain|rainy|wet ; all ; wet_road
rain|rainy|fog|foggy|mist|visibility|glare ; all ; reduced_visibility
traffic jam|dense traffic|heavy traffic|congestion|stop and go ; all ; dense_traffic
reverse|reversing|backing|backward moving ; all ; reversing
distraction|distracted|looking around|phone|texting ; all ; driver_distraction
drowsy|drowsiness|yawning|dozing|fatigue ; all ; drowsiness
anger|angry ; all ; driver_anger
anxiety|anxious ; all ; driver_anxiety
)__";

const std::string_view kManeuverTerms = R"__(# One maneuver per line, aliases separated by |
parking|park
reversing|reverse|backing|backward moving
overtaking|overtake
lane change|change lanes|change lane|changing lane
merging|merge
u turn
left turn|turn left
right turn|turn right
)__";

const std::string_view kLabelVocabulary = R"__({
  "heads": [
    {"name": "emotion", "group": "driver", "nominal": "neutral",
     "labels": ["neutral", "anger", "anxiety", "happiness", "weariness"]},
    {"name": "behavior", "group": "driver", "nominal": "normal driving",
     "labels": ["normal driving", "looking around", "making phone", "smoking", "talking", "dozing off", "body movement"]},
    {"name": "distraction", "group": "driver",
     "labels": ["safe driving", "texting", "phone call", "radio", "drinking", "reaching behind", "hair and makeup", "talking to passenger"]},
    {"name": "wheel_grip", "group": "driver",
     "labels": ["both hands", "only left", "only right", "none"]},
    {"name": "gaze", "group": "driver",
     "labels": ["road", "left mirror", "right mirror", "rearview", "center console", "lap"]},
    {"name": "traffic_scene", "group": "scene", "nominal": "smooth traffic",
     "labels": ["smooth traffic", "traffic jam", "waiting"]},
    {"name": "vehicle_motion", "group": "scene", "nominal": "forward moving",
     "labels": ["forward moving", "parking", "turning", "backward moving", "changing lane"]},
    {"name": "weather", "group": "scene",
     "labels": ["clear", "rainy", "foggy", "snowy", "night"]}
  ]
}
)__";

}  // namespace ecpo::defaults
