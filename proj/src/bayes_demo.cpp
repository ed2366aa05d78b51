#include "wmcvar/bayes.hpp"

namespace wmcvar {

const std::vector<DemoNetwork> &demo_networks() {
  static const std::vector<DemoNetwork> nets = {
      {"chain2", R"({
  "variables": [
    {"name": "A", "values": ["a0", "a1"], "parents": [], "cpt": [[0.3, 0.7]]},
    {"name": "B", "values": ["b0", "b1"], "parents": ["A"],
     "cpt": [[0.9, 0.1], [0.2, 0.8]]}
  ],
  "uncertainty": {"theta": 10}
})"},
      {"chain3", R"({
  "variables": [
    {"name": "A", "values": ["0", "1"], "parents": [], "cpt": [[0.6, 0.4]]},
    {"name": "B", "values": ["0", "1"], "parents": ["A"],
     "cpt": [[0.75, 0.25], [0.1, 0.9]]},
    {"name": "C", "values": ["0", "1"], "parents": ["B"],
     "cpt": [[0.5, 0.5], [0.05, 0.95]]}
  ],
  "uncertainty": {"theta": 10}
})"},
      {"sprinkler", R"({
  "variables": [
    {"name": "Cloudy", "values": ["yes", "no"], "parents": [],
     "cpt": [[0.5, 0.5]]},
    {"name": "Sprinkler", "values": ["on", "off"], "parents": ["Cloudy"],
     "cpt": [[0.1, 0.9], [0.5, 0.5]]},
    {"name": "Rain", "values": ["yes", "no"], "parents": ["Cloudy"],
     "cpt": [[0.8, 0.2], [0.2, 0.8]]},
    {"name": "WetGrass", "values": ["wet", "dry"],
     "parents": ["Sprinkler", "Rain"],
     "cpt": [[0.99, 0.01], [0.9, 0.1], [0.9, 0.1], [0.0, 1.0]]}
  ],
  "uncertainty": {"theta": 20}
})"},
      {"alarm", R"({
  "variables": [
    {"name": "Burglary", "values": ["T", "F"], "parents": [],
     "cpt": [[0.01, 0.99]]},
    {"name": "Earthquake", "values": ["T", "F"], "parents": [],
     "cpt": [[0.02, 0.98]]},
    {"name": "Alarm", "values": ["T", "F"],
     "parents": ["Burglary", "Earthquake"],
     "cpt": [[0.95, 0.05], [0.94, 0.06], [0.29, 0.71], [0.001, 0.999]]},
    {"name": "JohnCalls", "values": ["T", "F"], "parents": ["Alarm"],
     "cpt": [[0.9, 0.1], [0.05, 0.95]]},
    {"name": "MaryCalls", "values": ["T", "F"], "parents": ["Alarm"],
     "cpt": [[0.7, 0.3], [0.01, 0.99]]}
  ],
  "uncertainty": {"params": {
    "Burglary": {"var": 0.00005},
    "Earthquake": {"var": 0.0001},
    "Alarm|Burglary=T,Earthquake=T": {"var": 0.004},
    "Alarm|Burglary=T,Earthquake=F": {"var": 0.005},
    "Alarm|Burglary=F,Earthquake=T": {"var": 0.02},
    "Alarm|Burglary=F,Earthquake=F": {"var": 0.0000005},
    "JohnCalls|Alarm=T": {"var": 0.009},
    "JohnCalls|Alarm=F": {"var": 0.004},
    "MaryCalls|Alarm=T": {"var": 0.02},
    "MaryCalls|Alarm=F": {"var": 0.0009}
  }}
})"},
      {"weather", R"({
  "variables": [
    {"name": "Weather", "values": ["sunny", "cloudy", "rainy"], "parents": [],
     "cpt": [[0.5, 0.3, 0.2]]},
    {"name": "Umbrella", "values": ["no", "yes"], "parents": ["Weather"],
     "cpt": [[0.95, 0.05], [0.6, 0.4], [0.1, 0.9]]},
    {"name": "Traffic", "values": ["light", "moderate", "heavy"],
     "parents": ["Weather"],
     "cpt": [[0.6, 0.3, 0.1], [0.4, 0.4, 0.2], [0.2, 0.3, 0.5]]}
  ],
  "uncertainty": {"theta": 15, "groups": {
    "Weather": [[0.01, -0.006, -0.004], [-0.006, 0.008, -0.002],
                [-0.004, -0.002, 0.006]]
  }}
})"},
  };
  return nets;
}

} // namespace wmcvar
