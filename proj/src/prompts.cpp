#include "dcsynth/prompts.hpp"

#include "dcsynth/error.hpp"

namespace dcsynth {

// Placeholders are {name}; doubled braces are literal braces.
const std::string_view kDesignTemplate = R"(Provide a data center architecture design based on the selected facilities and equipment. You need to follow the Data Center Design Requirements while fulfilling objectives and constraints.
    
Rules: 
    - The totoal cooling load of selected ACUs must be compatible with the total cooling demand of selected racks.
    - Allocate all the selected ACUs and racks to the designed rooms.
    - Number of selected ACUs should be multiple of 2 in a room.
    - Number of selected racks should be multiple of 4 in a room.
    - A room should have at least 16 racks and 2 ACUs in total.

Unit for each attribute: 
    - powerDemand: kW
    - powerCapacity: kW
    - coolingDemand: CFM
    - coolingCapacity: CFM
    - computingCapacity: FLOPS
    - geometry: meter
    
Model Assets Library:
{assets_lib}

Weather External Inputs:
{external_inputs}

Data Center Design Requirements:
{requirements}

Previous Generated Designs and metricss:
{history}

Think step by step to select the best facility and equipment combinations and archtect the whole building strcture in <topology></topology> and <layout></layout>. If there are previous results, please try to find a better design. Prefer to select less than three types of ACUs and racks, respectively. 
<topology> and <layout> needs to fulfil the eventual design requirements.
Please conclude the final result in the following format:
<topology>
{{
    "rooms":{{
        "room_name_1":{{
            "racks": {{,
                "rack_model_1": number_of_rack_model_1,
                ...
            }},
            "acus": {{
                "acu_model_1": number_of_acu_model_1,
                ...
            }}
        }},
        ...
    }},
    "plant": {{
        "chilled_water_loop": {{
            "chillers": {{
                "chiller_model_1": number_of_chiller_model_1,
                ...
            }}
        }},
        "condenser_water_loop": {{
            "cooling_towers": {{
                "cooling_tower_model_1": number_of_cooling_tower_model_1,
                ...
            }}
        }}
    }}
}}
</topology>
<layout>
{{
    "rooms":{{
        "room_name_1": {{
            "rack_gap": room_name_1_rack_gap,
            "padding": room_name_1_padding,
            "margin": room_name_1_margin,
            "aisle_gap": room_name_1_aisle_gap,
        }},
        ...
    }}
}}
</layout>

Output:
)";

const std::string_view kReflectTemplate = R"(Analyse the previous generated designs and metricss. Reflect on the design process and provide suggestions for the next design iteration. 
The summary should include the following information:
- Temperature trajectories of the data center. Is there any overheating issue?
- The power usage effectiveness (PUE) of the data center. Is the data center energy-efficient?

The suggestions should include the following information:
- New topology design.
- New spatial parameters.
- New asset selections.

Data Center Design Requirements:
{requirements}

Trajectories:
{trajectories}

The Generated Design:
{design}

Summary & Suggestions:
)";

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    const char c = tmpl[i];
    if ((c == '{' || c == '}') && i + 1 < tmpl.size() && tmpl[i + 1] == c) {
      out += c;
      ++i;
      continue;
    }
    if (c == '{') {
      const auto close = tmpl.find('}', i);
      if (close == std::string_view::npos) throw Error(ErrorKind::Validation, "unterminated placeholder");
      const std::string name(tmpl.substr(i + 1, close - i - 1));
      auto it = values.find(name);
      if (it == values.end()) throw Error(ErrorKind::Validation, "no value for placeholder {" + name + "}");
      out += it->second;
      i = close;
      continue;
    }
    out += c;
  }
  return out;
}

}  // namespace dcsynth
