#include "cupmem/schema.hpp"

namespace cupmem {

// Ten-domain default user-state schema plus the default world-knowledge
// rule set. Rule exemplar values feed the scenario generator only.
const std::string& default_schema_document() {
    static const std::string doc = R"JSON({
  "version": "omega-default-1",
  "domains": [
    {"name": "identity_and_background", "slots": [
      {"name": "core_identity_or_role", "cardinality": "multi"},
      {"name": "skill_or_language_background", "cardinality": "multi"},
      {"name": "stable_social_context", "cardinality": "multi"},
      {"name": "current_status_or_affiliation", "cardinality": "multi"}
    ]},
    {"name": "stable_preferences", "slots": [
      {"name": "enduring_preference", "cardinality": "multi"},
      {"name": "habitual_choice_pattern", "cardinality": "multi"},
      {"name": "value_or_priority_tendency", "cardinality": "multi"}
    ]},
    {"name": "location_and_living", "slots": [
      {"name": "current_base_location", "cardinality": "single"},
      {"name": "living_arrangement_or_settlement", "cardinality": "single"},
      {"name": "location_linked_condition", "cardinality": "multi"}
    ]},
    {"name": "weather_and_environment", "slots": [
      {"name": "current_weather_pattern", "cardinality": "single"},
      {"name": "environmental_condition", "cardinality": "multi"},
      {"name": "weather_linked_adjustment", "cardinality": "multi"}
    ]},
    {"name": "health_and_mobility", "slots": [
      {"name": "current_health_state", "cardinality": "single"},
      {"name": "functional_limitation", "cardinality": "multi"},
      {"name": "health_linked_adjustment", "cardinality": "multi"}
    ]},
    {"name": "work_and_schedule", "slots": [
      {"name": "current_workload", "cardinality": "multi"},
      {"name": "schedule_pressure_or_bandwidth", "cardinality": "single"},
      {"name": "work_transition_or_change", "cardinality": "multi"},
      {"name": "standing_commitment_or_availability", "cardinality": "multi"}
    ]},
    {"name": "finance_and_resources", "slots": [
      {"name": "financial_constraint", "cardinality": "multi"},
      {"name": "resource_availability", "cardinality": "multi"},
      {"name": "resource_linked_adjustment", "cardinality": "multi"},
      {"name": "resource_access_or_recoverability", "cardinality": "multi"}
    ]},
    {"name": "family_and_caregiving", "slots": [
      {"name": "caregiving_responsibility", "cardinality": "multi"},
      {"name": "household_obligation", "cardinality": "multi"},
      {"name": "family_linked_constraint", "cardinality": "multi"}
    ]},
    {"name": "routine_and_transport", "slots": [
      {"name": "current_commute_mode", "cardinality": "single"},
      {"name": "transport_access_condition", "cardinality": "multi"},
      {"name": "routine_shift", "cardinality": "multi"}
    ]},
    {"name": "current_focus_and_goals", "slots": [
      {"name": "current_primary_focus", "cardinality": "multi"},
      {"name": "short_horizon_goal", "cardinality": "multi"},
      {"name": "goal_linked_constraint", "cardinality": "multi"}
    ]}
  ],
  "dependency_edges": [
    {"source": "health_and_mobility", "target": "routine_and_transport"},
    {"source": "health_and_mobility", "target": "current_focus_and_goals"},
    {"source": "location_and_living", "target": "routine_and_transport"},
    {"source": "location_and_living", "target": "work_and_schedule"},
    {"source": "location_and_living", "target": "weather_and_environment"},
    {"source": "weather_and_environment", "target": "location_and_living"},
    {"source": "work_and_schedule", "target": "routine_and_transport"},
    {"source": "finance_and_resources", "target": "current_focus_and_goals"},
    {"source": "family_and_caregiving", "target": "work_and_schedule"}
  ],
  "knowledge_rules": [
    {
      "id": "dep_injury_commute",
      "kind": "dependency",
      "source": {"domain": "health_and_mobility", "slot": "functional_limitation"},
      "source_pattern": "leg_*|knee_*|ankle_*|hip_*|foot_*",
      "target": {"domain": "routine_and_transport", "slot": "current_commute_mode"},
      "target_pattern": "bicycle|cycling|running|walking|skateboard|motorcycle",
      "source_examples": ["leg_fracture", "knee_surgery_recovery", "ankle_sprain",
                          "hip_replacement_recovery", "foot_stress_injury"],
      "target_examples": ["bicycle", "walking", "running", "motorcycle", "skateboard"]
    },
    {
      "id": "dep_relocation_transit",
      "kind": "dependency",
      "source": {"domain": "location_and_living", "slot": "current_base_location"},
      "source_pattern": "*",
      "target": {"domain": "routine_and_transport", "slot": "current_commute_mode"},
      "target_pattern": "bus|subway|tram|ferry|carpool",
      "source_examples": ["denver", "chicago", "atlanta", "nashville", "tucson"],
      "target_examples": ["bus", "subway", "tram", "ferry", "carpool"]
    },
    {
      "id": "dep_climate_relocation",
      "kind": "dependency",
      "source": {"domain": "weather_and_environment", "slot": "environmental_condition"},
      "source_pattern": "desert_*|relentless_dry_heat|scorpion_*|red_grit_*",
      "target": {"domain": "location_and_living", "slot": "current_base_location"},
      "target_pattern": "seattle|portland|coastal_*",
      "source_examples": ["desert_heat_spell", "relentless_dry_heat",
                          "scorpion_sightings", "red_grit_dust"],
      "target_examples": ["portland", "seattle"]
    },
    {
      "id": "dep_shift_availability",
      "kind": "dependency",
      "source": {"domain": "work_and_schedule", "slot": "work_transition_or_change"},
      "source_pattern": "night_shift*|rotating_shift*|second_job*",
      "target": {"domain": "work_and_schedule", "slot": "standing_commitment_or_availability"},
      "target_pattern": "twice_weekly_*|weekly_*|evening_*",
      "source_examples": ["night_shift_rotation", "rotating_shift_schedule",
                          "second_job_evenings"],
      "target_examples": ["twice_weekly_friend_nights", "weekly_game_night",
                          "evening_volunteering"]
    },
    {
      "id": "dep_finance_goal",
      "kind": "dependency",
      "source": {"domain": "finance_and_resources", "slot": "financial_constraint"},
      "source_pattern": "income_loss|major_medical_bills|emergency_roof_repair|sudden_car_expense",
      "target": {"domain": "current_focus_and_goals", "slot": "short_horizon_goal"},
      "target_pattern": "save_for_*|buy_*|book_*",
      "source_examples": ["income_loss", "major_medical_bills",
                          "emergency_roof_repair", "sudden_car_expense"],
      "target_examples": ["save_for_summer_trip", "buy_new_camera", "book_europe_tour"]
    },
    {
      "id": "inc_diet_preference",
      "kind": "incompat_same_slot",
      "slot": {"domain": "stable_preferences", "slot": "enduring_preference"},
      "patterns": ["vegan|vegetarian|plant_based_diet",
                   "weekly_bbq_ritual|daily_steak_dinner|meat_heavy_diet"],
      "a_examples": ["vegan", "vegetarian", "plant_based_diet"],
      "b_examples": ["weekly_bbq_ritual", "daily_steak_dinner", "meat_heavy_diet"]
    },
    {
      "id": "inc_training_rest",
      "kind": "incompat_same_slot",
      "slot": {"domain": "health_and_mobility", "slot": "health_linked_adjustment"},
      "patterns": ["marathon_training*|intense_training*",
                   "strict_bed_rest|complete_rest_order"],
      "a_examples": ["marathon_training_plan", "intense_training_block"],
      "b_examples": ["strict_bed_rest", "complete_rest_order"]
    }
  ]
})JSON";
    return doc;
}

}  // namespace cupmem
