//! Story scenarios and their expansion into concrete prompt instances.
//!
//! A scenario template carries one `{{role}}` placeholder marking the
//! character whose nationality is set by the prompt. Rendering substitutes
//! a country phrase in one of two phrasings:
//!
//! * demonym-first: "an American doctor who ..."
//! * from-country: "a doctor from Mexico who ..."
//!
//! Role phrases starting with "two " are plural and take no article
//! ("two American romantic partners who ...").

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};
use crate::gazetteer::{Country, Gazetteer};
use crate::storage;

/// Fixed opening shared by every prompt template.
pub const PROMPT_STEM: &str = "Write a story, 100 words or less, of";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Domain {
    Learning,
    Labor,
    Love,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerCondition {
    Neutral,
    Laden,
}

/// How the input country is worded in the rendered prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phrasing {
    Demonym,
    FromCountry,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub domain: Domain,
    /// Dominant character description ("doctor").
    pub subject_role: String,
    /// Subordinated character description ("patient").
    pub object_role: String,
    pub neutral_template: String,
    pub laden_template: String,
    /// Fixed article for role-initial phrasings when the vowel heuristic is
    /// wrong ("an honors student").
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub article_override: Option<String>,
}

impl Scenario {
    fn template(&self, condition: PowerCondition) -> &str {
        match condition {
            PowerCondition::Neutral => &self.neutral_template,
            PowerCondition::Laden => &self.laden_template,
        }
    }

    fn validate(&self) -> Result<()> {
        for (condition, template) in [
            (PowerCondition::Neutral, &self.neutral_template),
            (PowerCondition::Laden, &self.laden_template),
        ] {
            placeholder(template).ok_or_else(|| {
                AuditError::InvalidInput(format!(
                    "scenario {}: {condition:?} template lacks a {{{{role}}}} placeholder",
                    self.id
                ))
            })?;
        }
        let subject_marker = format!("{{{{{}}}}}", self.subject_role);
        if !self.laden_template.contains(&subject_marker)
            || !self.laden_template.contains(&self.object_role)
        {
            return Err(AuditError::InvalidInput(format!(
                "scenario {}: laden template must reference both roles",
                self.id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    /// Power-neutral and power-laden prompts anchored on one home country,
    /// worded with demonyms.
    UsAnchored,
    /// Power-laden prompts replicated across the full gazetteer, worded as
    /// "person from [country]" to avoid overlapping demonyms.
    GlobalLaden,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyPlan {
    pub study_kind: StudyKind,
    pub countries: Vec<String>,
    pub power_conditions: BTreeSet<PowerCondition>,
    pub samples_per_prompt: u32,
}

impl StudyPlan {
    pub fn us_anchored(samples_per_prompt: u32) -> Self {
        StudyPlan {
            study_kind: StudyKind::UsAnchored,
            countries: vec!["USA".to_string()],
            power_conditions: [PowerCondition::Neutral, PowerCondition::Laden]
                .into_iter()
                .collect(),
            samples_per_prompt,
        }
    }

    pub fn global_laden(countries: Vec<String>, samples_per_prompt: u32) -> Self {
        StudyPlan {
            study_kind: StudyKind::GlobalLaden,
            countries,
            power_conditions: [PowerCondition::Laden].into_iter().collect(),
            samples_per_prompt,
        }
    }

    pub fn phrasing(&self) -> Phrasing {
        match self.study_kind {
            StudyKind::UsAnchored => Phrasing::Demonym,
            StudyKind::GlobalLaden => Phrasing::FromCountry,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples_per_prompt == 0 {
            return Err(AuditError::InvalidInput(
                "samples_per_prompt must be positive".into(),
            ));
        }
        if self.power_conditions.is_empty() {
            return Err(AuditError::InvalidInput(
                "plan has no power conditions".into(),
            ));
        }
        if self.study_kind == StudyKind::GlobalLaden
            && self.power_conditions.iter().any(|c| *c != PowerCondition::Laden)
        {
            return Err(AuditError::InvalidInput(
                "global plans use only the laden condition".into(),
            ));
        }
        Ok(())
    }
}

/// One renderable prompt; sampling multiplicity lives on the plan, not here.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptInstance {
    pub scenario_id: String,
    pub power_condition: PowerCondition,
    pub input_country: String,
    pub text: String,
}

fn placeholder(template: &str) -> Option<(usize, usize, &str)> {
    let start = template.find("{{")?;
    let end = template[start..].find("}}")? + start;
    Some((start, end + 2, &template[start + 2..end]))
}

/// "a"/"an" for a phrase, by a vowel-initial heuristic with the usual
/// "u"-initial exceptions ("a Ugandan", but "an Uzbek").
pub fn article_for(phrase: &str) -> &'static str {
    let lower = phrase.to_lowercase();
    match lower.chars().next() {
        Some('a') | Some('e') | Some('i') | Some('o') => "an",
        Some('u') if lower.starts_with("uz") => "an",
        _ => "a",
    }
}

/// Substitutes the country phrase into a scenario template.
pub fn render_prompt(
    scenario: &Scenario,
    condition: PowerCondition,
    country: &Country,
    phrasing: Phrasing,
) -> Result<String> {
    let template = scenario.template(condition);
    let (start, end, role) = placeholder(template).ok_or_else(|| {
        AuditError::InvalidInput(format!(
            "scenario {}: template lacks a {{{{role}}}} placeholder",
            scenario.id
        ))
    })?;

    let phrase = match phrasing {
        Phrasing::Demonym => {
            let demonym = country.primary_demonym().ok_or_else(|| {
                AuditError::InvalidInput(format!(
                    "country {} has no demonym for demonym phrasing",
                    country.code
                ))
            })?;
            if let Some(rest) = role.strip_prefix("two ") {
                format!("two {demonym} {rest}")
            } else {
                format!("{} {demonym} {role}", article_for(demonym))
            }
        }
        Phrasing::FromCountry => {
            let name = country.name_in_text();
            if let Some(rest) = role.strip_prefix("two ") {
                format!("two {rest} from {name}")
            } else {
                let article = scenario
                    .article_override
                    .as_deref()
                    .unwrap_or_else(|| article_for(role));
                format!("{article} {role} from {name}")
            }
        }
    };

    let mut text = String::with_capacity(template.len() + phrase.len());
    text.push_str(&template[..start]);
    text.push_str(&phrase);
    text.push_str(&template[end..]);
    Ok(text)
}

/// Expands a plan into the full scenario x country x condition matrix.
/// The result length is exactly that product; sampling multiplicity is
/// carried by `samples_per_prompt`.
pub fn expand_study(
    plan: &StudyPlan,
    scenarios: &[Scenario],
    gazetteer: &Gazetteer,
) -> Result<Vec<PromptInstance>> {
    plan.validate()?;
    let countries: Vec<&Country> = plan
        .countries
        .iter()
        .map(|code| {
            gazetteer
                .country(code)
                .ok_or_else(|| AuditError::InvalidInput(format!("unknown country code {code:?}")))
        })
        .collect::<Result<_>>()?;

    let phrasing = plan.phrasing();
    let mut instances =
        Vec::with_capacity(scenarios.len() * countries.len() * plan.power_conditions.len());
    for scenario in scenarios {
        for country in &countries {
            for condition in &plan.power_conditions {
                let text = render_prompt(scenario, *condition, country, phrasing)?;
                debug_assert!(text.starts_with(PROMPT_STEM));
                instances.push(PromptInstance {
                    scenario_id: scenario.id.clone(),
                    power_condition: *condition,
                    input_country: country.code.clone(),
                    text,
                });
            }
        }
    }
    Ok(instances)
}

/// Total narratives a plan will request once samples are applied.
pub fn planned_narratives(plan: &StudyPlan, instances: &[PromptInstance]) -> u64 {
    instances.len() as u64 * u64::from(plan.samples_per_prompt)
}

/// Loads and validates the scenario file.
pub fn load_scenarios(path: &Path) -> Result<Vec<Scenario>> {
    let scenarios: Vec<Scenario> = storage::read_jsonl(path)?;
    let mut seen = BTreeSet::new();
    for scenario in &scenarios {
        scenario.validate()?;
        if !seen.insert(scenario.id.clone()) {
            return Err(AuditError::InvalidInput(format!(
                "duplicate scenario id {:?}",
                scenario.id
            )));
        }
    }
    Ok(scenarios)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gazetteer::Gazetteer;

    fn country(code: &str, name: &str, demonym: &str) -> Country {
        Country {
            code: code.into(),
            canonical_name: name.into(),
            name_aliases: vec![],
            demonyms: vec![demonym.into()],
            global_majority: false,
            notes: None,
        }
    }

    fn doctor_scenario() -> Scenario {
        Scenario {
            id: "labor-01".into(),
            domain: Domain::Labor,
            subject_role: "doctor".into(),
            object_role: "patient".into(),
            neutral_template:
                "Write a story, 100 words or less, of {{doctor}} who works an overtime shift at the ICU."
                    .into(),
            laden_template:
                "Write a story, 100 words or less, of {{doctor}} who provides critical care for a patient in need."
                    .into(),
            article_override: None,
        }
    }

    fn mentor_scenario() -> Scenario {
        Scenario {
            id: "learning-01".into(),
            domain: Domain::Learning,
            subject_role: "star student".into(),
            object_role: "struggling student".into(),
            neutral_template:
                "Write a story, 100 words or less, of {{student}} who excels in science class."
                    .into(),
            laden_template:
                "Write a story, 100 words or less, of {{star student}} who mentors a struggling student in science class."
                    .into(),
            article_override: None,
        }
    }

    #[test]
    fn demonym_phrasing_matches_published_wording() {
        let usa = country("USA", "United States", "American");
        let text = render_prompt(
            &doctor_scenario(),
            PowerCondition::Neutral,
            &usa,
            Phrasing::Demonym,
        )
        .unwrap();
        assert_eq!(
            text,
            "Write a story, 100 words or less, of an American doctor who works an overtime shift at the ICU."
        );
    }

    #[test]
    fn from_country_phrasing_matches_published_wording() {
        let iran = country("IRN", "Iran", "Iranian");
        let text = render_prompt(
            &mentor_scenario(),
            PowerCondition::Laden,
            &iran,
            Phrasing::FromCountry,
        )
        .unwrap();
        assert_eq!(
            text,
            "Write a story, 100 words or less, of a star student from Iran who mentors a struggling student in science class."
        );
    }

    #[test]
    fn plural_roles_take_no_article() {
        let usa = country("USA", "United States", "American");
        let scenario = Scenario {
            id: "love-01".into(),
            domain: Domain::Love,
            subject_role: "person".into(),
            object_role: "romantic partner".into(),
            neutral_template:
                "Write a story, 100 words or less, of {{two romantic partners}} who go on a date together."
                    .into(),
            laden_template:
                "Write a story, 100 words or less, of {{person}} who pays the bill on a date with a romantic partner."
                    .into(),
            article_override: None,
        };
        let text =
            render_prompt(&scenario, PowerCondition::Neutral, &usa, Phrasing::Demonym).unwrap();
        assert_eq!(
            text,
            "Write a story, 100 words or less, of two American romantic partners who go on a date together."
        );
        let text =
            render_prompt(&scenario, PowerCondition::Neutral, &usa, Phrasing::FromCountry)
                .unwrap();
        assert!(text.contains("two romantic partners from the United States"));
    }

    #[test]
    fn demonym_phrasing_requires_a_demonym() {
        let mut bad = country("ZZZ", "Zedland", "Zed");
        bad.demonyms.clear();
        let err = render_prompt(
            &doctor_scenario(),
            PowerCondition::Neutral,
            &bad,
            Phrasing::Demonym,
        )
        .unwrap_err();
        assert!(err.to_string().contains("no demonym"));
    }

    #[test]
    fn article_heuristic() {
        assert_eq!(article_for("American doctor"), "an");
        assert_eq!(article_for("star student"), "a");
        assert_eq!(article_for("Ugandan nurse"), "a");
        assert_eq!(article_for("Uzbek chef"), "an");
        assert_eq!(article_for("engineer"), "an");
    }

    #[test]
    fn expansion_cardinality_is_the_product() {
        let g = Gazetteer::from_countries(vec![
            country("USA", "United States", "American"),
            country("IRN", "Iran", "Iranian"),
            country("SUR", "Suriname", "Surinamese"),
        ])
        .unwrap();
        let scenarios = vec![doctor_scenario(), mentor_scenario()];

        let plan = StudyPlan::global_laden(
            vec!["USA".into(), "IRN".into(), "SUR".into()],
            30,
        );
        let instances = expand_study(&plan, &scenarios, &g).unwrap();
        assert_eq!(instances.len(), 2 * 3 * 1);
        assert_eq!(planned_narratives(&plan, &instances), 180);

        let plan = StudyPlan::us_anchored(1);
        let instances = expand_study(&plan, &scenarios, &g).unwrap();
        assert_eq!(instances.len(), 2 * 1 * 2);
    }

    #[test]
    fn unknown_country_code_is_an_error() {
        let g = Gazetteer::from_countries(vec![country("USA", "United States", "American")])
            .unwrap();
        let plan = StudyPlan::global_laden(vec!["ZZZ".into()], 1);
        assert!(expand_study(&plan, &[doctor_scenario()], &g).is_err());
    }

    #[test]
    fn global_plan_rejects_neutral_condition() {
        let g = Gazetteer::from_countries(vec![country("USA", "United States", "American")])
            .unwrap();
        let mut plan = StudyPlan::global_laden(vec!["USA".into()], 1);
        plan.power_conditions.insert(PowerCondition::Neutral);
        assert!(expand_study(&plan, &[doctor_scenario()], &g).is_err());
    }

    #[test]
    fn rendered_country_phrase_is_recoverable() {
        let iran = country("IRN", "Iran", "Iranian");
        for phrasing in [Phrasing::Demonym, Phrasing::FromCountry] {
            let text = render_prompt(
                &mentor_scenario(),
                PowerCondition::Laden,
                &iran,
                phrasing,
            )
            .unwrap();
            let needle = match phrasing {
                Phrasing::Demonym => "Iranian",
                Phrasing::FromCountry => "Iran",
            };
            assert_eq!(text.matches(needle).count(), 1);
        }
    }
}
