//! Immunization schedule knowledge base and matched locale pairs.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::stable_id;

use super::types::{GeoAnswerKey, GeoPair, GeoScenario, ResourceConstraint};

const BUNDLED_SCHEDULE: &str = include_str!("../../data/schedule.csv");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub country: String,
    pub age_weeks: u32,
    pub antigen: String,
    pub formulation: String,
    pub constraints: Vec<String>,
}

#[derive(Deserialize)]
struct Row {
    country: String,
    age_weeks: u32,
    antigen: String,
    #[serde(default)]
    formulation: String,
    #[serde(default)]
    constraints: String,
}

pub fn parse_schedule<R: std::io::Read>(reader: R, origin: &str) -> Result<Vec<ScheduleEntry>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Validation(format!("{origin}: {e}")))?
        .clone();
    let expected = ["country", "age_weeks", "antigen", "formulation", "constraints"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Validation(format!(
            "{origin}: header must be {}",
            expected.join(",")
        )));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| Error::Validation(format!("{origin}: row {}: {e}", i + 2)))?;
        let key = (row.country.clone(), row.age_weeks, row.antigen.clone());
        if !seen.insert(key) {
            return Err(Error::Validation(format!(
                "{origin}: duplicate entry ({}, {}, {})",
                row.country, row.age_weeks, row.antigen
            )));
        }
        let constraints = row
            .constraints
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect::<Vec<_>>();
        for c in &constraints {
            ResourceConstraint::parse(c)?;
        }
        out.push(ScheduleEntry {
            country: row.country,
            age_weeks: row.age_weeks,
            antigen: row.antigen,
            formulation: row.formulation,
            constraints,
        });
    }
    Ok(out)
}

/// Small illustrative schedule (Kenya, South Africa, United Kingdom); not
/// a substitute for the current national programme tables.
pub fn bundled_schedule() -> Vec<ScheduleEntry> {
    parse_schedule(BUNDLED_SCHEDULE.as_bytes(), "bundled schedule").expect("bundled schedule is valid")
}

pub fn load_schedule(path: &Path) -> Result<Vec<ScheduleEntry>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_schedule(f, &path.display().to_string())
}

/// Answer key for one locale at one age; a pure function of its inputs.
pub fn answer_key(kb: &[ScheduleEntry], age_weeks: u32, country: &str) -> Result<GeoAnswerKey> {
    let due: Vec<&ScheduleEntry> = kb
        .iter()
        .filter(|e| e.country == country && e.age_weeks == age_weeks)
        .collect();
    if due.is_empty() {
        return Err(Error::DataGap(format!(
            "no schedule entries for {country} at {age_weeks} weeks"
        )));
    }
    let mut constraints: Vec<ResourceConstraint> = Vec::new();
    for spec in due.iter().flat_map(|e| &e.constraints) {
        let c = ResourceConstraint::parse(spec)?;
        if !constraints.contains(&c) {
            constraints.push(c);
        }
    }
    Ok(GeoAnswerKey {
        required_antigens: due.iter().map(|e| e.antigen.clone()).collect::<BTreeSet<_>>(),
        formulation: due
            .iter()
            .map(|e| e.formulation.as_str())
            .find(|f| !f.is_empty())
            .unwrap_or_default()
            .to_string(),
        resource_constraints: constraints,
        locale_factors: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocaleProfile {
    pub city: String,
    pub setting_tier: String,
    /// Term specs a localized rationale is expected to cite.
    #[serde(default)]
    pub locale_factors: Vec<String>,
}

/// One narrative with `{age_weeks}`, `{country}`, `{city}` and `{setting}`
/// placeholders, plus per-country substitutions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeoTemplate {
    pub narrative: String,
    pub locales: BTreeMap<String, LocaleProfile>,
}

impl GeoTemplate {
    pub fn bundled() -> Self {
        let p = |city: &str, tier: &str, factors: &[&str]| LocaleProfile {
            city: city.into(),
            setting_tier: tier.into(),
            locale_factors: factors.iter().map(|s| s.to_string()).collect(),
        };
        Self {
            narrative: "A {age_weeks}-week-old infant is brought to a {setting} in {city}, {country}, \
                        for routine immunisation. The baby is feeding well, has no fever and has \
                        received all earlier doses on time. The mother asks which vaccines are due \
                        today and whether anything else should be done."
                .into(),
            locales: BTreeMap::from([
                (
                    "Kenya".into(),
                    p("Kisumu", "public health centre", &["KEPI|Kenya Expanded Programme on Immunisation", "malaria", "cold chain"]),
                ),
                (
                    "South Africa".into(),
                    p("Johannesburg", "primary health care clinic", &["EPI-SA|South African EPI", "Road to Health booklet|road to health"]),
                ),
                (
                    "United Kingdom".into(),
                    p("London", "GP surgery", &["NHS", "red book"]),
                ),
            ]),
        }
    }

    pub fn render(&self, country: &str, age_weeks: u32) -> Result<(String, &LocaleProfile)> {
        let profile = self
            .locales
            .get(country)
            .ok_or_else(|| Error::DataGap(format!("no locale profile for {country}")))?;
        let text = self
            .narrative
            .replace("{age_weeks}", &age_weeks.to_string())
            .replace("{country}", country)
            .replace("{city}", &profile.city)
            .replace("{setting}", &profile.setting_tier);
        Ok((text, profile))
    }
}

fn scenario(kb: &[ScheduleEntry], age: u32, country: &str, t: &GeoTemplate) -> Result<GeoScenario> {
    let mut key = answer_key(kb, age, country)?;
    let (narrative, profile) = t.render(country, age)?;
    key.locale_factors = profile.locale_factors.clone();
    Ok(GeoScenario {
        locale: country.to_string(),
        setting_tier: profile.setting_tier.clone(),
        narrative,
        answer_key: key,
    })
}

pub fn build_geo_pair(
    kb: &[ScheduleEntry],
    age_weeks: u32,
    locale_a: &str,
    locale_b: &str,
    template: &GeoTemplate,
) -> Result<GeoPair> {
    let age = age_weeks.to_string();
    Ok(GeoPair {
        pair_id: stable_id("geo", &[locale_a, locale_b, &age]),
        scenario_a: scenario(kb, age_weeks, locale_a, template)?,
        scenario_b: scenario(kb, age_weeks, locale_b, template)?,
    })
}
