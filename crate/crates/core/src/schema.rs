//! Coding schemes: codes, families, anti-code links and the metric component
//! table that maps each code to a weighted sub-component.
//!
//! The built-in scheme ships as `schemes/tsd-v1.json`. [`builtin_tsd_scheme`]
//! assembles the same scheme from the code tables below, and the bundled file
//! is required to be the exact serialization of that value.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The bundled built-in scheme file.
pub const BUILTIN_SCHEME_JSON: &str = include_str!("../schemes/tsd-v1.json");

pub const BUILTIN_SCHEME_NAME: &str = "TSD Presence and Response";
pub const BUILTIN_SCHEME_VERSION: &str = "1.0.0";

/// Prefix used for generated anti codes, e.g. `ANTI-CT-UF`.
pub const ANTI_PREFIX: &str = "ANTI-";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    TG,
    SL,
    TC,
    CT,
    ACK,
    ADD,
    MAR,
    ANTI,
}

impl Family {
    /// Tech Goggles, Solutionism, Techno-Chauvinism and Cult of Technology.
    pub fn is_core(self) -> bool {
        matches!(self, Family::TG | Family::SL | Family::TC | Family::CT)
    }

    /// Acknowledge, address and marginalize moves in response to concerns.
    pub fn is_response(self) -> bool {
        matches!(self, Family::ACK | Family::ADD | Family::MAR)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Code {
    pub id: String,
    pub name: String,
    pub description: String,
    pub family: Family,
    pub anti_of: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[allow(non_camel_case_types)]
pub enum Component {
    TCE,
    TRR,
    ANTI_TCE,
    ANTI_TRR,
}

impl Component {
    pub const ALL: [Component; 4] = [
        Component::TCE,
        Component::TRR,
        Component::ANTI_TCE,
        Component::ANTI_TRR,
    ];

    pub fn side(self) -> Side {
        match self {
            Component::TCE | Component::TRR => Side::Pro,
            Component::ANTI_TCE | Component::ANTI_TRR => Side::Anti,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Component::TCE => "TCE",
            Component::TRR => "TRR",
            Component::ANTI_TCE => "ANTI_TCE",
            Component::ANTI_TRR => "ANTI_TRR",
        }
    }

    pub fn parse(s: &str) -> Option<Component> {
        Component::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Pro,
    Anti,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentAssignment {
    pub code_id: String,
    pub component: Component,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodingScheme {
    pub name: String,
    pub version: String,
    pub codes: Vec<Code>,
    pub assignments: Vec<ComponentAssignment>,
}

impl CodingScheme {
    pub fn code(&self, id: &str) -> Option<&Code> {
        self.codes.iter().find(|c| c.id == id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.code(id).is_some()
    }

    pub fn assignment(&self, code_id: &str) -> Option<&ComponentAssignment> {
        self.assignments.iter().find(|a| a.code_id == code_id)
    }

    /// Ids of all codes assigned to `component`, in table order.
    pub fn codes_in(&self, component: Component) -> impl Iterator<Item = &str> {
        self.assignments
            .iter()
            .filter(move |a| a.component == component)
            .map(|a| a.code_id.as_str())
    }

    /// Pretty JSON with a trailing newline; the format of the bundled file.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("scheme serializes");
        out.push('\n');
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SchemeViolationKind {
    DuplicateCode,
    AntiTargetUnknown,
    AntiTargetIsAnti,
    AntiWithoutTarget,
    UnknownAssignedCode,
    DuplicateAssignment,
    UnassignedCode,
    NonPositiveWeight,
}

impl SchemeViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeViolationKind::DuplicateCode => "duplicate code id",
            SchemeViolationKind::AntiTargetUnknown => "anti_of refers to unknown code",
            SchemeViolationKind::AntiTargetIsAnti => "anti_of refers to an ANTI code",
            SchemeViolationKind::AntiWithoutTarget => "ANTI code without anti_of",
            SchemeViolationKind::UnknownAssignedCode => "assignment for unknown code",
            SchemeViolationKind::DuplicateAssignment => "code assigned more than once",
            SchemeViolationKind::UnassignedCode => "unassigned code",
            SchemeViolationKind::NonPositiveWeight => "non-positive weight",
        }
    }
}

/// One broken invariant, naming the offending code.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SchemeViolation {
    pub kind: SchemeViolationKind,
    pub code_id: String,
}

impl fmt::Display for SchemeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.as_str(), self.code_id)
    }
}

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("malformed scheme file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scheme ({} violation(s)): {}", .0.len(), join_violations(.0))]
    Invalid(Vec<SchemeViolation>),
}

fn join_violations(v: &[SchemeViolation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Checks every scheme invariant. The report is sorted, so it does not depend
/// on the order of codes or assignments.
pub fn validate_scheme(scheme: &CodingScheme) -> Vec<SchemeViolation> {
    let mut out = BTreeSet::new();
    let mut push = |kind, id: &str| {
        out.insert(SchemeViolation {
            kind,
            code_id: id.to_string(),
        });
    };

    let mut families: BTreeMap<&str, Family> = BTreeMap::new();
    for code in &scheme.codes {
        if families.insert(code.id.as_str(), code.family).is_some() {
            push(SchemeViolationKind::DuplicateCode, &code.id);
        }
    }

    for code in &scheme.codes {
        match (&code.anti_of, code.family) {
            (Some(target), _) => match families.get(target.as_str()) {
                None => push(SchemeViolationKind::AntiTargetUnknown, &code.id),
                Some(Family::ANTI) => push(SchemeViolationKind::AntiTargetIsAnti, &code.id),
                Some(_) => {}
            },
            (None, Family::ANTI) => push(SchemeViolationKind::AntiWithoutTarget, &code.id),
            (None, _) => {}
        }
    }

    let mut assigned: BTreeMap<&str, usize> = BTreeMap::new();
    for a in &scheme.assignments {
        *assigned.entry(a.code_id.as_str()).or_default() += 1;
        if !families.contains_key(a.code_id.as_str()) {
            push(SchemeViolationKind::UnknownAssignedCode, &a.code_id);
        }
        if !(a.weight > 0.0 && a.weight.is_finite()) {
            push(SchemeViolationKind::NonPositiveWeight, &a.code_id);
        }
    }
    for (id, n) in &assigned {
        if *n > 1 {
            push(SchemeViolationKind::DuplicateAssignment, id);
        }
    }
    for id in families.keys() {
        if !assigned.contains_key(id) {
            push(SchemeViolationKind::UnassignedCode, id);
        }
    }

    out.into_iter().collect()
}

/// Parses and validates a scheme file.
pub fn load_scheme(source: &str) -> Result<CodingScheme, SchemeError> {
    let scheme: CodingScheme = serde_json::from_str(source)?;
    let violations = validate_scheme(&scheme);
    if violations.is_empty() {
        Ok(scheme)
    } else {
        Err(SchemeError::Invalid(violations))
    }
}

// (id, name, description)
const CORE_CODES: [(&str, &str, &str); 12] = [
    ("TG-PE", "Prioritization of Efficiency", "An overemphasis on efficiency and convenience as the primary values driving the adoption and deployment of technology."),
    ("TG-SO", "Superior Outcomes", "A belief that effectively addressing the technologically framed version of a problem achieves the optimal or superior outcome for the underlying complex societal issue."),
    ("TG-TF", "Technology Framing", "A tendency to perceive and define societal issues primarily through a technological lens."),
    ("SL-SF", "Solution Focus", "A preoccupation with narrow, often technological solutions for complex problems."),
    ("SL-SP", "Singular Problem", "A tendency to assume a singular definition of a problem rather than thoroughly investigating its multifaceted nature."),
    ("SL-UI", "Unquestioning Implementation", "A drive to implement solutions rapidly and widely without sufficient critical examination of their potential consequences or underlying assumptions."),
    ("TC-AA", "Always the Answer", "An excessive conviction that technology, regardless of the context, is the optimal or primary solution to any problem."),
    ("TC-OS", "Objectivity and Superiority", "A belief in the inherent objectivity and superiority of technology over non-technological approaches."),
    ("TC-PD", "Progress Driver", "A tendency to frame technology as the essential, primary, or inevitable engine driving societal progress, advancement, and positive transformation."),
    ("CT-DE", "Devaluation of Non-Tech", "A tendency to undervalue or disregard non-technological solutions, human wisdom, and social context in favor of technological interventions."),
    ("CT-MP", "Magical Power", "A belief in the near-magical ability of technology to solve complex societal problems."),
    ("CT-UF", "Utopian Future", "A belief in the transformative power of future technologies to create a better, even utopian world."),
];

const RESPONSE_CODES: [(&str, &str, &str); 10] = [
    ("ACK-CR", "External Critique", "Acknowledging a concern from others."),
    ("ACK-RI", "Risk", "Acknowledging a concern."),
    ("ADD-JU", "Justification", "Addressing a concern via justification or contextualization, arguing that, while possibly real, it is acceptable due to overriding benefits, necessity for progress, historical precedent, or context."),
    ("ADD-RE", "Refutation", "Addressing a concern via refutation or counter-argument against its validity or significance."),
    ("ADD-SN", "Non-Tech Solution", "Addressing a concern via a proposed solution or mitigation that is not primarily technology-based."),
    ("ADD-ST", "Tech Solution", "Addressing a concern via a proposed solution or mitigation primarily based on technology."),
    ("MAR-DE", "Deflection", "Avoiding addressing a concern directly by changing the subject, shifting blame, or attacking the critic."),
    ("MAR-DI", "Dismissal", "Rejecting a concern as fundamentally based on ignorance or fear-mongering, without substantive refutation."),
    ("MAR-MI", "Minimization", "Treating a concern as minor, insignificant, rare, or exaggerated."),
    ("MAR-RF", "Reframing", "Presenting a concern not as a problem but as neutral or beneficial."),
];

// Component table rows in table order. Anti codes of the core expression
// rows are generated with the weight of the code they negate.
const TCE_WEIGHTS: [(&str, f64); 12] = [
    ("CT-DE", 2.0),
    ("CT-MP", 2.0),
    ("CT-UF", 2.0),
    ("SL-SP", 2.0),
    ("TC-AA", 2.0),
    ("TC-PD", 2.0),
    ("SL-SF", 1.0),
    ("SL-UI", 1.0),
    ("TC-OS", 1.0),
    ("TG-PE", 1.0),
    ("TG-SO", 1.0),
    ("TG-TF", 1.0),
];

const TRR_WEIGHTS: [(&str, f64); 8] = [
    ("ADD-ST", 2.0),
    ("MAR-DI", 2.0),
    ("MAR-MI", 2.0),
    ("ACK-CR", 1.0),
    ("ADD-JU", 1.0),
    ("ADD-RE", 1.0),
    ("MAR-DE", 1.0),
    ("MAR-RF", 1.0),
];

const ANTI_TRR_WEIGHTS: [(&str, f64); 2] = [("ADD-SN", 2.0), ("ACK-RI", 1.0)];

fn family_of(id: &str) -> Family {
    match id.split('-').next() {
        Some("TG") => Family::TG,
        Some("SL") => Family::SL,
        Some("TC") => Family::TC,
        Some("CT") => Family::CT,
        Some("ACK") => Family::ACK,
        Some("ADD") => Family::ADD,
        Some("MAR") => Family::MAR,
        _ => Family::ANTI,
    }
}

pub fn anti_code_id(code_id: &str) -> String {
    format!("{ANTI_PREFIX}{code_id}")
}

/// The built-in scheme: 12 core expression codes, 10 response codes and one
/// anti code per core expression code, with the weighted component table.
pub fn builtin_tsd_scheme() -> CodingScheme {
    let mut codes: Vec<Code> = CORE_CODES
        .iter()
        .chain(RESPONSE_CODES.iter())
        .map(|(id, name, description)| Code {
            id: id.to_string(),
            name: name.to_string(),
            description: description.to_string(),
            family: family_of(id),
            anti_of: None,
        })
        .collect();
    codes.extend(CORE_CODES.iter().map(|(id, name, _)| Code {
        id: anti_code_id(id),
        name: format!("Anti {name}"),
        description: format!("An explicit contradiction of {id} ({name})."),
        family: Family::ANTI,
        anti_of: Some(id.to_string()),
    }));

    let row = |id: &str, component, weight| ComponentAssignment {
        code_id: id.to_string(),
        component,
        weight,
    };
    let mut assignments = Vec::with_capacity(codes.len());
    assignments.extend(TCE_WEIGHTS.iter().map(|(id, w)| row(id, Component::TCE, *w)));
    assignments.extend(TRR_WEIGHTS.iter().map(|(id, w)| row(id, Component::TRR, *w)));
    assignments.extend(
        TCE_WEIGHTS
            .iter()
            .map(|(id, w)| row(&anti_code_id(id), Component::ANTI_TCE, *w)),
    );
    assignments.extend(
        ANTI_TRR_WEIGHTS
            .iter()
            .map(|(id, w)| row(id, Component::ANTI_TRR, *w)),
    );

    CodingScheme {
        name: BUILTIN_SCHEME_NAME.to_string(),
        version: BUILTIN_SCHEME_VERSION.to_string(),
        codes,
        assignments,
    }
}
