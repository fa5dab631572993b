use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the eight surveyed developer beliefs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BeliefId {
    B1,
    B2,
    B3,
    B4,
    B5,
    B6,
    B7,
    B8,
}

impl BeliefId {
    pub const ALL: [BeliefId; 8] = [
        BeliefId::B1,
        BeliefId::B2,
        BeliefId::B3,
        BeliefId::B4,
        BeliefId::B5,
        BeliefId::B6,
        BeliefId::B7,
        BeliefId::B8,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BeliefId::B1 => "B1",
            BeliefId::B2 => "B2",
            BeliefId::B3 => "B3",
            BeliefId::B4 => "B4",
            BeliefId::B5 => "B5",
            BeliefId::B6 => "B6",
            BeliefId::B7 => "B7",
            BeliefId::B8 => "B8",
        }
    }

    pub fn meta(self) -> BeliefMeta {
        let (survey_id, statement, agree_pct) = match self {
            BeliefId::B1 => ("S14", "Files changed by more developers are more buggy", 64),
            BeliefId::B2 => ("S4", "A file with more added lines is more bug-prone", 61),
            BeliefId::B3 => ("S9", "Recently created files tend to be buggy", 52),
            BeliefId::B4 => ("T7", "A file with more Lines of Code (LOC)", 48),
            BeliefId::B5 => ("S11", "Files with more fixed bugs are more bug-prone", 48),
            BeliefId::B6 => ("S12", "A file with more commits is more bug-prone", 46),
            BeliefId::B7 => ("S13", "A file with more removed lines is more bug-prone", 35),
            BeliefId::B8 => (
                "S15",
                "Files with fewer lines contributed by their owners (who contribute most changes) are more bug-prone",
                30,
            ),
        };
        BeliefMeta {
            id: self,
            survey_id: survey_id.to_string(),
            statement: statement.to_string(),
            agree_pct,
        }
    }
}

impl fmt::Display for BeliefId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown belief id `{0}`")]
pub struct UnknownBelief(pub String);

impl FromStr for BeliefId {
    type Err = UnknownBelief;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BeliefId::ALL
            .into_iter()
            .find(|b| b.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownBelief(s.to_string()))
    }
}

/// Survey metadata for a belief: its statement and the share of surveyed
/// developers who agreed with it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeliefMeta {
    pub id: BeliefId,
    pub survey_id: String,
    pub statement: String,
    pub agree_pct: u8,
}

/// All eight beliefs in survey order (descending agreement).
pub fn roster() -> Vec<BeliefMeta> {
    BeliefId::ALL.into_iter().map(BeliefId::meta).collect()
}
