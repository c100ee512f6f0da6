use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Size of the label space: normal plus thirteen disease categories.
pub const NUM_CLASSES: usize = 14;

/// Disease abbreviations indexed by label.
pub const CLASS_NAMES: [&str; NUM_CLASSES] = [
    "None (Normal)",
    "Emboli",
    "BRAO",
    "CRAO",
    "BRVO",
    "CRVO",
    "Hemi-CRVO",
    "BDR/NPDR",
    "PDR",
    "ASR",
    "HTR",
    "Coat's",
    "Macroaneurism",
    "CNV",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("label {0} is outside 0..=13 (label 14 is excluded from the classification set)")]
    OutOfRange(i64),
    #[error("cannot parse label {0:?}")]
    Parse(String),
}

/// A class label in `0..NUM_CLASSES`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct Label(u8);

impl Label {
    pub fn new(value: i64) -> Result<Self, LabelError> {
        if (0..NUM_CLASSES as i64).contains(&value) {
            Ok(Label(value as u8))
        } else {
            Err(LabelError::OutOfRange(value))
        }
    }

    /// Panics when `index >= NUM_CLASSES`.
    pub fn from_index(index: usize) -> Self {
        assert!(index < NUM_CLASSES, "label index {index} out of range");
        Label(index as u8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn name(self) -> &'static str {
        CLASS_NAMES[self.index()]
    }

    pub fn all() -> impl Iterator<Item = Label> {
        (0..NUM_CLASSES).map(Label::from_index)
    }
}

impl TryFrom<i64> for Label {
    type Error = LabelError;
    fn try_from(value: i64) -> Result<Self, Self::Error> {
        Label::new(value)
    }
}

impl From<Label> for u8 {
    fn from(label: Label) -> u8 {
        label.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Label {
    type Err = LabelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let value: i64 = s
            .trim()
            .parse()
            .map_err(|_| LabelError::Parse(s.to_string()))?;
        Label::new(value)
    }
}
