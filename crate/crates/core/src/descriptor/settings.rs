use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::Descriptor;

/// One `settings` entry: a pre-defined function name and its attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    pub function: String,
    pub attribute: Value,
}

/// Function names that `settings` entries may refer to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnownFunctions(BTreeSet<String>);

impl KnownFunctions {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self(names.into_iter().map(Into::into).collect())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl Default for KnownFunctions {
    /// `unique` and `index`; both are recorded as metadata only.
    fn default() -> Self {
        Self::new(["unique", "index"])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettingsWarning {
    pub function: String,
    pub message: String,
}

/// Parses the raw `settings` value: an array of single-member objects.
pub(crate) fn parse_settings(raw: Option<&Value>) -> Result<Vec<Setting>, String> {
    let Some(raw) = raw else {
        return Ok(Vec::new());
    };
    let entries = raw.as_array().ok_or("settings must be an array")?;
    entries
        .iter()
        .enumerate()
        .map(|(i, entry)| match entry.as_object() {
            Some(pair) if pair.len() == 1 => {
                let (function, attribute) = pair.iter().next().expect("one member");
                Ok(Setting {
                    function: function.clone(),
                    attribute: attribute.clone(),
                })
            }
            _ => Err(format!(
                "settings[{i}] must be an object with exactly one member"
            )),
        })
        .collect()
}

/// One warning per setting whose function is not known.
pub fn validate_settings(descriptor: &Descriptor, known: &KnownFunctions) -> Vec<SettingsWarning> {
    descriptor
        .settings
        .iter()
        .filter(|s| !known.contains(&s.function))
        .map(|s| SettingsWarning {
            function: s.function.clone(),
            message: format!(
                "unknown settings function {:?}; stored but not applied",
                s.function
            ),
        })
        .collect()
}
