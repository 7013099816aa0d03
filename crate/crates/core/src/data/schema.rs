use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{AnamError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FeatureKind {
    Continuous,
    Categorical { levels: Vec<String> },
}

impl FeatureKind {
    pub fn is_categorical(&self) -> bool {
        matches!(self, FeatureKind::Categorical { .. })
    }

    /// Width of the one-hot (or scalar) encoding fed to a neural term.
    pub fn encoded_width(&self) -> usize {
        match self {
            FeatureKind::Continuous => 1,
            FeatureKind::Categorical { levels } => levels.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Feature,
    Response,
    Exposure,
    Ignore,
}

/// One column of a schema file: `{name, kind, role, levels?}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: FeatureKind,
    pub role: Role,
}

impl ColumnSpec {
    pub fn continuous(name: &str, role: Role) -> Self {
        ColumnSpec {
            name: name.to_string(),
            kind: FeatureKind::Continuous,
            role,
        }
    }

    pub fn categorical(name: &str, levels: &[&str]) -> Self {
        ColumnSpec {
            name: name.to_string(),
            kind: FeatureKind::Categorical {
                levels: levels.iter().map(|s| s.to_string()).collect(),
            },
            role: Role::Feature,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Self> {
        let schema = Schema { columns };
        schema.validate()?;
        Ok(schema)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AnamError::io(path, e))?;
        let schema: Schema = serde_json::from_str(&text)?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        let mut responses = 0;
        let mut exposures = 0;
        for col in &self.columns {
            if col.name.is_empty() {
                return Err(AnamError::InvalidSchema("empty column name".into()));
            }
            if !seen.insert(col.name.as_str()) {
                return Err(AnamError::InvalidSchema(format!(
                    "duplicate column '{}'",
                    col.name
                )));
            }
            if let FeatureKind::Categorical { levels } = &col.kind {
                if levels.is_empty() {
                    return Err(AnamError::InvalidSchema(format!(
                        "categorical column '{}' has no levels",
                        col.name
                    )));
                }
                let unique: HashSet<_> = levels.iter().collect();
                if unique.len() != levels.len() {
                    return Err(AnamError::InvalidSchema(format!(
                        "categorical column '{}' has duplicate levels",
                        col.name
                    )));
                }
            }
            match col.role {
                Role::Response | Role::Exposure if col.kind.is_categorical() => {
                    return Err(AnamError::InvalidSchema(format!(
                        "column '{}' must be continuous",
                        col.name
                    )));
                }
                Role::Response => responses += 1,
                Role::Exposure => exposures += 1,
                _ => {}
            }
        }
        if responses != 1 {
            return Err(AnamError::InvalidSchema(format!(
                "expected exactly one response column, found {responses}"
            )));
        }
        if exposures > 1 {
            return Err(AnamError::InvalidSchema(format!(
                "at most one exposure column allowed, found {exposures}"
            )));
        }
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_json_schema() {
        let text = r#"[
            {"name": "x", "kind": "continuous", "role": "feature"},
            {"name": "c", "kind": "categorical", "role": "feature", "levels": ["a", "b"]},
            {"name": "y", "kind": "continuous", "role": "response"}
        ]"#;
        let schema: Schema = serde_json::from_str(text).unwrap();
        schema.validate().unwrap();
        assert_eq!(schema.columns.len(), 3);
        assert_eq!(schema.columns[1].kind.encoded_width(), 2);
        let back: Schema = serde_json::from_str(&schema.to_json().unwrap()).unwrap();
        assert_eq!(back, schema);
    }

    #[test]
    fn rejects_bad_schemas() {
        let two_resp = Schema {
            columns: vec![
                ColumnSpec::continuous("a", Role::Response),
                ColumnSpec::continuous("b", Role::Response),
            ],
        };
        assert!(two_resp.validate().is_err());
        let dup_levels = Schema {
            columns: vec![
                ColumnSpec::categorical("c", &["a", "a"]),
                ColumnSpec::continuous("y", Role::Response),
            ],
        };
        assert!(dup_levels.validate().is_err());
        let empty_levels = Schema {
            columns: vec![
                ColumnSpec::categorical("c", &[]),
                ColumnSpec::continuous("y", Role::Response),
            ],
        };
        assert!(empty_levels.validate().is_err());
        let two_exposure = Schema {
            columns: vec![
                ColumnSpec::continuous("y", Role::Response),
                ColumnSpec::continuous("e1", Role::Exposure),
                ColumnSpec::continuous("e2", Role::Exposure),
            ],
        };
        assert!(two_exposure.validate().is_err());
    }
}
