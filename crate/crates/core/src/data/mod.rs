//! Dataset schemas, CSV ingestion and synthetic stream generators.

mod csvio;
mod schema;
mod synth;

pub use csvio::{load_csv, read_csv, write_csv, LoadedStream};
pub use schema::{DatasetSchema, FeatureSchedule, ScheduleStep};
pub use synth::{generate, GeneratorKind, SyntheticSpec};

use thiserror::Error;

use crate::forest::Instance;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed CSV at row {row}: {message}")]
    Csv { row: u64, message: String },
    #[error("column `{0}` is not declared by the schema")]
    UnknownColumn(String),
    #[error("column `{0}` required by the schema is missing from the header")]
    MissingColumn(String),
    #[error("row {row}: cannot parse `{value}` in column `{column}` as a number")]
    Parse { row: u64, column: String, value: String },
    #[error("row {row}: label value `{value}` has no mapping")]
    UnknownLabel { row: u64, value: String },
    #[error("active feature set must not be empty")]
    EmptyActiveSet,
    #[error("invalid schema: {0}")]
    Schema(String),
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("unknown built-in dataset `{0}`")]
    UnknownDataset(String),
}

/// Restrict every instance to the `active` features. Labels are untouched.
pub fn mask_features(stream: &[Instance], active: &[String]) -> Result<Vec<Instance>, DataError> {
    if active.is_empty() {
        return Err(DataError::EmptyActiveSet);
    }
    Ok(stream.iter().map(|x| x.masked(active)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masking() {
        let s = vec![
            Instance::from_pairs([("a", 1.0), ("b", 2.0), ("c", 3.0)], 1),
            Instance::from_pairs([("a", 4.0), ("b", 5.0), ("c", 6.0)], 0),
        ];
        let all: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        assert_eq!(mask_features(&s, &all).unwrap(), s);
        let m = mask_features(&s, &all[..2]).unwrap();
        assert!(m.iter().all(|x| x.features.len() == 2));
        assert_eq!(m[0].label, 1);
        assert!(matches!(mask_features(&s, &[]), Err(DataError::EmptyActiveSet)));
    }
}
