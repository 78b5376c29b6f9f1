//! Instance files: JSON documents or `party,votes` CSV.

use std::fs;
use std::path::Path;

use apportion_core::quota::{compute_quotas, VoteProfile};
use apportion_core::residue::{validate_residues, ResidueProfile};
use apportion_core::rules::Order;
use apportion_core::scalar::{exact_or_err, Scalar};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    Votes,
    Residues,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_restarts: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
}

impl RuleOptions {
    fn is_empty(&self) -> bool {
        *self == RuleOptions::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub mode: InputMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parties: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub votes: Option<Vec<Scalar>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residues: Option<Vec<Scalar>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub house_size: Option<u64>,
    /// A permutation of the 1-based party labels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "RuleOptions::is_empty")]
    pub rule_options: RuleOptions,
}

#[derive(Clone, Debug)]
pub enum Data {
    Votes(VoteProfile),
    Residues(ResidueProfile),
}

/// A validated instance together with the document it came from.
#[derive(Clone, Debug)]
pub struct Instance {
    pub file: InstanceFile,
    pub data: Data,
}

impl Instance {
    pub fn n(&self) -> usize {
        match &self.data {
            Data::Votes(v) => v.n(),
            Data::Residues(p) => p.n(),
        }
    }

    /// The residues themselves, or the fractional parts of the quotas.
    pub fn residues(&self) -> ResidueProfile {
        match &self.data {
            Data::Votes(v) => compute_quotas(v).residues,
            Data::Residues(p) => p.clone(),
        }
    }

    pub fn votes(&self) -> Result<&VoteProfile, CliError> {
        match &self.data {
            Data::Votes(v) => Ok(v),
            Data::Residues(_) => Err(CliError::usage("this command needs an instance in votes mode")),
        }
    }

    pub fn order(&self) -> Result<Option<Order>, CliError> {
        let Some(labels) = &self.file.order else {
            return Ok(None);
        };
        let mut seen = vec![false; self.n()];
        for &l in labels {
            if l == 0 || l > self.n() || std::mem::replace(&mut seen[l - 1], true) {
                return Err(CliError::usage(format!(
                    "order must be a permutation of 1..={}",
                    self.n()
                )));
            }
        }
        if labels.len() != self.n() {
            return Err(CliError::usage(format!("order must list all {} parties", self.n())));
        }
        Ok(Some(Order::Explicit(labels.iter().map(|l| l - 1).collect())))
    }
}

impl InstanceFile {
    pub fn validate(self, house_override: Option<u64>) -> Result<Instance, CliError> {
        let mut file = self;
        if house_override.is_some() {
            file.house_size = house_override;
        }
        let data = match file.mode {
            InputMode::Votes => {
                let votes = file
                    .votes
                    .as_ref()
                    .ok_or_else(|| CliError::usage("votes mode needs a `votes` list"))?;
                let h = file
                    .house_size
                    .ok_or_else(|| CliError::usage("votes mode needs `house_size`"))?;
                let exact = votes
                    .iter()
                    .map(|v| exact_or_err(v, "vote count"))
                    .collect::<Result<Vec<_>, _>>()?;
                Data::Votes(VoteProfile::new(exact, h)?)
            }
            InputMode::Residues => {
                let residues = file
                    .residues
                    .as_ref()
                    .ok_or_else(|| CliError::usage("residues mode needs a `residues` list"))?;
                Data::Residues(validate_residues(residues)?)
            }
        };
        if let Some(names) = &file.parties {
            let n = match &data {
                Data::Votes(v) => v.n(),
                Data::Residues(p) => p.n(),
            };
            if names.len() != n {
                return Err(CliError::usage(format!("{} party names for {n} parties", names.len())));
            }
        }
        let instance = Instance { file, data };
        instance.order()?;
        Ok(instance)
    }
}

/// Reads `party,votes` rows; a first row whose vote column is not a number
/// is taken as a header.
pub fn parse_csv(text: &str) -> Result<InstanceFile, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut parties = Vec::new();
    let mut votes = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::usage(format!("csv: {e}")))?;
        if record.len() != 2 {
            return Err(CliError::usage(format!(
                "csv row {} has {} fields; expected party,votes",
                line + 1,
                record.len()
            )));
        }
        match record[1].parse::<Scalar>() {
            Ok(v) => {
                parties.push(record[0].to_string());
                votes.push(v);
            }
            Err(_) if line == 0 => {}
            Err(e) => return Err(CliError::usage(format!("csv row {}: {e}", line + 1))),
        }
    }
    Ok(InstanceFile {
        mode: InputMode::Votes,
        parties: Some(parties),
        votes: Some(votes),
        residues: None,
        house_size: None,
        order: None,
        rule_options: RuleOptions::default(),
    })
}

/// Loads an instance file. A report file is accepted too, in which case its
/// input echo is used.
pub fn load(path: &Path, house_override: Option<u64>) -> Result<Instance, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let file = if is_csv {
        parse_csv(&text)?
    } else {
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let value = match value.get("input") {
            Some(input) if value.get("tool").is_some() => input.clone(),
            _ => value,
        };
        serde_json::from_value(value).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?
    };
    file.validate(house_override)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_header() {
        let f = parse_csv("party,votes\nA,110\nB, 270\n# comment\nC,1/2\n").unwrap();
        assert_eq!(f.parties.as_deref().unwrap(), ["A", "B", "C"]);
        assert_eq!(f.votes.as_ref().unwrap()[2], Scalar::ratio(1, 2));
        assert!(f.validate(None).is_err());
    }

    #[test]
    fn csv_rejects_bad_rows() {
        assert!(parse_csv("A,1\nB,x\n").is_err());
        assert!(parse_csv("A,1,2\n").is_err());
    }

    #[test]
    fn residues_must_sum_to_integer() {
        let f: InstanceFile = serde_json::from_str(r#"{"mode":"residues","residues":["0.5","0.6"]}"#).unwrap();
        assert!(f.validate(None).is_err());
        let f: InstanceFile = serde_json::from_str(r#"{"mode":"residues","residues":["0.5","0.5"]}"#).unwrap();
        assert_eq!(f.validate(None).unwrap().residues().k(), 1);
    }

    #[test]
    fn order_must_be_permutation() {
        let f: InstanceFile =
            serde_json::from_str(r#"{"mode":"votes","votes":[1,2,3],"house_size":2,"order":[1,1,2]}"#).unwrap();
        assert!(f.validate(None).is_err());
        let f: InstanceFile =
            serde_json::from_str(r#"{"mode":"votes","votes":[1,2,3],"house_size":2,"order":[3,1,2]}"#).unwrap();
        assert_eq!(f.validate(None).unwrap().order().unwrap(), Some(Order::Explicit(vec![2, 0, 1])));
    }

    #[test]
    fn float_json_numbers_rejected() {
        assert!(serde_json::from_str::<InstanceFile>(r#"{"mode":"residues","residues":[0.5,0.5]}"#).is_err());
    }
}
