use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use vlftbc_core::{BroadcastChannel, ChannelMatrix, JointLaw};

/// On-disk channel description.
///
/// ```json
/// {"input_size": 2,
///  "branches": [{"matrix": [[0.8, 0.2], [0.2, 0.8]]}],
///  "joint": {"shape": [2, 2], "data": [0.8, 0.2, 0.2, 0.8]},
///  "name": "bsc"}
/// ```
///
/// `joint` is optional; when present it is the flattened tensor
/// `P(y_1, ..., y_K | x)` in row-major order over `[x, y_1, ..., y_K]`, and
/// `branches` may be omitted (they are then its marginals).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub input_size: usize,
    #[serde(default)]
    pub branches: Vec<BranchEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint: Option<JointEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchEntry {
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointEntry {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl ChannelFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| anyhow::anyhow!("invalid channel file at line {}, column {}: {e}", e.line(), e.column()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_channel(&self) -> Result<BroadcastChannel> {
        let mut branches = Vec::with_capacity(self.branches.len());
        for (j, b) in self.branches.iter().enumerate() {
            if b.matrix.len() != self.input_size {
                bail!(
                    "branches[{j}].matrix has {} rows but input_size is {}",
                    b.matrix.len(),
                    self.input_size
                );
            }
            let m = ChannelMatrix::new(b.matrix.clone()).with_context(|| format!("branches[{j}].matrix"))?;
            branches.push(m);
        }
        let joint = match &self.joint {
            Some(j) => {
                if j.shape.first() != Some(&self.input_size) {
                    bail!("joint.shape must start with input_size = {}", self.input_size);
                }
                Some(JointLaw::new(&j.shape, j.data.clone()).context("joint")?)
            }
            None => None,
        };
        let bc = match (branches.is_empty(), joint) {
            (true, None) => bail!("a channel needs at least one branch or a joint law"),
            (true, Some(joint)) => BroadcastChannel::from_joint(joint).context("joint")?,
            (false, Some(joint)) => BroadcastChannel::with_joint(branches, joint).context("joint")?,
            (false, None) => BroadcastChannel::new(branches).context("branches")?,
        };
        Ok(bc)
    }

    pub fn from_channel(bc: &BroadcastChannel, name: Option<String>) -> Self {
        ChannelFile {
            input_size: bc.input_size(),
            branches: bc
                .branches()
                .iter()
                .map(|b| BranchEntry { matrix: b.to_rows() })
                .collect(),
            joint: bc.joint().map(|j| JointEntry {
                shape: j.shape(),
                data: j.data().to_vec(),
            }),
            name,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel files serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_idempotent() {
        let text = r#"{"input_size": 2, "branches": [{"matrix": [[0.9, 0.1], [0.1, 0.9]]}], "name": "bsc"}"#;
        let file = ChannelFile::parse(text).unwrap();
        let bc = file.to_channel().unwrap();
        let again = ChannelFile::from_channel(&bc, file.name.clone());
        assert_eq!(again, file);
        assert_eq!(ChannelFile::parse(&again.to_json()).unwrap(), again);
    }

    #[test]
    fn joint_only_file_gets_marginal_branches() {
        let text = r#"{"input_size": 2, "joint": {"shape": [2, 2], "data": [0.7, 0.3, 0.4, 0.6]}}"#;
        let bc = ChannelFile::parse(text).unwrap().to_channel().unwrap();
        assert_eq!(bc.num_branches(), 1);
        assert!((bc.branch(0).get(1, 0) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn diagnostics_name_the_problem() {
        let err = ChannelFile::parse("{\"input_size\": 2,\n \"branches\": [}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let bad_row = r#"{"input_size": 2, "branches": [{"matrix": [[0.9, 0.3], [0.1, 0.9]]}]}"#;
        let err = ChannelFile::parse(bad_row).unwrap().to_channel().unwrap_err();
        assert!(format!("{err:#}").contains("branches[0]"), "{err:#}");
        let wrong_rows = r#"{"input_size": 3, "branches": [{"matrix": [[0.9, 0.1], [0.1, 0.9]]}]}"#;
        assert!(ChannelFile::parse(wrong_rows).unwrap().to_channel().is_err());
        assert!(ChannelFile::parse(r#"{"input_size": 2, "branch": []}"#).is_err());
    }
}
