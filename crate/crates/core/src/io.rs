//! System description files.
//!
//! ```json
//! {"A": [[-2, 1], [0, -2]], "B": [[0], [1]], "jordan_blocks": [[-2, 2]]}
//! ```
//!
//! `jordan_blocks` is optional; when present the Jordan structure is taken
//! as given instead of being detected numerically.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::{matrix_from_rows, spectral_decompose, spectral_decompose_with_blocks, JordanBlock, LtiSystem, SpectralData};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    /// `[eigenvalue, size]` pairs in the order of the diagonal of `A`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jordan_blocks: Option<Vec<(f64, usize)>>,
}

/// A validated system together with any declared Jordan structure.
#[derive(Debug, Clone)]
pub struct SystemInput {
    pub sys: LtiSystem,
    pub blocks: Option<Vec<JordanBlock>>,
}

impl SystemInput {
    /// Spectral data from the declared blocks, or by numerical detection.
    pub fn spectral(&self) -> Result<SpectralData> {
        match &self.blocks {
            Some(blocks) => spectral_decompose_with_blocks(&self.sys, blocks),
            None => spectral_decompose(&self.sys, None),
        }
    }
}

impl TryFrom<SystemFile> for SystemInput {
    type Error = Error;

    fn try_from(file: SystemFile) -> Result<Self> {
        let a = matrix_from_rows(&file.a, "A")?;
        let b = matrix_from_rows(&file.b, "B")?;
        let sys = LtiSystem::new(a, b)?;
        let blocks = file
            .jordan_blocks
            .map(|v| v.into_iter().map(|(eigenvalue, size)| JordanBlock { eigenvalue, size }).collect());
        Ok(Self { sys, blocks })
    }
}

pub fn parse_system(text: &str) -> Result<SystemInput> {
    let file: SystemFile =
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("malformed system JSON: {e}")))?;
    file.try_into()
}

pub fn load_system(path: &Path) -> Result<SystemInput> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    parse_system(&text)
}
