//! Zeros files: one ordinate per line, ascending, `#` comments allowed.

use std::fs;
use std::path::Path;

use zerocorr_core::empirical::ZerosDataset;

use crate::error::{CliError, CliResult};

pub fn load_zeros(path: &Path) -> CliResult<ZerosDataset> {
    let text =
        fs::read_to_string(path).map_err(|source| CliError::File { path: path.display().to_string(), source })?;
    Ok(ZerosDataset::parse(&text, path.display().to_string())?)
}
