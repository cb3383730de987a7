//! Experiment runner for the `eqnn` library: dataset CSV files, JSON run reports
//! and the commands behind the `eqnn` binary.

use std::io::Write;
use std::path::Path;

pub mod commands;
pub mod dataset_csv;
pub mod report;

/// Exit code for runtime and I/O failures.
pub const EXIT_RUNTIME: i32 = 1;
/// Exit code for invalid arguments or inputs.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Runtime(#[from] anyhow::Error),
}

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Runtime(anyhow::Error::new(err).context(format!("writing {}", path.display())))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<eqnn::Error> for CliError {
    fn from(e: eqnn::Error) -> Self {
        match e {
            eqnn::Error::Usage(_) | eqnn::Error::Config(_) => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.into()),
        }
    }
}

impl From<dataset_csv::CsvError> for CliError {
    fn from(e: dataset_csv::CsvError) -> Self {
        match e {
            dataset_csv::CsvError::Io { .. } => CliError::Runtime(e.into()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

/// Writes `contents` to a temporary file next to `path`, then renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
