//! Output helpers: atomic file writes and fixed-precision number printing.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// One pending output file.
pub enum Content {
    Text(String),
}

/// Writes every file through a temp file in its target directory, renaming
/// only after all writes succeed, so failures leave no partial outputs.
pub fn stage_writes(files: Vec<(PathBuf, Content)>) -> Result<()> {
    let mut staged = Vec::with_capacity(files.len());
    for (path, content) in files {
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
        if let Some(dir) = dir {
            fs::create_dir_all(dir)
                .with_context(|| format!("creating output directory {}", dir.display()))?;
        }
        let mut tmp = tempfile::Builder::new()
            .prefix(".pdflow-tmp-")
            .tempfile_in(dir.unwrap_or(Path::new(".")))
            .with_context(|| format!("staging write for {}", path.display()))?;
        match &content {
            Content::Text(s) => tmp.write_all(s.as_bytes()),
        }
        .with_context(|| format!("writing staged content for {}", path.display()))?;
        staged.push((tmp, path));
    }
    for (tmp, path) in staged {
        tmp.persist(&path)
            .with_context(|| format!("moving staged file into {}", path.display()))?;
    }
    Ok(())
}

pub fn write_text(path: impl Into<PathBuf>, text: String) -> Result<()> {
    stage_writes(vec![(path.into(), Content::Text(text))])
}

/// Formats with exactly `sig` significant digits in plain decimal notation;
/// `inf` spelled lowercase.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return format!("{:.*}", sig - 1, 0.0);
    }
    // exponent of the value after rounding to `sig` digits
    let exp: i32 = format!("{:.*e}", sig - 1, x)
        .split_once('e')
        .map(|(_, e)| e.parse().unwrap())
        .unwrap();
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

#[cfg(test)]
mod tests {
    use super::fmt_sig;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.5, 12), "0.500000000000");
        assert_eq!(fmt_sig(123.456, 12), "123.456000000");
        assert_eq!(fmt_sig(0.0, 12), "0.00000000000");
        assert_eq!(fmt_sig(f64::INFINITY, 12), "inf");
        assert_eq!(fmt_sig(-2.0, 12), "-2.00000000000");
        assert_eq!(fmt_sig(9.999999999999999, 12), "10.0000000000");
        // the integer part is never truncated
        assert_eq!(fmt_sig(1234567890123.0, 12), "1234567890123");
    }
}
