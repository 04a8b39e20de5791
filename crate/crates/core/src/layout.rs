//! Named channel subsets used for electrode-layout comparisons.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{AadError, Result};
use crate::signal::MultiSeries;

/// Channels per cEEGrid.
pub const GRID_SIZE: usize = 10;

/// Labels used by synthetic recordings: `L1..L10`, `R1..R10` for the two
/// around-the-ear grids, then `E1, E2, ...` for any extra channels.
pub fn synthetic_channel_labels(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| match i {
            i if i < GRID_SIZE => format!("L{}", i + 1),
            i if i < 2 * GRID_SIZE => format!("R{}", i - GRID_SIZE + 1),
            i => format!("E{}", i - 2 * GRID_SIZE + 1),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub name: String,
    pub channels: Vec<String>,
}

const BUILTIN: [(&str, &str); 4] = [
    ("ear20", "both around-the-ear grids, L1..L10 and R1..R10"),
    ("left10", "left grid, L1..L10"),
    ("right10", "right grid, R1..R10"),
    ("extra20", "first 20 non-grid channels, E1..E20"),
];

impl Layout {
    pub fn new(name: impl Into<String>, channels: Vec<String>) -> Result<Self> {
        let name = name.into();
        let mut seen = HashSet::new();
        if let Some(dup) = channels.iter().find(|c| !seen.insert(c.as_str())) {
            return Err(AadError::Config(format!(
                "layout {name} lists channel {dup} twice"
            )));
        }
        if channels.is_empty() {
            return Err(AadError::Config(format!("layout {name} is empty")));
        }
        Ok(Self { name, channels })
    }

    /// Names and descriptions of the built-in layouts.
    pub fn builtin_names() -> impl Iterator<Item = (&'static str, &'static str)> {
        BUILTIN.into_iter()
    }

    pub fn builtin(name: &str) -> Option<Self> {
        let grid = |side: char| (1..=GRID_SIZE).map(move |i| format!("{side}{i}"));
        let channels: Vec<String> = match name {
            "ear20" => grid('L').chain(grid('R')).collect(),
            "left10" => grid('L').collect(),
            "right10" => grid('R').collect(),
            "extra20" => (1..=20).map(|i| format!("E{i}")).collect(),
            _ => return None,
        };
        Some(Self {
            name: name.to_string(),
            channels,
        })
    }

    /// One label per line; blank lines and `#` comments are ignored.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AadError::io(path, e))?;
        let channels = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(String::from)
            .collect();
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "custom".into());
        Self::new(name, channels)
    }

    /// A built-in name, or otherwise a path to a layout file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        if let Some(l) = Self::builtin(name_or_path) {
            return Ok(l);
        }
        let path = Path::new(name_or_path);
        if path.exists() {
            Self::from_file(path)
        } else {
            Err(AadError::Config(format!(
                "{name_or_path} is neither a built-in layout nor a layout file"
            )))
        }
    }
}

/// Keep only the layout's channels, in layout order.
pub fn select_layout(eeg: &MultiSeries, layout: &Layout) -> Result<MultiSeries> {
    let mut idx = Vec::with_capacity(layout.channels.len());
    let mut missing = Vec::new();
    for label in &layout.channels {
        match eeg.channels().iter().position(|c| c == label) {
            Some(i) => idx.push(i),
            None => missing.push(label.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(AadError::Layout(missing));
    }
    Ok(eeg.select_indices(&idx))
}
