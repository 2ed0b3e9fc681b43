//! Image-directory sequences and their ground-truth files.
//!
//! A sequence directory either holds the frames itself or has them in an
//! `img/` subdirectory next to `groundtruth.txt`.

use std::path::{Path, PathBuf};

use sigmil::evaluation::parse_boxes;
use sigmil::BoundingBox;

use crate::error::{CliError, CliResult};

pub const FRAME_DIR: &str = "img";
pub const GROUND_TRUTH: &str = "groundtruth.txt";
const EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec {
    pub name: String,
    /// Frame files in lexicographic order.
    pub frames: Vec<PathBuf>,
    pub ground_truth: PathBuf,
}

impl SequenceSpec {
    /// Resolves `dir`; `gt` overrides the default `groundtruth.txt`.
    pub fn open(dir: &Path, gt: Option<&Path>) -> CliResult<Self> {
        if !dir.is_dir() {
            return Err(CliError::Input(format!("{} is not a directory", dir.display())));
        }
        let nested = dir.join(FRAME_DIR);
        let frame_dir = if nested.is_dir() { nested } else { dir.to_path_buf() };
        let ground_truth = gt.map(Path::to_path_buf).unwrap_or_else(|| dir.join(GROUND_TRUTH));
        let frames = list_frames(&frame_dir)?;
        if frames.is_empty() {
            return Err(CliError::Input(format!("no image files in {}", frame_dir.display())));
        }
        let name = dir
            .canonicalize()
            .ok()
            .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .unwrap_or_else(|| "sequence".into());
        Ok(Self {
            name,
            frames,
            ground_truth,
        })
    }

    /// Ground truth padded with `None` to the frame count. The first row must
    /// hold a valid box; extra rows beyond the last frame are an error.
    pub fn load_ground_truth(&self) -> CliResult<(BoundingBox, Vec<Option<BoundingBox>>)> {
        let mut rows = read_ground_truth(&self.ground_truth)?;
        if rows.len() > self.frames.len() {
            return Err(CliError::Input(format!(
                "{} has {} rows for {} frames",
                self.ground_truth.display(),
                rows.len(),
                self.frames.len()
            )));
        }
        let first = rows.first().copied().flatten().ok_or_else(|| {
            CliError::Input(format!(
                "{}: first line must be a box x,y,w,h",
                self.ground_truth.display()
            ))
        })?;
        rows.resize(self.frames.len(), None);
        Ok((first, rows))
    }
}

/// Parses a ground-truth or results file, dropping trailing blank lines.
pub fn read_ground_truth(path: &Path) -> CliResult<Vec<Option<BoundingBox>>> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    let mut rows = parse_boxes(&text);
    let blank = text.lines().rev().take_while(|l| l.trim().is_empty()).count();
    rows.truncate(rows.len() - blank);
    Ok(rows)
}

fn list_frames(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut frames: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(CliError::io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    frames.sort();
    Ok(frames)
}

/// Subdirectories of `root` laid out as `img/` plus `groundtruth.txt`, by name.
pub fn find_sequences(root: &Path) -> CliResult<Vec<PathBuf>> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(root)
        .map_err(CliError::io(root))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(FRAME_DIR).is_dir() && p.join(GROUND_TRUTH).is_file())
        .collect();
    dirs.sort();
    Ok(dirs)
}
