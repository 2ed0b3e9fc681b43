//! Center location error, VOC overlap, and benchmark tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::BoundingBox;

/// Euclidean distance between box centers, in pixels.
pub fn cle(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let (ax, ay) = a.center();
    let (bx, by) = b.center();
    (ax - bx).hypot(ay - by)
}

/// Intersection over union.
pub fn vor(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let ix = (f64::from(a.x) + f64::from(a.w)).min(f64::from(b.x) + f64::from(b.w)) - f64::from(a.x.max(b.x));
    let iy = (f64::from(a.y) + f64::from(a.h)).min(f64::from(b.y) + f64::from(b.h)) - f64::from(a.y.max(b.y));
    if ix <= 0.0 || iy <= 0.0 {
        return 0.0;
    }
    let inter = ix * iy;
    inter / (a.area() + b.area() - inter)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackResult {
    pub name: String,
    pub boxes: Vec<BoundingBox>,
    /// `None` marks a missing or invalid ground-truth row.
    pub ground_truth: Vec<Option<BoundingBox>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameMetric {
    pub frame: usize,
    pub cle: f64,
    pub vor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub frames: Vec<FrameMetric>,
    /// Frames without usable ground truth.
    pub skipped: Vec<usize>,
    pub mean_cle: f64,
    pub mean_vor: f64,
}

pub fn report(result: &TrackResult) -> Result<MetricReport> {
    if result.boxes.len() != result.ground_truth.len() {
        return Err(Error::Mismatch {
            expected: result.ground_truth.len(),
            found: result.boxes.len(),
        });
    }
    if result.boxes.is_empty() {
        return Err(Error::Empty("track result"));
    }
    let mut frames = Vec::with_capacity(result.boxes.len());
    let mut skipped = Vec::new();
    for (i, (pred, gt)) in result.boxes.iter().zip(&result.ground_truth).enumerate() {
        match gt {
            Some(gt) => frames.push(FrameMetric {
                frame: i,
                cle: cle(pred, gt),
                vor: vor(pred, gt),
            }),
            None => skipped.push(i),
        }
    }
    if frames.is_empty() {
        return Err(Error::Empty("valid ground-truth rows"));
    }
    let n = frames.len() as f64;
    let mean_cle = frames.iter().map(|f| f.cle).sum::<f64>() / n;
    let mean_vor = frames.iter().map(|f| f.vor).sum::<f64>() / n;
    Ok(MetricReport {
        frames,
        skipped,
        mean_cle,
        mean_vor,
    })
}

/// Parses one box per line: four numbers separated by commas, tabs or spaces.
/// Blank or malformed lines, and boxes without positive size, become `None`.
pub fn parse_boxes(text: &str) -> Vec<Option<BoundingBox>> {
    text.lines().map(parse_box).collect()
}

fn parse_box(line: &str) -> Option<BoundingBox> {
    let fields: Vec<f64> = line
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|f| !f.is_empty())
        .map(|f| f.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect::<Option<_>>()?;
    let [x, y, w, h] = fields[..] else {
        return None;
    };
    if w < 1.0 || h < 1.0 {
        return None;
    }
    Some(BoundingBox::new(
        x.round() as i32,
        y.round() as i32,
        w.round() as u32,
        h.round() as u32,
    ))
}

pub fn format_boxes(boxes: &[BoundingBox]) -> String {
    boxes.iter().fold(String::new(), |mut out, b| {
        let _ = writeln!(out, "{},{},{},{}", b.x, b.y, b.w, b.h);
        out
    })
}

/// Per-frame CSV: `frame,x,y,w,h,cle,vor`; metric cells stay empty for frames
/// without ground truth.
pub fn per_frame_csv(result: &TrackResult, report: &MetricReport) -> String {
    let mut out = String::from("frame,x,y,w,h,cle,vor\n");
    let mut metrics = report.frames.iter().peekable();
    for (i, b) in result.boxes.iter().enumerate() {
        let _ = write!(out, "{},{},{},{},{},", i, b.x, b.y, b.w, b.h);
        match metrics.next_if(|m| m.frame == i) {
            Some(m) => {
                let _ = writeln!(out, "{:.4},{:.4}", m.cle, m.vor);
            }
            None => out.push_str(",\n"),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Cle,
    Vor,
}

impl Metric {
    pub fn title(self) -> &'static str {
        match self {
            Metric::Cle => "Average Center Location Error (in pixel)",
            Metric::Vor => "Average Overlap Rate",
        }
    }

    fn format(self, v: f64) -> String {
        match self {
            Metric::Cle => format!("{v:.1}"),
            Metric::Vor => format!("{v:.2}"),
        }
    }
}

/// Sequences as rows, methods as columns, closed by an `Average` row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub methods: Vec<String>,
    /// `(sequence, per-method (mean CLE, mean VOR))`.
    pub rows: Vec<(String, Vec<(f64, f64)>)>,
}

impl ResultTable {
    pub fn new(methods: Vec<String>) -> Self {
        Self {
            methods,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, sequence: impl Into<String>, per_method: Vec<(f64, f64)>) -> Result<()> {
        if per_method.len() != self.methods.len() {
            return Err(Error::Mismatch {
                expected: self.methods.len(),
                found: per_method.len(),
            });
        }
        self.rows.push((sequence.into(), per_method));
        Ok(())
    }

    fn value(metric: Metric, cell: (f64, f64)) -> f64 {
        match metric {
            Metric::Cle => cell.0,
            Metric::Vor => cell.1,
        }
    }

    /// Mean over sequences of each method's per-sequence average.
    pub fn averages(&self, metric: Metric) -> Vec<f64> {
        let n = self.rows.len() as f64;
        (0..self.methods.len())
            .map(|m| {
                self.rows
                    .iter()
                    .map(|(_, cells)| Self::value(metric, cells[m]))
                    .sum::<f64>()
                    / n
            })
            .collect()
    }

    fn cells(&self, metric: Metric) -> Vec<Vec<String>> {
        let mut grid = vec![std::iter::once("Seq".to_string())
            .chain(self.methods.iter().cloned())
            .collect::<Vec<_>>()];
        for (name, cells) in &self.rows {
            grid.push(
                std::iter::once(name.clone())
                    .chain(cells.iter().map(|&c| metric.format(Self::value(metric, c))))
                    .collect(),
            );
        }
        grid.push(
            std::iter::once("Average".to_string())
                .chain(self.averages(metric).into_iter().map(|v| metric.format(v)))
                .collect(),
        );
        grid
    }

    pub fn to_csv(&self, metric: Metric) -> String {
        self.cells(metric).iter().fold(String::new(), |mut out, row| {
            out.push_str(&row.join(","));
            out.push('\n');
            out
        })
    }

    /// Aligned plain-text rendering with the metric as caption.
    pub fn to_text(&self, metric: Metric) -> String {
        let grid = self.cells(metric);
        let widths: Vec<usize> = (0..grid[0].len())
            .map(|c| grid.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let rule = |fill: &str| widths.iter().map(|&w| fill.repeat(w + 2)).collect::<Vec<_>>().join("+");
        let line = |row: &[String]| {
            row.iter()
                .enumerate()
                .map(|(c, cell)| {
                    if c == 0 {
                        format!(" {:<w$} ", cell, w = widths[c])
                    } else {
                        format!(" {:>w$} ", cell, w = widths[c])
                    }
                })
                .collect::<Vec<_>>()
                .join("|")
        };
        let mut out = format!("{}\n", metric.title());
        let last = grid.len() - 1;
        for (i, row) in grid.iter().enumerate() {
            if i == last {
                out.push_str(&rule("="));
                out.push('\n');
            }
            out.push_str(line(row).trim_end());
            out.push('\n');
            if i == 0 {
                out.push_str(&rule("-"));
                out.push('\n');
            }
        }
        out
    }
}
