//! Training manifests: positive `.dat` files (`path N x y w h ...`) and
//! negative background lists, plus a checker against the image tree.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::imaging::{decode_pnm, Rect};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositiveRecord {
    pub image_path: String,
    pub objects: Vec<Rect>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativeRecord {
    pub image_path: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ManifestError {
    #[error("line {line}: missing object count")]
    MissingCount { line: usize },
    #[error("line {line}: bad object count {token:?}")]
    BadCount { line: usize, token: String },
    #[error("line {line}: {declared} objects declared, {values} geometry values given (need {})", declared * 4)]
    Arity { line: usize, declared: usize, values: usize },
    #[error("line {line}: {token:?} is not an integer")]
    NotInteger { line: usize, token: String },
    #[error("line {line}: negative {field} {value}")]
    Negative { line: usize, field: &'static str, value: i64 },
    #[error("line {line}: coordinate {value} out of range")]
    Range { line: usize, value: i64 },
}

/// Positive manifest. Paths cannot contain whitespace.
pub fn parse_positive_manifest(text: &str) -> Result<Vec<PositiveRecord>, ManifestError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut tokens = raw.split_whitespace();
        let Some(path) = tokens.next() else { continue };
        let count_tok = tokens.next().ok_or(ManifestError::MissingCount { line })?;
        let declared: usize = count_tok.parse().map_err(|_| ManifestError::BadCount {
            line,
            token: count_tok.to_owned(),
        })?;
        let rest: Vec<&str> = tokens.collect();
        if rest.len() != declared * 4 {
            return Err(ManifestError::Arity {
                line,
                declared,
                values: rest.len(),
            });
        }
        let mut nums = Vec::with_capacity(rest.len());
        for tok in &rest {
            let v: i64 = tok.parse().map_err(|_| ManifestError::NotInteger {
                line,
                token: (*tok).to_owned(),
            })?;
            nums.push(v);
        }
        let mut objects = Vec::with_capacity(declared);
        for q in nums.chunks_exact(4) {
            for (field, value) in [("x", q[0]), ("y", q[1]), ("width", q[2]), ("height", q[3])] {
                if value < 0 {
                    return Err(ManifestError::Negative { line, field, value });
                }
                if value > u32::MAX as i64 {
                    return Err(ManifestError::Range { line, value });
                }
            }
            objects.push(Rect::new(q[0] as u32, q[1] as u32, q[2] as u32, q[3] as u32));
        }
        out.push(PositiveRecord {
            image_path: path.to_owned(),
            objects,
        });
    }
    Ok(out)
}

/// One path per line; blank lines and `#` comments are skipped.
pub fn parse_negative_manifest(text: &str) -> Vec<NegativeRecord> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| NegativeRecord {
            image_path: l.to_owned(),
        })
        .collect()
}

pub fn format_positive_manifest(records: &[PositiveRecord]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&r.image_path);
        s.push_str(&format!(" {}", r.objects.len()));
        for o in &r.objects {
            s.push_str(&format!(" {} {} {} {}", o.x, o.y, o.w, o.h));
        }
        s.push('\n');
    }
    s
}

pub fn format_negative_manifest(records: &[NegativeRecord]) -> String {
    records.iter().map(|r| format!("{}\n", r.image_path)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Issue {
    MissingFile { path: String },
    Unreadable { path: String, reason: String },
    NegativeTooSmall { path: String, width: u32, height: u32 },
    RectOutOfBounds { path: String, rect: Rect, width: u32, height: u32 },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::MissingFile { path } => write!(f, "missing file: {path}"),
            Issue::Unreadable { path, reason } => write!(f, "unreadable image {path}: {reason}"),
            Issue::NegativeTooSmall { path, width, height } => {
                write!(f, "negative smaller than training window: {path} ({width}x{height})")
            }
            Issue::RectOutOfBounds {
                path,
                rect,
                width,
                height,
            } => write!(
                f,
                "object out of bounds: {path} rect ({}, {}, {}, {}) in {width}x{height}",
                rect.x, rect.y, rect.w, rect.h
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub positive_images: usize,
    pub positive_objects: usize,
    pub negative_images: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Report {
    pub issues: Vec<Issue>,
    pub counts: Counts,
    /// Sample-size guidance; never a failure.
    pub advisories: Vec<String>,
}

impl Report {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "positives: {} images, {} objects; negatives: {} images",
            self.counts.positive_images, self.counts.positive_objects, self.counts.negative_images
        )?;
        for i in &self.issues {
            writeln!(f, "error: {i}")?;
        }
        for a in &self.advisories {
            writeln!(f, "advisory: {a}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
#[error("cannot read dataset root {path}: {source}")]
pub struct RootError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

pub const MIN_POSITIVES: usize = 500;
pub const MIN_NEGATIVES: usize = 250;
pub const SUGGESTED_POSITIVES: usize = 2000;
pub const SUGGESTED_NEGATIVES: usize = 500;

fn is_pnm(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref(),
        Some("pgm" | "ppm" | "pnm")
    )
}

fn image_size(path: &Path, rel: &str) -> Result<(u32, u32), Issue> {
    if !path.is_file() {
        return Err(Issue::MissingFile { path: rel.to_owned() });
    }
    let unreadable = |reason: String| Issue::Unreadable {
        path: rel.to_owned(),
        reason,
    };
    if is_pnm(path) {
        let bytes = fs::read(path).map_err(|e| unreadable(e.to_string()))?;
        let img = decode_pnm(&bytes).map_err(|e| unreadable(e.to_string()))?;
        Ok((img.width(), img.height()))
    } else {
        image::image_dimensions(path).map_err(|e| unreadable(e.to_string()))
    }
}

/// Checks every referenced image under `root`. Issues come out in input
/// order, positives first.
pub fn validate_dataset(
    pos: &[PositiveRecord],
    neg: &[NegativeRecord],
    train_w: u32,
    train_h: u32,
    root: &Path,
) -> Result<Report, RootError> {
    fs::read_dir(root).map_err(|source| RootError {
        path: root.to_owned(),
        source,
    })?;

    let pos_issues: Vec<Vec<Issue>> = pos
        .par_iter()
        .map(|r| match image_size(&root.join(&r.image_path), &r.image_path) {
            Err(i) => vec![i],
            Ok((w, h)) => r
                .objects
                .iter()
                .filter(|o| !o.fits(w, h))
                .map(|o| Issue::RectOutOfBounds {
                    path: r.image_path.clone(),
                    rect: *o,
                    width: w,
                    height: h,
                })
                .collect(),
        })
        .collect();
    let neg_issues: Vec<Option<Issue>> = neg
        .par_iter()
        .map(|r| match image_size(&root.join(&r.image_path), &r.image_path) {
            Err(i) => Some(i),
            Ok((w, h)) if w < train_w || h < train_h => Some(Issue::NegativeTooSmall {
                path: r.image_path.clone(),
                width: w,
                height: h,
            }),
            Ok(_) => None,
        })
        .collect();

    let counts = Counts {
        positive_images: pos.len(),
        positive_objects: pos.iter().map(|r| r.objects.len()).sum(),
        negative_images: neg.len(),
    };
    let mut advisories = Vec::new();
    if counts.positive_objects < MIN_POSITIVES {
        advisories.push(format!(
            "{} positive samples is below the usual minimum of {MIN_POSITIVES}",
            counts.positive_objects
        ));
    } else if counts.positive_objects < SUGGESTED_POSITIVES {
        advisories.push(format!(
            "{} positive samples; a few thousand ({SUGGESTED_POSITIVES}+) is recommended",
            counts.positive_objects
        ));
    }
    if counts.negative_images < MIN_NEGATIVES {
        advisories.push(format!(
            "{} negative images is below the usual minimum of {MIN_NEGATIVES}",
            counts.negative_images
        ));
    } else if counts.negative_images < SUGGESTED_NEGATIVES {
        advisories.push(format!(
            "{} negative images; {SUGGESTED_NEGATIVES}+ is recommended",
            counts.negative_images
        ));
    }

    Ok(Report {
        issues: pos_issues.into_iter().flatten().chain(neg_issues.into_iter().flatten()).collect(),
        counts,
        advisories,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_and_multi_object_lines() {
        let r = parse_positive_manifest("img/a.png 1 140 100 45 45\nimg/b.png 2 10 10 5 5 30 30 8 8\n").unwrap();
        assert_eq!(r[0].objects, vec![Rect::new(140, 100, 45, 45)]);
        assert_eq!(r[1].objects.len(), 2);
    }

    #[test]
    fn arity_error_names_line() {
        let e = parse_positive_manifest("a.png 1 0 0 1 1\n\nb.png 3 0 0 1 1 2 2 1 1\n").unwrap_err();
        assert_eq!(
            e,
            ManifestError::Arity {
                line: 3,
                declared: 3,
                values: 8
            }
        );
    }

    #[test]
    fn geometry_errors() {
        assert!(matches!(
            parse_positive_manifest("a.png 1 0 0 -4 4"),
            Err(ManifestError::Negative { field: "width", .. })
        ));
        assert!(matches!(
            parse_positive_manifest("a.png 1 0 0 4.5 4"),
            Err(ManifestError::NotInteger { .. })
        ));
        assert!(matches!(parse_positive_manifest("a.png"), Err(ManifestError::MissingCount { line: 1 })));
    }

    #[test]
    fn negatives_skip_comments() {
        let r = parse_negative_manifest("# bg\nneg/1.pgm\n\n  # more\nneg/2.pgm\nneg/3.pgm\n");
        let paths: Vec<&str> = r.iter().map(|n| n.image_path.as_str()).collect();
        assert_eq!(paths, ["neg/1.pgm", "neg/2.pgm", "neg/3.pgm"]);
        assert!(parse_negative_manifest("").is_empty());
    }

    #[test]
    fn missing_root() {
        assert!(validate_dataset(&[], &[], 20, 20, Path::new("/nonexistent/dataset/root")).is_err());
    }
}
