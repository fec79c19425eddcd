//! File formats: edge lists, biadjacency matrices, partition and phase-grid
//! CSVs, DOT export and JSON run records.
//!
//! All writers go through a temporary file in the destination directory that
//! is renamed into place, so readers never observe a half-written file.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analytic::{ObjectiveKind, Phase, PhaseGrid};
use crate::graph::{BipartiteGraph, GraphError, Side};
use crate::objective::{evaluate_qbg, DensityMode, ObjectiveError, Resolution};
use crate::optimizer::DetectionResult;
use crate::partition::{Partition, PartitionError};
use crate::sweep::{ResolutionProfile, SweepConfig, Transition};

pub const SCHEMA_VERSION: &str = "1";

/// Absolute tolerance used when re-validating stored objective values.
pub const VALIDATION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: {source}")]
    Edge {
        line: u64,
        #[source]
        source: GraphError,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedMatrix { line: u64, expected: usize, found: usize },
    #[error("line {line}, column {column}: negative entry {value}")]
    NegativeEntry { line: u64, column: usize, value: f64 },
    #[error("unknown node label {0:?}")]
    UnknownLabel(String),
    #[error("node {0:?} has no community assignment")]
    MissingLabel(String),
    #[error("unsupported schema version {0:?}")]
    Schema(String),
    #[error("chi = {chi}: stored objective {stored} but the partition scores {recomputed}")]
    Validation { chi: f64, stored: f64, recomputed: f64 },
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(e: csv::Error) -> IoError {
    let line = e.position().map_or(0, |p| p.line());
    IoError::Parse {
        line,
        message: e.to_string(),
    }
}

/// Replaces `path` with `contents` via a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), IoError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(contents).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| IoError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

/// Hex SHA-256 of a file's bytes.
pub fn file_sha256(path: &Path) -> Result<String, IoError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// A graph together with the external names of its nodes.
#[derive(Debug, Clone)]
pub struct LabeledGraph {
    pub graph: BipartiteGraph,
    pub red_labels: Vec<String>,
    pub blue_labels: Vec<String>,
}

impl LabeledGraph {
    /// Names reds `r0, r1, …` and blues `b0, b1, …`.
    pub fn with_default_labels(graph: BipartiteGraph) -> Self {
        let red_labels = (0..graph.red_count()).map(|i| format!("r{i}")).collect();
        let blue_labels = (0..graph.blue_count()).map(|j| format!("b{j}")).collect();
        Self {
            graph,
            red_labels,
            blue_labels,
        }
    }

    /// Label of a flat node index.
    pub fn label(&self, node: usize) -> &str {
        match self.graph.split_index(node) {
            (Side::Red, i) => &self.red_labels[i],
            (Side::Blue, j) => &self.blue_labels[j],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delimiter {
    Tab,
    Comma,
    /// Runs of spaces or tabs.
    Whitespace,
}

impl Delimiter {
    /// Tab if the line has one, else comma if it has one, else whitespace.
    pub fn detect(line: &str) -> Self {
        if line.contains('\t') {
            Delimiter::Tab
        } else if line.contains(',') {
            Delimiter::Comma
        } else {
            Delimiter::Whitespace
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeaderMode {
    /// The first row is a header when its third field is not a number.
    /// Two-column files are therefore read as headerless.
    #[default]
    Auto,
    Present,
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EdgeListOptions {
    /// `None` detects from the first non-comment line.
    pub delimiter: Option<Delimiter>,
    pub header: HeaderMode,
}

fn split_rows(text: &str, delimiter: Delimiter) -> Result<Vec<(u64, Vec<String>)>, IoError> {
    let mut rows = Vec::new();
    match delimiter {
        Delimiter::Whitespace => {
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                rows.push((i as u64 + 1, line.split_whitespace().map(str::to_owned).collect()));
            }
        }
        Delimiter::Tab | Delimiter::Comma => {
            let mut reader = csv::ReaderBuilder::new()
                .delimiter(if delimiter == Delimiter::Tab { b'\t' } else { b',' })
                .has_headers(false)
                .flexible(true)
                .comment(Some(b'#'))
                .trim(csv::Trim::All)
                .from_reader(text.as_bytes());
            for record in reader.records() {
                let record = record.map_err(csv_err)?;
                if record.iter().all(str::is_empty) {
                    continue;
                }
                let line = record.position().map_or(0, |p| p.line());
                rows.push((line, record.iter().map(str::to_owned).collect()));
            }
        }
    }
    Ok(rows)
}

fn intern(map: &mut HashMap<String, usize>, labels: &mut Vec<String>, label: &str) -> usize {
    if let Some(&i) = map.get(label) {
        return i;
    }
    let i = labels.len();
    map.insert(label.to_owned(), i);
    labels.push(label.to_owned());
    i
}

/// Parses an edge list from text. See [`read_edge_list`].
pub fn parse_edge_list(text: &str, options: EdgeListOptions) -> Result<LabeledGraph, IoError> {
    let delimiter = options.delimiter.unwrap_or_else(|| {
        text.lines()
            .map(str::trim)
            .find(|l| !l.is_empty() && !l.starts_with('#'))
            .map_or(Delimiter::Whitespace, Delimiter::detect)
    });
    let mut rows = split_rows(text, delimiter)?.into_iter().peekable();
    let skip_header = match options.header {
        HeaderMode::Present => true,
        HeaderMode::Absent => false,
        HeaderMode::Auto => rows
            .peek()
            .and_then(|(_, r)| r.get(2))
            .is_some_and(|w| w.parse::<f64>().is_err()),
    };
    if skip_header {
        rows.next();
    }

    let (mut red_map, mut blue_map) = (HashMap::new(), HashMap::new());
    let (mut red_labels, mut blue_labels) = (Vec::new(), Vec::new());
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for (line, row) in rows {
        if !(2..=3).contains(&row.len()) {
            return Err(IoError::Parse {
                line,
                message: format!("expected 2 or 3 fields, found {}", row.len()),
            });
        }
        let weight = match row.get(2) {
            Some(w) => w.parse::<f64>().map_err(|_| IoError::Parse {
                line,
                message: format!("weight {w:?} is not a number"),
            })?,
            None => 1.0,
        };
        let red = intern(&mut red_map, &mut red_labels, &row[0]);
        let blue = intern(&mut blue_map, &mut blue_labels, &row[1]);
        if !(weight.is_finite() && weight > 0.0) {
            return Err(IoError::Edge {
                line,
                source: GraphError::NonPositiveWeight { red, blue, weight },
            });
        }
        if !seen.insert((red, blue)) {
            return Err(IoError::Edge {
                line,
                source: GraphError::DuplicateEdge { red, blue },
            });
        }
        edges.push((red, blue, weight));
    }
    let graph = BipartiteGraph::new(red_labels.len(), blue_labels.len(), edges)?;
    Ok(LabeledGraph {
        graph,
        red_labels,
        blue_labels,
    })
}

/// Reads a `red, blue[, weight]` edge list.
///
/// Lines starting with `#` are comments. Labels are numbered per class in
/// order of first occurrence. A missing weight means 1.
pub fn read_edge_list(path: &Path, options: EdgeListOptions) -> Result<LabeledGraph, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_edge_list(&text, options)
}

/// Tab-separated `red, blue, weight` with a header row.
pub fn format_edge_list(labeled: &LabeledGraph) -> String {
    let mut out = String::from("red\tblue\tweight\n");
    for e in labeled.graph.edges() {
        let _ = writeln!(
            out,
            "{}\t{}\t{}",
            labeled.red_labels[e.red], labeled.blue_labels[e.blue], e.weight
        );
    }
    out
}

pub fn write_edge_list(path: &Path, labeled: &LabeledGraph) -> Result<(), IoError> {
    write_atomic(path, format_edge_list(labeled).as_bytes())
}

/// Parses a biadjacency matrix. See [`read_biadjacency`].
pub fn parse_biadjacency(text: &str) -> Result<LabeledGraph, IoError> {
    let delimiter = match text.lines().find(|l| !l.trim().is_empty()).map(Delimiter::detect) {
        Some(Delimiter::Tab) => Delimiter::Tab,
        _ => Delimiter::Comma,
    };
    let mut rows = split_rows(text, delimiter)?.into_iter();
    let Some((_, header)) = rows.next() else {
        return Ok(LabeledGraph::with_default_labels(BipartiteGraph::new(0, 0, [])?));
    };
    let blue_labels: Vec<String> = header[1..].to_vec();
    let expected = header.len();
    let mut red_labels = Vec::new();
    let mut edges = Vec::new();
    for (line, row) in rows {
        if row.len() != expected {
            return Err(IoError::RaggedMatrix {
                line,
                expected,
                found: row.len(),
            });
        }
        let red = red_labels.len();
        red_labels.push(row[0].clone());
        for (j, cell) in row[1..].iter().enumerate() {
            let value: f64 = cell.parse().ok().filter(|v: &f64| !v.is_nan()).ok_or_else(|| IoError::Parse {
                line,
                message: format!("entry {cell:?} is not a number"),
            })?;
            if value < 0.0 {
                return Err(IoError::NegativeEntry {
                    line,
                    column: j + 2,
                    value,
                });
            }
            if !value.is_finite() {
                return Err(IoError::Parse {
                    line,
                    message: format!("entry {cell:?} is not finite"),
                });
            }
            if value > 0.0 {
                edges.push((red, j, value));
            }
        }
    }
    let graph = BipartiteGraph::new(red_labels.len(), blue_labels.len(), edges)?;
    Ok(LabeledGraph {
        graph,
        red_labels,
        blue_labels,
    })
}

/// Reads a dense matrix whose rows are red nodes and columns blue nodes.
///
/// The first row holds blue labels (after a corner cell) and the first column
/// red labels. Zero entries are absent edges, so all-zero rows and columns
/// survive as isolated nodes.
pub fn read_biadjacency(path: &Path) -> Result<LabeledGraph, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_biadjacency(&text)
}

pub fn format_biadjacency(labeled: &LabeledGraph) -> Result<String, IoError> {
    let g = &labeled.graph;
    let mut dense = vec![vec![0.0; g.blue_count()]; g.red_count()];
    for e in g.edges() {
        dense[e.red][e.blue] = e.weight;
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = std::iter::once("").chain(labeled.blue_labels.iter().map(String::as_str));
    w.write_record(header).map_err(csv_err)?;
    for (i, row) in dense.iter().enumerate() {
        let cells = std::iter::once(labeled.red_labels[i].clone()).chain(row.iter().map(|v| v.to_string()));
        w.write_record(cells).map_err(csv_err)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| csv_err(e.into_error().into()))?).expect("csv output is utf-8"))
}

pub fn write_biadjacency(path: &Path, labeled: &LabeledGraph) -> Result<(), IoError> {
    write_atomic(path, format_biadjacency(labeled)?.as_bytes())
}

/// Two-column `label,community` CSV, red nodes first.
pub fn format_partition_csv(labeled: &LabeledGraph, partition: &Partition) -> Result<String, IoError> {
    partition.check_covers(&labeled.graph)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["label", "community"]).map_err(csv_err)?;
    for node in 0..partition.len() {
        w.write_record([labeled.label(node), &partition.community_of(node).to_string()])
            .map_err(csv_err)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| csv_err(e.into_error().into()))?).expect("csv output is utf-8"))
}

pub fn write_partition_csv(path: &Path, labeled: &LabeledGraph, partition: &Partition) -> Result<(), IoError> {
    write_atomic(path, format_partition_csv(labeled, partition)?.as_bytes())
}

/// Parses a partition CSV against the labels of `labeled`.
///
/// Community ids may be any strings. A label that names both a red and a blue
/// node resolves to the red node on its first row and the blue node on its
/// second, matching the order [`format_partition_csv`] writes.
pub fn parse_partition_csv(text: &str, labeled: &LabeledGraph) -> Result<Partition, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let red_index: HashMap<&str, usize> = labeled
        .red_labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let blue_index: HashMap<&str, usize> = labeled
        .blue_labels
        .iter()
        .enumerate()
        .map(|(j, l)| (l.as_str(), j))
        .collect();
    let g = &labeled.graph;
    let mut assigned: Vec<Option<usize>> = vec![None; g.node_count()];
    let mut community_ids: HashMap<String, usize> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let (Some(label), Some(community)) = (record.get(0), record.get(1)) else {
            return Err(IoError::Parse {
                line,
                message: "expected label,community".into(),
            });
        };
        let red = red_index.get(label).map(|&i| g.flat_index(Side::Red, i));
        let blue = blue_index.get(label).map(|&j| g.flat_index(Side::Blue, j));
        let node = match (red, blue) {
            (Some(r), _) if assigned[r].is_none() => r,
            (_, Some(b)) if assigned[b].is_none() => b,
            (None, None) => return Err(IoError::UnknownLabel(label.to_owned())),
            _ => {
                return Err(IoError::Parse {
                    line,
                    message: format!("label {label:?} assigned more than once"),
                })
            }
        };
        let next = community_ids.len();
        assigned[node] = Some(*community_ids.entry(community.to_owned()).or_insert(next));
    }
    let labels = assigned
        .iter()
        .enumerate()
        .map(|(node, c)| c.ok_or_else(|| IoError::MissingLabel(labeled.label(node).to_owned())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Partition::from_labels(&labels))
}

pub fn read_partition_csv(path: &Path, labeled: &LabeledGraph) -> Result<Partition, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_partition_csv(&text, labeled)
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz document with one fill colour per community. Red nodes are boxes,
/// blue nodes ellipses.
pub fn format_dot(labeled: &LabeledGraph, partition: &Partition) -> Result<String, IoError> {
    partition.check_covers(&labeled.graph)?;
    let g = &labeled.graph;
    let mut out = String::from("graph communities {\n  node [style=filled];\n");
    for node in 0..g.node_count() {
        let c = partition.community_of(node);
        // golden-angle hue steps keep neighbouring ids apart
        let hue = (c as f64 * 0.618_033_988_75).fract();
        let (side, _) = g.split_index(node);
        let shape = if side == Side::Red { "box" } else { "ellipse" };
        let _ = writeln!(
            out,
            "  n{node} [label={}, shape={shape}, fillcolor=\"{hue:.3} 0.45 0.95\", community={c}];",
            dot_quote(labeled.label(node))
        );
    }
    for e in g.edges() {
        let _ = writeln!(
            out,
            "  n{} -- n{} [weight={}];",
            g.flat_index(Side::Red, e.red),
            g.flat_index(Side::Blue, e.blue),
            e.weight
        );
    }
    out.push_str("}\n");
    Ok(out)
}

pub fn write_dot(path: &Path, labeled: &LabeledGraph, partition: &Partition) -> Result<(), IoError> {
    write_atomic(path, format_dot(labeled, partition)?.as_bytes())
}

/// `p,d,phase` rows, `p` varying slowest.
pub fn format_phase_grid(grid: &PhaseGrid) -> String {
    let mut out = String::from("p,d,phase\n");
    for (p, d, phase) in grid.cells() {
        let _ = writeln!(out, "{p},{d},{}", phase.symbol());
    }
    out
}

pub fn write_phase_grid(path: &Path, grid: &PhaseGrid) -> Result<(), IoError> {
    write_atomic(path, format_phase_grid(grid).as_bytes())
}

/// Rebuilds a grid from its CSV. The CSV carries only the cells, so the
/// objective and parameters are supplied by the caller.
pub fn parse_phase_grid(text: &str, objective: ObjectiveKind, chi: f64, t: f64) -> Result<PhaseGrid, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut p_axis: Vec<f64> = Vec::new();
    let mut d_axis: Vec<f64> = Vec::new();
    let mut labels: Vec<Vec<Phase>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |pos| pos.line());
        let bad = |message: String| IoError::Parse { line, message };
        if record.len() != 3 {
            return Err(bad(format!("expected 3 fields, found {}", record.len())));
        }
        let p: f64 = record[0].parse().map_err(|_| bad(format!("p {:?} is not a number", &record[0])))?;
        let d: f64 = record[1].parse().map_err(|_| bad(format!("d {:?} is not a number", &record[1])))?;
        let phase = match &record[2] {
            "M" => Phase::Merged,
            "S" => Phase::Split,
            other => return Err(bad(format!("phase {other:?} is neither M nor S"))),
        };
        if p_axis.last() != Some(&p) {
            p_axis.push(p);
            labels.push(Vec::new());
        }
        let row = labels.last_mut().expect("row pushed above");
        if p_axis.len() == 1 {
            d_axis.push(d);
        } else if d_axis.get(row.len()) != Some(&d) {
            return Err(bad("rows do not form a rectangular p x d grid".into()));
        }
        row.push(phase);
    }
    if labels.iter().any(|r| r.len() != d_axis.len()) {
        return Err(IoError::Parse {
            line: 0,
            message: "rows do not form a rectangular p x d grid".into(),
        });
    }
    Ok(PhaseGrid {
        objective,
        chi,
        t,
        p_axis,
        d_axis,
        labels,
    })
}

pub fn read_phase_grid(path: &Path, objective: ObjectiveKind, chi: f64, t: f64) -> Result<PhaseGrid, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_phase_grid(&text, objective, chi, t)
}

/// `chi,communities,objective` rows; failed grid points leave the last two
/// fields empty.
pub fn format_counts_csv(profile: &ResolutionProfile) -> String {
    let mut out = String::from("chi,communities,objective\n");
    for point in &profile.points {
        match &point.result {
            Some(r) => {
                let _ = writeln!(out, "{},{},{}", point.chi, r.num_communities(), r.objective.total);
            }
            None => {
                let _ = writeln!(out, "{},,", point.chi);
            }
        }
    }
    out
}

pub fn write_counts_csv(path: &Path, profile: &ResolutionProfile) -> Result<(), IoError> {
    write_atomic(path, format_counts_csv(profile).as_bytes())
}

/// Where a run's graph came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputDescriptor {
    File { path: String, sha256: String },
    Generator {
        name: String,
        spec: serde_json::Value,
        seed: Option<u64>,
    },
}

impl InputDescriptor {
    pub fn from_file(path: &Path) -> Result<Self, IoError> {
        Ok(InputDescriptor::File {
            path: path.display().to_string(),
            sha256: file_sha256(path)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix_seconds: u64,
    pub elapsed_seconds: f64,
}

impl Timing {
    pub fn since(started: SystemTime) -> Self {
        Self {
            started_unix_seconds: started.duration_since(UNIX_EPOCH).unwrap_or(Duration::ZERO).as_secs(),
            elapsed_seconds: started.elapsed().unwrap_or(Duration::ZERO).as_secs_f64(),
        }
    }
}

/// Outcome at one resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordEntry {
    pub chi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub communities: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Partition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RecordEntry {
    fn from_result(chi: f64, result: &DetectionResult) -> Self {
        Self {
            chi,
            communities: Some(result.num_communities()),
            objective: Some(result.objective.total),
            partition: Some(result.partition.clone()),
            error: None,
        }
    }
}

/// A detection run or resolution sweep as written to disk.
///
/// Partitions are stored as flat assignment arrays, reds first, in the order
/// of `red_labels` then `blue_labels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: String,
    pub input: InputDescriptor,
    pub config: SweepConfig,
    pub density_mode: DensityMode,
    pub red_labels: Vec<String>,
    pub blue_labels: Vec<String>,
    pub results: Vec<RecordEntry>,
    #[serde(default)]
    pub transitions: Vec<Transition>,
    /// Absent in reproducible mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl RunRecord {
    pub fn from_detection(
        input: InputDescriptor,
        config: SweepConfig,
        labeled: &LabeledGraph,
        density_mode: DensityMode,
        result: &DetectionResult,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            input,
            config,
            density_mode,
            red_labels: labeled.red_labels.clone(),
            blue_labels: labeled.blue_labels.clone(),
            results: vec![RecordEntry::from_result(result.chi, result)],
            transitions: Vec::new(),
            timing: None,
        }
    }

    pub fn from_profile(
        input: InputDescriptor,
        config: SweepConfig,
        labeled: &LabeledGraph,
        profile: &ResolutionProfile,
    ) -> Self {
        let results = profile
            .points
            .iter()
            .map(|pt| match &pt.result {
                Some(r) => RecordEntry::from_result(pt.chi, r),
                None => RecordEntry {
                    chi: pt.chi,
                    communities: None,
                    objective: None,
                    partition: None,
                    error: pt.error.clone(),
                },
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION.into(),
            input,
            config,
            density_mode: profile.density_mode,
            red_labels: labeled.red_labels.clone(),
            blue_labels: labeled.blue_labels.clone(),
            results,
            transitions: profile.transitions.clone(),
            timing: None,
        }
    }

    /// Re-scores every stored partition on `graph` and checks it against the
    /// stored objective.
    pub fn validate(&self, graph: &BipartiteGraph) -> Result<(), IoError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(IoError::Schema(self.schema_version.clone()));
        }
        for entry in &self.results {
            let (Some(partition), Some(stored)) = (&entry.partition, entry.objective) else {
                continue;
            };
            let recomputed = evaluate_qbg(graph, partition, Resolution::new(entry.chi, self.density_mode))?.total;
            if (recomputed - stored).abs() > VALIDATION_TOLERANCE {
                return Err(IoError::Validation {
                    chi: entry.chi,
                    stored,
                    recomputed,
                });
            }
        }
        Ok(())
    }
}

pub fn format_record(record: &RunRecord) -> Result<String, IoError> {
    let mut s = serde_json::to_string_pretty(record)?;
    s.push('\n');
    Ok(s)
}

pub fn write_record(path: &Path, record: &RunRecord) -> Result<(), IoError> {
    write_atomic(path, format_record(record)?.as_bytes())
}

/// Reads a record and checks its schema version. Use
/// [`RunRecord::validate`] to check objectives against the graph.
pub fn read_record(path: &Path) -> Result<RunRecord, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let record: RunRecord = serde_json::from_str(&text)?;
    if record.schema_version != SCHEMA_VERSION {
        return Err(IoError::Schema(record.schema_version));
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::phase_grid;
    use crate::optimizer::{detect, OptimizerConfig};
    use crate::sweep::sweep_chi;

    fn labeled(text: &str) -> LabeledGraph {
        parse_edge_list(text, EdgeListOptions::default()).unwrap()
    }

    #[test]
    fn whitespace_edge_list() {
        let g = labeled("a x 1\na y 1\n").graph;
        assert_eq!((g.red_count(), g.blue_count()), (1, 2));
        assert_eq!(g.total_weight(), 2.0);
    }

    #[test]
    fn weight_column_sets_max_weight() {
        let g = labeled("a\tx\t2.5\nb\tx\t1\n").graph;
        assert_eq!(g.max_weight(), 2.5);
    }

    #[test]
    fn header_detected_from_weight_column() {
        let l = labeled("red,blue,weight\nu,v,3\n");
        assert_eq!(l.red_labels, vec!["u"]);
        assert_eq!(l.graph.total_weight(), 3.0);
    }

    #[test]
    fn explicit_header_on_two_columns() {
        let opts = EdgeListOptions {
            delimiter: None,
            header: HeaderMode::Present,
        };
        let l = parse_edge_list("woman,event\nann,e1\n", opts).unwrap();
        assert_eq!(l.red_labels, vec!["ann"]);
        assert_eq!(l.blue_labels, vec!["e1"]);
    }

    #[test]
    fn labels_in_first_occurrence_order() {
        let l = labeled("z q\na q\nz b\n");
        assert_eq!(l.red_labels, vec!["z", "a"]);
        assert_eq!(l.blue_labels, vec!["q", "b"]);
    }

    #[test]
    fn parse_errors_report_line() {
        let err = parse_edge_list("a x 1\n\na y oops\n", EdgeListOptions::default()).unwrap_err();
        assert!(matches!(err, IoError::Parse { line: 3, .. }), "{err}");
        let err = parse_edge_list("a x 1\na x 2\n", EdgeListOptions::default()).unwrap_err();
        assert!(
            matches!(
                err,
                IoError::Edge {
                    line: 2,
                    source: GraphError::DuplicateEdge { .. }
                }
            ),
            "{err}"
        );
        let err = parse_edge_list("a,x,0\n", EdgeListOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            IoError::Edge {
                source: GraphError::NonPositiveWeight { .. },
                ..
            }
        ));
    }

    #[test]
    fn biadjacency_basics() {
        let l = parse_biadjacency(",x,y\na,1,1\nb,1,1\n").unwrap();
        assert_eq!(l.graph.edge_count(), 4);
        let l = parse_biadjacency(",x,y\na,0,0\nb,1,2\n").unwrap();
        assert_eq!(l.graph.red_count(), 2);
        assert_eq!(l.graph.strength(0), 0.0);
        assert!(matches!(
            parse_biadjacency(",x,y\na,1\n"),
            Err(IoError::RaggedMatrix {
                line: 2,
                expected: 3,
                found: 2
            })
        ));
        assert!(matches!(
            parse_biadjacency(",x,y\na,1,-1\n"),
            Err(IoError::NegativeEntry { column: 3, .. })
        ));
    }

    #[test]
    fn biadjacency_round_trip() {
        let l = labeled("a x 1\na y 2.5\nb y 1\n");
        let back = parse_biadjacency(&format_biadjacency(&l).unwrap()).unwrap();
        assert_eq!(back.red_labels, l.red_labels);
        assert_eq!(back.blue_labels, l.blue_labels);
        assert_eq!(back.graph.edges(), l.graph.edges());
    }

    #[test]
    fn partition_csv_round_trip_with_shared_labels() {
        // "1" names both a red and a blue node
        let l = labeled("1 1\n1 2\n3 2\n");
        let p = Partition::from_labels(&[0, 1, 0, 1]);
        let text = format_partition_csv(&l, &p).unwrap();
        assert!(text.starts_with("label,community\n"));
        assert_eq!(parse_partition_csv(&text, &l).unwrap(), p);
    }

    #[test]
    fn partition_csv_errors() {
        let l = labeled("a x\n");
        assert!(matches!(
            parse_partition_csv("label,community\na,0\nq,1\n", &l),
            Err(IoError::UnknownLabel(_))
        ));
        assert!(matches!(
            parse_partition_csv("label,community\na,0\n", &l),
            Err(IoError::MissingLabel(ref s)) if s == "x"
        ));
    }

    #[test]
    fn dot_mentions_every_node_and_edge() {
        let l = labeled("a x\nb y\n");
        let dot = format_dot(&l, &Partition::from_labels(&[0, 1, 0, 1])).unwrap();
        assert_eq!(dot.matches("shape=").count(), 4);
        assert_eq!(dot.matches(" -- ").count(), 2);
        assert!(dot.contains("community=1"));
    }

    #[test]
    fn phase_grid_csv_shape_and_round_trip() {
        let grid = phase_grid(ObjectiveKind::Qbg, 1.0, 100.0, &[0.5, 1.0], &[0.1, 0.9]);
        let text = format_phase_grid(&grid);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "p,d,phase");
        assert_eq!(lines.len(), 5);
        assert_eq!(parse_phase_grid(&text, grid.objective, grid.chi, grid.t).unwrap(), grid);
    }

    #[test]
    fn record_round_trip_and_validation() {
        let l = labeled("a x\na y\nb x\nb y\nc z\n");
        let config = SweepConfig::default();
        let profile = sweep_chi(&l.graph, 0.0, 1.0, 3, &config).unwrap();
        let input = InputDescriptor::Generator {
            name: "test".into(),
            spec: serde_json::json!({}),
            seed: None,
        };
        let record = RunRecord::from_profile(input, config, &l, &profile);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        write_record(&path, &record).unwrap();
        let back = read_record(&path).unwrap();
        assert_eq!(back, record);
        back.validate(&l.graph).unwrap();

        let mut tampered = back.clone();
        *tampered.results[0].objective.as_mut().unwrap() += 1e-6;
        assert!(matches!(tampered.validate(&l.graph), Err(IoError::Validation { .. })));
    }

    #[test]
    fn empty_sweep_document() {
        let l = labeled("a x\n");
        let input = InputDescriptor::Generator {
            name: "empty".into(),
            spec: serde_json::Value::Null,
            seed: None,
        };
        let profile = ResolutionProfile {
            chi_grid: vec![],
            points: vec![],
            plateaus: vec![],
            transitions: vec![],
            density_mode: DensityMode::Unweighted,
        };
        let record = RunRecord::from_profile(input, SweepConfig::default(), &l, &profile);
        let text = format_record(&record).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["schema_version"], "1");
        assert_eq!(value["results"], serde_json::json!([]));
    }

    #[test]
    fn detection_record_has_no_timing_by_default() {
        let l = labeled("a x\nb y\n");
        let res = Resolution::for_graph(0.0, &l.graph);
        let result = detect(&l.graph, res, &OptimizerConfig::default()).unwrap();
        let input = InputDescriptor::Generator {
            name: "t".into(),
            spec: serde_json::Value::Null,
            seed: Some(1),
        };
        let record = RunRecord::from_detection(input, SweepConfig::default(), &l, res.density_mode, &result);
        assert!(!format_record(&record).unwrap().contains("timing"));
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
