//! Node features, labels, splits, and the on-disk dataset directory format.
//!
//! A dataset directory holds five UTF-8 files:
//!
//! | file          | contents                                                          |
//! |---------------|-------------------------------------------------------------------|
//! | `meta.json`   | `{"name", "num_nodes", "num_features", "num_classes"}`            |
//! | `edges.tsv`   | `src<TAB>dst` per line, 0-based ids, either orientation           |
//! | `features.tsv`| `num_nodes` lines of `num_features` tab-separated decimals        |
//! | `labels.tsv`  | `num_nodes` lines, one class id in `[0, num_classes)` or `-1`     |
//! | `split.tsv`   | `num_nodes` lines, one of `train`, `val`, `test`                  |
//!
//! `-1` in `labels.tsv` marks an unlabeled node; such nodes may not be in the
//! train split and are skipped by the metrics.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Dense row-major matrix with one row per node (or per class, for
/// prototypes).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature matrix".into()));
        }
        Ok(FeatureMatrix { rows, cols, values })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        FeatureMatrix {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    /// Copies the selected rows into a new matrix.
    pub fn select_rows(&self, idx: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            values.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            rows: idx.len(),
            cols: self.cols,
            values,
        }
    }

    pub fn scaled(&self, s: f64) -> FeatureMatrix {
        FeatureMatrix {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }
}

/// Class assignment per node. `None` marks an unlabeled node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    num_classes: usize,
    y: Vec<Option<usize>>,
}

impl Labels {
    pub fn new(num_classes: usize, y: Vec<Option<usize>>) -> Result<Self> {
        if let Some((i, c)) = y
            .iter()
            .enumerate()
            .find_map(|(i, c)| c.filter(|&c| c >= num_classes).map(|c| (i, c)))
        {
            return Err(Error::Dataset(format!(
                "class id {c} at node {i} is >= num_classes {num_classes}"
            )));
        }
        Ok(Labels { num_classes, y })
    }

    /// All nodes labeled.
    pub fn from_classes(num_classes: usize, y: &[usize]) -> Result<Self> {
        Self::new(num_classes, y.iter().map(|&c| Some(c)).collect())
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<usize> {
        self.y[i]
    }

    pub fn as_slice(&self) -> &[Option<usize>] {
        &self.y
    }

    /// Node ids per class among nodes where `mask` is set.
    pub fn members_by_class(&self, mask: &[bool]) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_classes];
        for (i, (&c, &m)) in self.y.iter().zip(mask).enumerate() {
            if let (Some(c), true) = (c, m) {
                out[c].push(i);
            }
        }
        out
    }

    /// Fails with `EmptyTrainingClass` if some class has no masked member.
    pub fn check_classes_covered(&self, mask: &[bool]) -> Result<()> {
        match self
            .members_by_class(mask)
            .iter()
            .position(|members| members.is_empty())
        {
            Some(c) => Err(Error::EmptyTrainingClass(c)),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Train,
    Val,
    Test,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Train => "train",
            Role::Val => "val",
            Role::Test => "test",
        }
    }
}

impl std::str::FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "train" => Ok(Role::Train),
            "val" => Ok(Role::Val),
            "test" => Ok(Role::Test),
            other => Err(format!("unknown split role {other:?}")),
        }
    }
}

/// Train/validation/test fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitFractions {
    pub const STANDARD: SplitFractions = SplitFractions {
        train: 0.6,
        val: 0.2,
        test: 0.2,
    };

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::Config("split fractions must lie in [0, 1]".into()));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config("split fractions must sum to 1".into()));
        }
        if self.train <= 0.0 {
            return Err(Error::Config("train fraction must be positive".into()));
        }
        Ok(())
    }
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self::STANDARD
    }
}

/// Role per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMasks {
    roles: Vec<Role>,
}

impl SplitMasks {
    pub fn new(roles: Vec<Role>) -> Self {
        SplitMasks { roles }
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    pub fn role(&self, i: usize) -> Role {
        self.roles[i]
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn mask(&self, role: Role) -> Vec<bool> {
        self.roles.iter().map(|&r| r == role).collect()
    }

    pub fn train_mask(&self) -> Vec<bool> {
        self.mask(Role::Train)
    }

    pub fn test_mask(&self) -> Vec<bool> {
        self.mask(Role::Test)
    }

    pub fn count(&self, role: Role) -> usize {
        self.roles.iter().filter(|&&r| r == role).count()
    }

    /// Per-class shuffled split. Every class with at least one labeled node
    /// gets at least one train node; unlabeled nodes go to test.
    pub fn stratified(labels: &Labels, fracs: SplitFractions, seed: u64) -> Result<Self> {
        fracs.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut roles = vec![Role::Test; labels.len()];
        let all = vec![true; labels.len()];
        for mut members in labels.members_by_class(&all) {
            if members.is_empty() {
                continue;
            }
            members.shuffle(&mut rng);
            let m = members.len();
            let n_train = ((fracs.train * m as f64).round() as usize).clamp(1, m);
            let n_val = ((fracs.val * m as f64).round() as usize).min(m - n_train);
            for (k, &i) in members.iter().enumerate() {
                roles[i] = if k < n_train {
                    Role::Train
                } else if k < n_train + n_val {
                    Role::Val
                } else {
                    Role::Test
                };
            }
        }
        Ok(SplitMasks { roles })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub graph: Graph,
    pub features: FeatureMatrix,
    pub labels: Labels,
    pub split: SplitMasks,
}

impl Dataset {
    /// Assembles and validates a dataset.
    pub fn new(
        name: impl Into<String>,
        graph: Graph,
        features: FeatureMatrix,
        labels: Labels,
        split: SplitMasks,
    ) -> Result<Self> {
        let ds = Dataset {
            name: name.into(),
            graph,
            features,
            labels,
            split,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }

    pub fn num_classes(&self) -> usize {
        self.labels.num_classes()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.graph.num_nodes();
        for (what, len) in [
            ("features", self.features.rows()),
            ("labels", self.labels.len()),
            ("split", self.split.len()),
        ] {
            if len != n {
                return Err(Error::Dataset(format!(
                    "{what} has {len} rows but the graph has {n} nodes"
                )));
            }
        }
        let train = self.split.train_mask();
        if let Some(i) = (0..n).find(|&i| train[i] && self.labels.get(i).is_none()) {
            return Err(Error::Dataset(format!("train node {i} is unlabeled")));
        }
        self.labels.check_classes_covered(&train)
    }

    /// Same dataset with a different split.
    pub fn with_split(&self, split: SplitMasks) -> Result<Dataset> {
        let mut ds = self.clone();
        ds.split = split;
        ds.validate()?;
        Ok(ds)
    }

    /// Fraction of edges (self-loops excluded) joining same-class labeled
    /// endpoints, over edges with both endpoints labeled.
    pub fn edge_homophily(&self) -> f64 {
        let (mut same, mut total) = (0usize, 0usize);
        for (u, v) in self.graph.edges().filter(|(u, v)| u != v) {
            if let (Some(a), Some(b)) = (self.labels.get(u), self.labels.get(v)) {
                total += 1;
                same += usize::from(a == b);
            }
        }
        if total == 0 {
            0.0
        } else {
            same as f64 / total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub name: String,
    pub num_nodes: usize,
    pub num_features: usize,
    pub num_classes: usize,
}

const FILES: [&str; 5] = ["meta.json", "edges.tsv", "features.tsv", "labels.tsv", "split.tsv"];

fn read(dir: &Path, file: &str) -> Result<String> {
    let path = dir.join(file);
    if !path.is_file() {
        return Err(Error::MissingFile(path));
    }
    fs::read_to_string(&path).map_err(|source| Error::Io { path, source })
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn parse_err(file: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_string(),
        line,
        msg: msg.into(),
    }
}

fn expect_rows(file: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Dataset(format!(
            "{file} has {got} rows but meta.json declares num_nodes = {want}"
        )));
    }
    Ok(())
}

/// Reads and validates a dataset directory.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<Dataset> {
    let dir = dir.as_ref();
    for f in FILES {
        if !dir.join(f).is_file() {
            return Err(Error::MissingFile(dir.join(f)));
        }
    }
    let meta: Meta = serde_json::from_str(&read(dir, "meta.json")?)
        .map_err(|e| parse_err("meta.json", e.line(), e.to_string()))?;
    let n = meta.num_nodes;

    let text = read(dir, "edges.tsv")?;
    let mut edges = Vec::new();
    for (line, l) in data_lines(&text) {
        let mut it = l.split_whitespace();
        let mut id = || -> Result<usize> {
            let tok = it
                .next()
                .ok_or_else(|| parse_err("edges.tsv", line, "expected two node ids"))?;
            tok.parse::<usize>()
                .map_err(|_| parse_err("edges.tsv", line, format!("bad node id {tok:?}")))
        };
        let (u, v) = (id()?, id()?);
        if it.next().is_some() {
            return Err(parse_err("edges.tsv", line, "expected two fields"));
        }
        edges.push((u, v));
    }
    let (graph, stats) = Graph::from_edges_with_stats(n, edges)?;
    if stats.duplicates_dropped > 0 {
        log::info!(
            "{}: dropped {} duplicate edge(s) while symmetrizing",
            dir.display(),
            stats.duplicates_dropped
        );
    }

    let text = read(dir, "features.tsv")?;
    let mut values = Vec::with_capacity(n * meta.num_features);
    let mut rows = 0;
    for (line, l) in data_lines(&text) {
        let before = values.len();
        for tok in l.split('\t') {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| parse_err("features.tsv", line, format!("bad decimal {tok:?}")))?;
            if !v.is_finite() {
                return Err(parse_err("features.tsv", line, "non-finite feature"));
            }
            values.push(v);
        }
        if values.len() - before != meta.num_features {
            return Err(parse_err(
                "features.tsv",
                line,
                format!(
                    "{} columns, meta.json declares num_features = {}",
                    values.len() - before,
                    meta.num_features
                ),
            ));
        }
        rows += 1;
    }
    expect_rows("features.tsv", rows, n)?;
    let features = FeatureMatrix::new(n, meta.num_features, values)?;

    let text = read(dir, "labels.tsv")?;
    let mut y = Vec::with_capacity(n);
    for (line, l) in data_lines(&text) {
        let c: i64 = l
            .trim()
            .parse()
            .map_err(|_| parse_err("labels.tsv", line, format!("bad class id {l:?}")))?;
        y.push(match c {
            -1 => None,
            c if c >= 0 && (c as usize) < meta.num_classes => Some(c as usize),
            c => {
                return Err(Error::Dataset(format!(
                    "labels.tsv line {line}: class id {c} outside [0, {})",
                    meta.num_classes
                )))
            }
        });
    }
    expect_rows("labels.tsv", y.len(), n)?;
    let labels = Labels::new(meta.num_classes, y)?;

    let text = read(dir, "split.tsv")?;
    let mut roles = Vec::with_capacity(n);
    for (line, l) in data_lines(&text) {
        roles.push(l.trim().parse::<Role>().map_err(|e| parse_err("split.tsv", line, e))?);
    }
    expect_rows("split.tsv", roles.len(), n)?;

    Dataset::new(meta.name, graph, features, labels, SplitMasks::new(roles))
}

/// Writes `ds` in the directory format read by [`load_dataset`], creating
/// the directory if needed. Output is a pure function of `ds`.
pub fn save_dataset(ds: &Dataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let write = |file: &str, contents: String| {
        let path = dir.join(file);
        fs::write(&path, contents).map_err(|source| Error::Io { path, source })
    };

    let meta = Meta {
        name: ds.name.clone(),
        num_nodes: ds.num_nodes(),
        num_features: ds.features.cols(),
        num_classes: ds.num_classes(),
    };
    let mut json = serde_json::to_string_pretty(&meta).expect("meta serializes");
    json.push('\n');
    write("meta.json", json)?;

    let mut s = String::new();
    for (u, v) in ds.graph.edges() {
        writeln!(s, "{u}\t{v}").unwrap();
    }
    write("edges.tsv", s)?;

    let mut s = String::new();
    for row in ds.features.iter_rows() {
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                s.push('\t');
            }
            // `{}` on f64 prints the shortest string that parses back exactly
            write!(s, "{v}").unwrap();
        }
        s.push('\n');
    }
    write("features.tsv", s)?;

    let mut s = String::new();
    for c in ds.labels.as_slice() {
        match c {
            Some(c) => writeln!(s, "{c}").unwrap(),
            None => s.push_str("-1\n"),
        }
    }
    write("labels.tsv", s)?;

    let mut s = String::new();
    for r in ds.split.roles() {
        writeln!(s, "{}", r.as_str()).unwrap();
    }
    write("split.tsv", s)
}
