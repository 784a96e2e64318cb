//! TSPLIB and clustered GTSP instance files.
//!
//! All distances are materialized into a dense `n × n` matrix when the
//! instance is loaded, so every edge lookup in the solver is a single index.
//! Node and cluster indices are zero-based inside the crate; the text formats
//! are one-based.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

/// Errors raised while reading or validating an instance.
#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported format: {0}")]
    Unsupported(String),
    /// `node` is one-based, as in the input file.
    #[error("partition error at node {node}: {msg}")]
    Partition { node: usize, msg: String },
    #[error("node index {index} out of range for {n} nodes")]
    OutOfRange { index: usize, n: usize },
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_err(line: usize, msg: impl Into<String>) -> InstanceError {
    InstanceError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Layout of an `EDGE_WEIGHT_SECTION`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    FullMatrix,
    UpperRow,
    LowerDiagRow,
    UpperDiagRow,
}

impl MatrixFormat {
    fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "FULL_MATRIX" => Some(Self::FullMatrix),
            "UPPER_ROW" => Some(Self::UpperRow),
            "LOWER_DIAG_ROW" => Some(Self::LowerDiagRow),
            "UPPER_DIAG_ROW" => Some(Self::UpperDiagRow),
            _ => None,
        }
    }

    fn entry_count(self, n: usize) -> usize {
        match self {
            Self::FullMatrix => n * n,
            Self::UpperRow => n * (n - 1) / 2,
            Self::LowerDiagRow | Self::UpperDiagRow => n * (n + 1) / 2,
        }
    }
}

/// How edge weights are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    Euc2d,
    Ceil2d,
    Geo,
    Att,
    Explicit(MatrixFormat),
}

impl WeightKind {
    pub fn keyword(self) -> &'static str {
        match self {
            Self::Euc2d => "EUC_2D",
            Self::Ceil2d => "CEIL_2D",
            Self::Geo => "GEO",
            Self::Att => "ATT",
            Self::Explicit(_) => "EXPLICIT",
        }
    }
}

/// Rounds to the nearest integer the way TSPLIB's `nint` does.
#[inline]
fn nint(x: f64) -> i64 {
    (x + 0.5) as i64
}

fn geo_radians(x: f64) -> f64 {
    // The reference implementation's truncated constant; distances depend on it.
    #[allow(clippy::approx_constant)]
    const PI: f64 = 3.141592;
    let deg = x.trunc();
    let min = x - deg;
    PI * (deg + 5.0 * min / 3.0) / 180.0
}

/// Distance between two coordinate pairs under a coordinate-based kind.
pub fn coord_distance(kind: WeightKind, a: (f64, f64), b: (f64, f64)) -> i64 {
    match kind {
        WeightKind::Euc2d => nint((a.0 - b.0).hypot(a.1 - b.1)),
        WeightKind::Ceil2d => (a.0 - b.0).hypot(a.1 - b.1).ceil() as i64,
        WeightKind::Att => {
            let (xd, yd) = (a.0 - b.0, a.1 - b.1);
            let r = ((xd * xd + yd * yd) / 10.0).sqrt();
            let t = nint(r);
            if (t as f64) < r {
                t + 1
            } else {
                t
            }
        }
        WeightKind::Geo => {
            const RRR: f64 = 6378.388;
            let (lat_a, lon_a) = (geo_radians(a.0), geo_radians(a.1));
            let (lat_b, lon_b) = (geo_radians(b.0), geo_radians(b.1));
            let q1 = (lon_a - lon_b).cos();
            let q2 = (lat_a - lat_b).cos();
            let q3 = (lat_a + lat_b).cos();
            (RRR * (0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3)).acos() + 1.0) as i64
        }
        WeightKind::Explicit(_) => panic!("explicit instances have no coordinate metric"),
    }
}

/// A set of nodes with a precomputed symmetric integer distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    name: String,
    kind: WeightKind,
    coords: Option<Vec<(f64, f64)>>,
    n: usize,
    dist: Vec<i64>,
}

impl NodeSet {
    /// Builds a node set from coordinates under a coordinate-based weight kind.
    pub fn from_coords(
        name: impl Into<String>,
        kind: WeightKind,
        coords: Vec<(f64, f64)>,
    ) -> Result<Self, InstanceError> {
        if matches!(kind, WeightKind::Explicit(_)) {
            return Err(InstanceError::Invalid(
                "explicit weight kind given with coordinates".into(),
            ));
        }
        let n = coords.len();
        if n == 0 {
            return Err(InstanceError::Invalid("instance has no nodes".into()));
        }
        let mut dist = vec![0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = coord_distance(kind, coords[i], coords[j]);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Ok(Self {
            name: name.into(),
            kind,
            coords: Some(coords),
            n,
            dist,
        })
    }

    /// Builds a node set from a full matrix. Diagonal entries are ignored.
    pub fn from_matrix(
        name: impl Into<String>,
        format: MatrixFormat,
        matrix: Vec<Vec<i64>>,
    ) -> Result<Self, InstanceError> {
        let n = matrix.len();
        if n == 0 {
            return Err(InstanceError::Invalid("instance has no nodes".into()));
        }
        let mut dist = vec![0; n * n];
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(InstanceError::Invalid(format!(
                    "matrix row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            for (j, &w) in row.iter().enumerate() {
                if i == j {
                    continue;
                }
                if w < 0 {
                    return Err(InstanceError::Invalid(format!(
                        "negative weight {w} between nodes {} and {}",
                        i + 1,
                        j + 1
                    )));
                }
                if matrix[j][i] != w {
                    return Err(InstanceError::Unsupported(format!(
                        "asymmetric weights between nodes {} and {}",
                        i + 1,
                        j + 1
                    )));
                }
                dist[i * n + j] = w;
            }
        }
        Ok(Self {
            name: name.into(),
            kind: WeightKind::Explicit(format),
            coords: None,
            n,
            dist,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Bounds-checked distance between nodes `i` and `j` (zero-based).
    pub fn distance(&self, i: usize, j: usize) -> Result<i64, InstanceError> {
        for index in [i, j] {
            if index >= self.n {
                return Err(InstanceError::OutOfRange { index, n: self.n });
            }
        }
        Ok(self.dist[i * self.n + j])
    }

    /// Unchecked-by-contract distance for inner loops; panics on bad indices.
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> i64 {
        self.dist[i * self.n + j]
    }

    /// The distance row of node `i`.
    #[inline]
    pub fn row(&self, i: usize) -> &[i64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }
}

/// A GTSP instance: a node set partitioned into clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct GtspInstance {
    name: String,
    nodes: NodeSet,
    members: Vec<Vec<usize>>,
    cluster_of: Vec<usize>,
    best_known: Option<i64>,
}

impl GtspInstance {
    /// Validates that `members` partitions the node set.
    ///
    /// Member lists are kept in the given order.
    pub fn new(
        name: impl Into<String>,
        nodes: NodeSet,
        members: Vec<Vec<usize>>,
    ) -> Result<Self, InstanceError> {
        let n = nodes.len();
        if members.is_empty() {
            return Err(InstanceError::Invalid("no clusters given".into()));
        }
        if members.len() > n {
            return Err(InstanceError::Invalid(format!(
                "{} clusters for {n} nodes",
                members.len()
            )));
        }
        let mut cluster_of = vec![usize::MAX; n];
        for (k, set) in members.iter().enumerate() {
            if set.is_empty() {
                return Err(InstanceError::Invalid(format!("cluster {} is empty", k + 1)));
            }
            for &v in set {
                if v >= n {
                    return Err(InstanceError::OutOfRange { index: v, n });
                }
                if cluster_of[v] != usize::MAX {
                    return Err(InstanceError::Partition {
                        node: v + 1,
                        msg: format!(
                            "listed in clusters {} and {}",
                            cluster_of[v] + 1,
                            k + 1
                        ),
                    });
                }
                cluster_of[v] = k;
            }
        }
        if let Some(v) = cluster_of.iter().position(|&k| k == usize::MAX) {
            return Err(InstanceError::Partition {
                node: v + 1,
                msg: "not listed in any cluster".into(),
            });
        }
        Ok(Self {
            name: name.into(),
            nodes,
            members,
            cluster_of,
            best_known: None,
        })
    }

    pub fn with_best_known(mut self, best_known: Option<i64>) -> Self {
        self.best_known = best_known;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    /// Number of nodes.
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// Number of clusters.
    pub fn m(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self, cluster: usize) -> &[usize] {
        &self.members[cluster]
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.members
    }

    pub fn cluster_of(&self, node: usize) -> usize {
        self.cluster_of[node]
    }

    pub fn best_known(&self) -> Option<i64> {
        self.best_known
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> i64 {
        self.nodes.dist(i, j)
    }
}

struct Cursor<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            lines: text.lines().collect(),
            pos: 0,
        }
    }

    /// One-based number of the line most recently returned.
    fn line_no(&self) -> usize {
        self.pos
    }

    fn next_line(&mut self) -> Option<&'a str> {
        let line = self.lines.get(self.pos).copied();
        if line.is_some() {
            self.pos += 1;
        }
        line
    }

    fn peek_is_keyword(&self) -> bool {
        self.lines
            .get(self.pos)
            .and_then(|l| l.trim_start().chars().next())
            .is_some_and(|c| c.is_ascii_alphabetic())
    }

    /// Reads `count` whitespace-separated numbers, crossing line breaks.
    fn numbers<T: std::str::FromStr>(&mut self, count: usize, what: &str) -> Result<Vec<T>, InstanceError> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            if self.peek_is_keyword() {
                return Err(parse_err(
                    self.line_no() + 1,
                    format!("{what}: expected {count} values, found {}", out.len()),
                ));
            }
            let Some(line) = self.next_line() else {
                return Err(parse_err(
                    self.line_no(),
                    format!("{what}: unexpected end of file after {} of {count} values", out.len()),
                ));
            };
            for tok in line.split_whitespace() {
                if out.len() == count {
                    return Err(parse_err(self.line_no(), format!("{what}: too many values")));
                }
                let v = tok
                    .parse()
                    .map_err(|_| parse_err(self.line_no(), format!("{what}: bad number '{tok}'")))?;
                out.push(v);
            }
        }
        Ok(out)
    }
}

#[derive(Default)]
struct RawDocument {
    header: HashMap<String, (String, usize)>,
    coords: Option<Vec<(f64, f64)>>,
    weights: Option<Vec<i64>>,
    sets: Option<Vec<Vec<usize>>>,
}

impl RawDocument {
    fn get(&self, key: &str) -> Option<&str> {
        self.header.get(key).map(|(v, _)| v.as_str())
    }

    fn dimension(&self) -> Result<usize, InstanceError> {
        let (v, line) = self
            .header
            .get("DIMENSION")
            .ok_or_else(|| parse_err(0, "missing DIMENSION"))?;
        match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(parse_err(*line, format!("bad DIMENSION '{v}'"))),
        }
    }
}

fn read_document(text: &str) -> Result<RawDocument, InstanceError> {
    let mut doc = RawDocument::default();
    let mut cur = Cursor::new(text);
    while let Some(raw) = cur.next_line() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let keyword = line
            .split(|c: char| c == ':' || c.is_whitespace())
            .next()
            .unwrap_or("");
        match keyword {
            "EOF" => break,
            "NODE_COORD_SECTION" => {
                let n = doc.dimension()?;
                let mut coords = vec![None; n];
                for _ in 0..n {
                    let row: Vec<f64> = loop {
                        if cur.peek_is_keyword() {
                            return Err(parse_err(
                                cur.line_no() + 1,
                                format!("NODE_COORD_SECTION: fewer than DIMENSION = {n} rows"),
                            ));
                        }
                        let Some(l) = cur.next_line() else {
                            return Err(parse_err(
                                cur.line_no(),
                                format!("NODE_COORD_SECTION: fewer than DIMENSION = {n} rows"),
                            ));
                        };
                        if l.trim().is_empty() {
                            continue;
                        }
                        let vals: Result<Vec<f64>, _> = l.split_whitespace().map(str::parse).collect();
                        match vals {
                            Ok(v) if v.len() == 3 => break v,
                            _ => {
                                return Err(parse_err(cur.line_no(), format!("bad coordinate row '{}'", l.trim())))
                            }
                        }
                    };
                    let id = row[0] as usize;
                    if row[0].fract() != 0.0 || id == 0 || id > n {
                        return Err(parse_err(cur.line_no(), format!("node id {} outside 1..={n}", row[0])));
                    }
                    if coords[id - 1].is_some() {
                        return Err(parse_err(cur.line_no(), format!("node {id} listed twice")));
                    }
                    coords[id - 1] = Some((row[1], row[2]));
                }
                if !cur.peek_is_keyword() && cur.lines[cur.pos..].iter().any(|l| !l.trim().is_empty()) {
                    let extra = cur.pos + cur.lines[cur.pos..].iter().position(|l| !l.trim().is_empty()).unwrap_or(0);
                    if cur.lines[extra].trim_start().chars().next().is_some_and(|c| c.is_ascii_digit()) {
                        return Err(parse_err(
                            extra + 1,
                            format!("NODE_COORD_SECTION: more than DIMENSION = {n} rows"),
                        ));
                    }
                }
                doc.coords = Some(coords.into_iter().map(Option::unwrap).collect());
            }
            "EDGE_WEIGHT_SECTION" => {
                let n = doc.dimension()?;
                let format = match doc.get("EDGE_WEIGHT_FORMAT") {
                    Some(f) => MatrixFormat::from_keyword(f)
                        .ok_or_else(|| InstanceError::Unsupported(format!("EDGE_WEIGHT_FORMAT {f}")))?,
                    None => return Err(parse_err(cur.line_no(), "EDGE_WEIGHT_SECTION without EDGE_WEIGHT_FORMAT")),
                };
                doc.weights = Some(cur.numbers(format.entry_count(n), "EDGE_WEIGHT_SECTION")?);
            }
            "DISPLAY_DATA_SECTION" => {
                let n = doc.dimension()?;
                for _ in 0..n {
                    if cur.peek_is_keyword() || cur.next_line().is_none() {
                        return Err(parse_err(cur.line_no(), "short DISPLAY_DATA_SECTION"));
                    }
                }
            }
            "GTSP_SET_SECTION" => {
                let (m_text, m_line) = doc
                    .header
                    .get("GTSP_SETS")
                    .cloned()
                    .ok_or_else(|| parse_err(cur.line_no(), "GTSP_SET_SECTION without GTSP_SETS"))?;
                let m: usize = m_text
                    .parse()
                    .map_err(|_| parse_err(m_line, format!("bad GTSP_SETS '{m_text}'")))?;
                doc.sets = Some(read_sets(&mut cur, m)?);
            }
            k if k.ends_with("_SECTION") => {
                return Err(InstanceError::Unsupported(k.to_string()));
            }
            _ => {
                let Some((k, v)) = line.split_once(':') else {
                    return Err(parse_err(cur.line_no(), format!("unrecognized line '{line}'")));
                };
                doc.header
                    .insert(k.trim().to_string(), (v.trim().to_string(), cur.line_no()));
            }
        }
    }
    Ok(doc)
}

fn read_sets(cur: &mut Cursor<'_>, m: usize) -> Result<Vec<Vec<usize>>, InstanceError> {
    let mut sets: Vec<Option<Vec<usize>>> = vec![None; m];
    let mut pending: Vec<i64> = Vec::new();
    let mut filled = 0;
    while filled < m {
        if cur.peek_is_keyword() {
            return Err(parse_err(cur.line_no() + 1, format!("GTSP_SET_SECTION: expected {m} sets, found {filled}")));
        }
        let Some(line) = cur.next_line() else {
            return Err(parse_err(cur.line_no(), format!("GTSP_SET_SECTION: expected {m} sets, found {filled}")));
        };
        for tok in line.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| parse_err(cur.line_no(), format!("bad set entry '{tok}'")))?;
            if v != -1 {
                pending.push(v);
                continue;
            }
            let Some((&id, nodes)) = pending.split_first() else {
                return Err(parse_err(cur.line_no(), "empty set line"));
            };
            if id < 1 || id as usize > m {
                return Err(parse_err(cur.line_no(), format!("set id {id} outside 1..={m}")));
            }
            if sets[id as usize - 1].is_some() {
                return Err(parse_err(cur.line_no(), format!("set {id} given twice")));
            }
            let mut list = Vec::with_capacity(nodes.len());
            for &v in nodes {
                if v < 1 {
                    return Err(parse_err(cur.line_no(), format!("bad node {v} in set {id}")));
                }
                list.push(v as usize - 1);
            }
            sets[id as usize - 1] = Some(list);
            pending.clear();
            filled += 1;
        }
        if filled == m && !pending.is_empty() {
            return Err(parse_err(cur.line_no(), "trailing entries after last set"));
        }
    }
    Ok(sets.into_iter().map(Option::unwrap).collect())
}

fn build_nodes(doc: &RawDocument) -> Result<NodeSet, InstanceError> {
    if let Some(t) = doc.get("TYPE") {
        let t = t.split_whitespace().next().unwrap_or("");
        if !matches!(t, "TSP" | "GTSP") {
            return Err(InstanceError::Unsupported(format!("TYPE {t}")));
        }
    }
    let name = doc.get("NAME").unwrap_or("unnamed").to_string();
    let n = doc.dimension()?;
    let kind_kw = doc
        .get("EDGE_WEIGHT_TYPE")
        .ok_or_else(|| parse_err(0, "missing EDGE_WEIGHT_TYPE"))?;
    let kind = match kind_kw {
        "EUC_2D" => WeightKind::Euc2d,
        "CEIL_2D" => WeightKind::Ceil2d,
        "GEO" => WeightKind::Geo,
        "ATT" => WeightKind::Att,
        "EXPLICIT" => {
            let f = doc
                .get("EDGE_WEIGHT_FORMAT")
                .ok_or_else(|| parse_err(0, "EXPLICIT weights without EDGE_WEIGHT_FORMAT"))?;
            WeightKind::Explicit(
                MatrixFormat::from_keyword(f)
                    .ok_or_else(|| InstanceError::Unsupported(format!("EDGE_WEIGHT_FORMAT {f}")))?,
            )
        }
        other => return Err(InstanceError::Unsupported(format!("EDGE_WEIGHT_TYPE {other}"))),
    };
    match kind {
        WeightKind::Explicit(format) => {
            let w = doc
                .weights
                .as_ref()
                .ok_or_else(|| parse_err(0, "EXPLICIT weights without EDGE_WEIGHT_SECTION"))?;
            NodeSet::from_matrix(name, format, expand_matrix(format, n, w))
        }
        _ => {
            let coords = doc
                .coords
                .clone()
                .ok_or_else(|| parse_err(0, "missing NODE_COORD_SECTION"))?;
            NodeSet::from_coords(name, kind, coords)
        }
    }
}

fn expand_matrix(format: MatrixFormat, n: usize, w: &[i64]) -> Vec<Vec<i64>> {
    let mut m = vec![vec![0; n]; n];
    let mut it = w.iter().copied();
    let mut put = |i: usize, j: usize, v: i64| {
        m[i][j] = v;
        m[j][i] = v;
    };
    match format {
        MatrixFormat::FullMatrix => {
            let mut full = vec![vec![0; n]; n];
            for row in full.iter_mut() {
                for cell in row.iter_mut() {
                    *cell = it.next().unwrap();
                }
            }
            return full;
        }
        MatrixFormat::UpperRow => {
            for i in 0..n {
                for j in (i + 1)..n {
                    put(i, j, it.next().unwrap());
                }
            }
        }
        MatrixFormat::LowerDiagRow => {
            for i in 0..n {
                for j in 0..=i {
                    put(i, j, it.next().unwrap());
                }
            }
        }
        MatrixFormat::UpperDiagRow => {
            for i in 0..n {
                for j in i..n {
                    put(i, j, it.next().unwrap());
                }
            }
        }
    }
    m
}

/// Parses a TSPLIB `.tsp` file.
pub fn parse_tsplib(text: &str) -> Result<NodeSet, InstanceError> {
    build_nodes(&read_document(text)?)
}

/// Parses a clustered GTSP file: a TSPLIB body plus `GTSP_SETS` and
/// `GTSP_SET_SECTION`.
pub fn parse_gtsp(text: &str) -> Result<GtspInstance, InstanceError> {
    let doc = read_document(text)?;
    let nodes = build_nodes(&doc)?;
    let sets = doc
        .sets
        .ok_or_else(|| parse_err(0, "missing GTSP_SET_SECTION"))?;
    for (k, set) in sets.iter().enumerate() {
        if let Some(&v) = set.iter().find(|&&v| v >= nodes.len()) {
            return Err(InstanceError::Partition {
                node: v + 1,
                msg: format!("set {} names a node outside 1..={}", k + 1, nodes.len()),
            });
        }
    }
    let name = nodes.name().to_string();
    GtspInstance::new(name, nodes, sets)
}

/// Serializes an instance to the clustered GTSP format.
///
/// Coordinate instances keep their weight kind; explicit instances are
/// written as a `FULL_MATRIX`.
pub fn write_gtsp(inst: &GtspInstance) -> String {
    let nodes = inst.nodes();
    let n = nodes.len();
    let mut out = String::new();
    writeln!(out, "NAME: {}", inst.name()).unwrap();
    writeln!(out, "TYPE: GTSP").unwrap();
    writeln!(out, "DIMENSION: {n}").unwrap();
    writeln!(out, "GTSP_SETS: {}", inst.m()).unwrap();
    writeln!(out, "EDGE_WEIGHT_TYPE: {}", nodes.kind().keyword()).unwrap();
    match nodes.coords() {
        Some(coords) => {
            writeln!(out, "NODE_COORD_SECTION").unwrap();
            for (i, (x, y)) in coords.iter().enumerate() {
                writeln!(out, "{} {x:?} {y:?}", i + 1).unwrap();
            }
        }
        None => {
            writeln!(out, "EDGE_WEIGHT_FORMAT: FULL_MATRIX").unwrap();
            writeln!(out, "EDGE_WEIGHT_SECTION").unwrap();
            for i in 0..n {
                let row: Vec<String> = nodes.row(i).iter().map(i64::to_string).collect();
                writeln!(out, "{}", row.join(" ")).unwrap();
            }
        }
    }
    writeln!(out, "GTSP_SET_SECTION").unwrap();
    for (k, set) in inst.clusters().iter().enumerate() {
        write!(out, "{}", k + 1).unwrap();
        for v in set {
            write!(out, " {}", v + 1).unwrap();
        }
        writeln!(out, " -1").unwrap();
    }
    writeln!(out, "EOF").unwrap();
    out
}

/// Parses a best-known sidecar: one `instance_name best_cost` pair per line.
/// Blank lines and `#` comments are skipped.
pub fn parse_best_known(text: &str) -> Result<HashMap<String, i64>, InstanceError> {
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(cost), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_err(i + 1, format!("expected 'name cost', got '{line}'")));
        };
        let cost: i64 = cost
            .replace(',', "")
            .parse()
            .map_err(|_| parse_err(i + 1, format!("bad cost '{cost}'")))?;
        if cost <= 0 {
            return Err(parse_err(i + 1, format!("best cost must be positive, got {cost}")));
        }
        map.insert(name.to_string(), cost);
    }
    Ok(map)
}

pub fn read_best_known(path: impl AsRef<Path>) -> Result<HashMap<String, i64>, InstanceError> {
    parse_best_known(&std::fs::read_to_string(path)?)
}
