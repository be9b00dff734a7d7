//! Undirected interaction graphs: generators for the experiment topologies,
//! Laplacians, connectivity, spectra and an edge-list text format.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{jacobi_eigenvalues, Matrix};

/// Resampling cap for random models that must come out connected.
pub const CONNECT_RETRIES: usize = 1000;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("bad topology parameters: {0}")]
    BadParameters(String),
    #[error("graph still disconnected after {0} attempts")]
    DisconnectedAfterRetries(usize),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("invalid edge ({0}, {1})")]
    InvalidEdge(usize, usize),
    #[error("edge list line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Simple undirected graph on nodes `0..n`, stored as sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl Graph {
    /// Builds a graph from unordered pairs. Self-loops, repeated pairs and
    /// out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, TopologyError> {
        let mut set = BTreeSet::new();
        for &(i, j) in edges {
            if i == j || i >= n || j >= n || !set.insert((i.min(j), i.max(j))) {
                return Err(TopologyError::InvalidEdge(i, j));
            }
        }
        Ok(Self::from_edge_set(n, &set))
    }

    fn from_edge_set(n: usize, set: &BTreeSet<(usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(i, j) in set {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::with_capacity(2 * set.len());
        offsets.push(0);
        for mut list in adj {
            list.sort_unstable();
            neighbors.extend(list);
            offsets.push(neighbors.len());
        }
        Self { n, offsets, neighbors }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_edge_set(n, &BTreeSet::new())
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Start of node `i`'s slot range in edge-aligned arrays such as [`Self::adjacency_slots`].
    pub fn slot_range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    /// Total number of directed adjacency slots (twice the edge count).
    pub fn adjacency_slots(&self) -> usize {
        self.neighbors.len()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.degree(i)).collect()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&j).is_ok()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| self.neighbors(i).iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
            .collect()
    }

    pub fn adjacency(&self) -> Matrix {
        let mut g = Matrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for &j in self.neighbors(i) {
                g[(i, j)] = 1.0;
            }
        }
        g
    }

    pub fn laplacian(&self) -> Matrix {
        laplacian(self)
    }

    pub fn max_degree(&self) -> usize {
        max_degree(self)
    }

    pub fn is_connected(&self) -> bool {
        is_connected(self)
    }

    /// Number of connected components.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut count = 0;
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(i) = queue.pop_front() {
                for &j in self.neighbors(i) {
                    if !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        count
    }

    /// Writes the edge list: a header `n m` followed by one `i j` line per edge.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.n, self.edge_count())?;
        for (i, j) in self.edges() {
            writeln!(out, "{i} {j}")?;
        }
        Ok(())
    }

    pub fn to_edge_list(&self) -> String {
        let mut buf = Vec::new();
        self.write_edge_list(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("edge list is ascii")
    }

    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self, TopologyError> {
        let mut lines = input
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l))
            .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let (line, header) = lines.next().ok_or(TopologyError::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let (n, m) = parse_pair(&header?, line)?;
        let mut edges = Vec::with_capacity(m);
        for (line, text) in lines {
            let (i, j) = parse_pair(&text?, line)?;
            edges.push((i, j));
        }
        if edges.len() != m {
            return Err(TopologyError::Parse {
                line: 1,
                msg: format!("header declares {m} edges, found {}", edges.len()),
            });
        }
        Self::from_edges(n, &edges)
    }

    pub fn from_edge_list_str(s: &str) -> Result<Self, TopologyError> {
        Self::read_edge_list(s.as_bytes())
    }
}

fn parse_pair(text: &str, line: usize) -> Result<(usize, usize), TopologyError> {
    let bad = |msg: &str| TopologyError::Parse {
        line,
        msg: msg.to_string(),
    };
    let mut it = text.split_whitespace();
    let a = it.next().ok_or_else(|| bad("expected two integers"))?;
    let b = it.next().ok_or_else(|| bad("expected two integers"))?;
    if it.next().is_some() {
        return Err(bad("trailing tokens"));
    }
    let a = a.parse().map_err(|_| bad("not a non-negative integer"))?;
    let b = b.parse().map_err(|_| bad("not a non-negative integer"))?;
    Ok((a, b))
}

/// `L = D - G`.
pub fn laplacian(g: &Graph) -> Matrix {
    let mut l = Matrix::zeros(g.n, g.n);
    for i in 0..g.n {
        l[(i, i)] = g.degree(i) as f64;
        for &j in g.neighbors(i) {
            l[(i, j)] = -1.0;
        }
    }
    l
}

pub fn max_degree(g: &Graph) -> usize {
    (0..g.n).map(|i| g.degree(i)).max().unwrap_or(0)
}

/// Breadth-first reachability from node 0. The empty graph counts as connected.
pub fn is_connected(g: &Graph) -> bool {
    g.n == 0 || g.component_count() == 1
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn spectrum(m: &Matrix) -> Result<Vec<f64>, TopologyError> {
    if !m.is_symmetric(1e-12) {
        return Err(TopologyError::NotSymmetric);
    }
    Ok(jacobi_eigenvalues(m))
}

/// The graph families used in the experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TopologyKind {
    Grid { rows: usize, cols: usize },
    Star { n: usize },
    ErdosRenyi { n: usize, p: f64 },
    PreferentialAttachment { n: usize, m_new: usize },
    WattsStrogatz { rows: usize, cols: usize, rewire_p: f64 },
}

impl TopologyKind {
    pub fn node_count(&self) -> usize {
        match *self {
            TopologyKind::Grid { rows, cols } | TopologyKind::WattsStrogatz { rows, cols, .. } => rows * cols,
            TopologyKind::Star { n }
            | TopologyKind::ErdosRenyi { n, .. }
            | TopologyKind::PreferentialAttachment { n, .. } => n,
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(
            self,
            TopologyKind::ErdosRenyi { .. }
                | TopologyKind::PreferentialAttachment { .. }
                | TopologyKind::WattsStrogatz { .. }
        )
    }

    pub fn validate(&self) -> Result<(), TopologyError> {
        let bad = |s: &str| Err(TopologyError::BadParameters(s.to_string()));
        match *self {
            TopologyKind::Grid { rows, cols } if rows == 0 || cols == 0 => bad("grid dimensions must be positive"),
            TopologyKind::Star { n: 0 } => bad("star needs at least one node"),
            TopologyKind::ErdosRenyi { n, p } if n == 0 || !(0.0..=1.0).contains(&p) => {
                bad("erdos-renyi needs n > 0 and p in [0, 1]")
            }
            TopologyKind::PreferentialAttachment { n, m_new } if n == 0 || m_new == 0 => {
                bad("preferential attachment needs n > 0 and m_new > 0")
            }
            TopologyKind::WattsStrogatz { rows, cols, rewire_p }
                if rows == 0 || cols == 0 || !(0.0..=1.0).contains(&rewire_p) =>
            {
                bad("watts-strogatz needs positive dimensions and rewire_p in [0, 1]")
            }
            _ => Ok(()),
        }
    }

    /// Short label used in file names and sweep tables.
    pub fn label(&self) -> &'static str {
        match self {
            TopologyKind::Grid { .. } => "grid",
            TopologyKind::Star { .. } => "star",
            TopologyKind::ErdosRenyi { .. } => "erdos_renyi",
            TopologyKind::PreferentialAttachment { .. } => "pref_attach",
            TopologyKind::WattsStrogatz { .. } => "watts_strogatz",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TopologyKind::Grid { rows, cols } => write!(f, "grid {rows} {cols}"),
            TopologyKind::Star { n } => write!(f, "star {n}"),
            TopologyKind::ErdosRenyi { n, p } => write!(f, "erdos_renyi {n} {p:?}"),
            TopologyKind::PreferentialAttachment { n, m_new } => write!(f, "pref_attach {n} {m_new}"),
            TopologyKind::WattsStrogatz { rows, cols, rewire_p } => {
                write!(f, "watts_strogatz {rows} {cols} {rewire_p:?}")
            }
        }
    }
}

impl FromStr for TopologyKind {
    type Err = TopologyError;

    /// Parses the `Display` form, e.g. `grid 5 5` or `watts_strogatz 10 10 0.1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        let bad = || TopologyError::BadParameters(format!("cannot parse topology `{s}`"));
        let int = |k: usize| -> Result<usize, TopologyError> {
            toks.get(k).and_then(|t| t.parse().ok()).ok_or_else(bad)
        };
        let real = |k: usize| -> Result<f64, TopologyError> {
            toks.get(k).and_then(|t| t.parse().ok()).ok_or_else(bad)
        };
        let arity = |k: usize| if toks.len() == k { Ok(()) } else { Err(bad()) };
        let kind = match toks.first().copied() {
            Some("grid") => {
                arity(3)?;
                TopologyKind::Grid { rows: int(1)?, cols: int(2)? }
            }
            Some("star") => {
                arity(2)?;
                TopologyKind::Star { n: int(1)? }
            }
            Some("erdos_renyi") => {
                arity(3)?;
                TopologyKind::ErdosRenyi { n: int(1)?, p: real(2)? }
            }
            Some("pref_attach") => {
                arity(3)?;
                TopologyKind::PreferentialAttachment { n: int(1)?, m_new: int(2)? }
            }
            Some("watts_strogatz") => {
                arity(4)?;
                TopologyKind::WattsStrogatz {
                    rows: int(1)?,
                    cols: int(2)?,
                    rewire_p: real(3)?,
                }
            }
            _ => return Err(bad()),
        };
        kind.validate()?;
        Ok(kind)
    }
}

/// A topology family plus the seed that fixes a random instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologySpec {
    pub kind: TopologyKind,
    pub seed: u64,
}

impl TopologySpec {
    pub fn new(kind: TopologyKind, seed: u64) -> Self {
        Self { kind, seed }
    }

    pub fn generate(&self) -> Result<Graph, TopologyError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        generate(&self.kind, &mut rng)
    }
}

/// Generates a graph; random families are resampled until connected.
pub fn generate<R: Rng + ?Sized>(kind: &TopologyKind, rng: &mut R) -> Result<Graph, TopologyError> {
    generate_with(kind, rng, true)
}

pub fn generate_with<R: Rng + ?Sized>(
    kind: &TopologyKind,
    rng: &mut R,
    require_connected: bool,
) -> Result<Graph, TopologyError> {
    kind.validate()?;
    let attempts = if require_connected && kind.is_random() {
        CONNECT_RETRIES
    } else {
        1
    };
    for _ in 0..attempts {
        let g = generate_once(kind, rng);
        if !require_connected || !kind.is_random() || g.is_connected() {
            return Ok(g);
        }
    }
    Err(TopologyError::DisconnectedAfterRetries(CONNECT_RETRIES))
}

fn generate_once<R: Rng + ?Sized>(kind: &TopologyKind, rng: &mut R) -> Graph {
    match *kind {
        TopologyKind::Grid { rows, cols } => Graph::from_edge_set(rows * cols, &grid_edges(rows, cols)),
        TopologyKind::Star { n } => {
            let set = (1..n).map(|j| (0, j)).collect();
            Graph::from_edge_set(n, &set)
        }
        TopologyKind::ErdosRenyi { n, p } => {
            let mut set = BTreeSet::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.random_bool(p) {
                        set.insert((i, j));
                    }
                }
            }
            Graph::from_edge_set(n, &set)
        }
        TopologyKind::PreferentialAttachment { n, m_new } => preferential_attachment(n, m_new, rng),
        TopologyKind::WattsStrogatz { rows, cols, rewire_p } => watts_strogatz(rows, cols, rewire_p, rng),
    }
}

fn grid_edges(rows: usize, cols: usize) -> BTreeSet<(usize, usize)> {
    let mut set = BTreeSet::new();
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            if c + 1 < cols {
                set.insert((i, i + 1));
            }
            if r + 1 < rows {
                set.insert((i, i + cols));
            }
        }
    }
    set
}

// Seed clique of max(m_new, 2) vertices (a triangle for the usual m_new = 3);
// each later vertex links to m_new distinct earlier vertices drawn with
// probability proportional to degree, without replacement.
fn preferential_attachment<R: Rng + ?Sized>(n: usize, m_new: usize, rng: &mut R) -> Graph {
    let core = m_new.max(2).min(n);
    let mut set = BTreeSet::new();
    let mut degree = vec![0usize; n];
    for i in 0..core {
        for j in i + 1..core {
            set.insert((i, j));
            degree[i] += 1;
            degree[j] += 1;
        }
    }
    for v in core..n {
        let mut chosen: Vec<usize> = Vec::with_capacity(m_new);
        let take = m_new.min(v);
        while chosen.len() < take {
            let total: usize = (0..v).filter(|u| !chosen.contains(u)).map(|u| degree[u]).sum();
            let pick = if total == 0 {
                let free: Vec<usize> = (0..v).filter(|u| !chosen.contains(u)).collect();
                *free.choose(rng).expect("at least one free vertex")
            } else {
                let mut r = rng.random_range(0..total);
                let mut pick = 0;
                for u in (0..v).filter(|u| !chosen.contains(u)) {
                    if r < degree[u] {
                        pick = u;
                        break;
                    }
                    r -= degree[u];
                }
                pick
            };
            chosen.push(pick);
        }
        for &u in &chosen {
            set.insert((u, v));
            degree[u] += 1;
            degree[v] += 1;
        }
    }
    Graph::from_edge_set(n, &set)
}

// Bounded (non-toroidal) grid; each edge in lexicographic order is rewired
// with probability `p` by moving its second endpoint to a uniformly chosen
// vertex that is neither the first endpoint nor already adjacent to it.
fn watts_strogatz<R: Rng + ?Sized>(rows: usize, cols: usize, p: f64, rng: &mut R) -> Graph {
    let n = rows * cols;
    let original: Vec<(usize, usize)> = grid_edges(rows, cols).into_iter().collect();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for &(i, j) in &original {
        adj[i].insert(j);
        adj[j].insert(i);
    }
    for &(i, j) in &original {
        if !rng.random_bool(p) {
            continue;
        }
        // the edge may already have been consumed by an earlier rewiring
        if !adj[i].contains(&j) || adj[i].len() + 1 >= n {
            continue;
        }
        let k = loop {
            let k = rng.random_range(0..n);
            if k != i && !adj[i].contains(&k) {
                break k;
            }
        };
        adj[i].remove(&j);
        adj[j].remove(&i);
        adj[i].insert(k);
        adj[k].insert(i);
    }
    let set = (0..n)
        .flat_map(|i| adj[i].iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
        .collect();
    Graph::from_edge_set(n, &set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_star_shapes() {
        let g = TopologySpec::new(TopologyKind::Grid { rows: 5, cols: 5 }, 0).generate().unwrap();
        assert_eq!(g.node_count(), 25);
        assert_eq!(g.edge_count(), 40);
        assert_eq!(max_degree(&g), 4);
        assert!(is_connected(&g));

        let s = TopologySpec::new(TopologyKind::Star { n: 100 }, 0).generate().unwrap();
        assert_eq!(s.edge_count(), 99);
        assert_eq!(s.degree(0), 99);
        assert!((1..100).all(|i| s.degree(i) == 1));
        assert_eq!(max_degree(&s), 99);
        let s4 = TopologySpec::new(TopologyKind::Star { n: 4 }, 0).generate().unwrap();
        assert!(s4.is_connected());
    }

    #[test]
    fn complete_erdos_renyi() {
        let g = TopologySpec::new(TopologyKind::ErdosRenyi { n: 100, p: 1.0 }, 9)
            .generate()
            .unwrap();
        assert_eq!(g.edge_count(), 4950);
    }

    #[test]
    fn degenerate_graphs() {
        let single = Graph::empty(1);
        assert_eq!(max_degree(&single), 0);
        assert!(single.is_connected());
        assert!(!Graph::empty(2).is_connected());
        assert_eq!(laplacian(&Graph::empty(3)), Matrix::zeros(3, 3));
    }

    #[test]
    fn path_laplacian() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(laplacian(&g).as_slice(), &[1.0, -1.0, -1.0, 1.0]);
        let eig = spectrum(&laplacian(&g)).unwrap();
        assert!(eig[0].abs() < 1e-12 && (eig[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_rejects_asymmetric() {
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert!(matches!(spectrum(&m), Err(TopologyError::NotSymmetric)));
    }

    #[test]
    fn from_edges_validation() {
        assert!(Graph::from_edges(3, &[(0, 0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 3)]).is_err());
    }

    #[test]
    fn bad_parameters() {
        for kind in [
            TopologyKind::Grid { rows: 0, cols: 3 },
            TopologyKind::Star { n: 0 },
            TopologyKind::ErdosRenyi { n: 10, p: 1.5 },
            TopologyKind::WattsStrogatz { rows: 3, cols: 3, rewire_p: -0.1 },
        ] {
            assert!(matches!(
                TopologySpec::new(kind, 0).generate(),
                Err(TopologyError::BadParameters(_))
            ));
        }
    }

    #[test]
    fn sparse_erdos_renyi_gives_up() {
        let r = TopologySpec::new(TopologyKind::ErdosRenyi { n: 50, p: 0.0 }, 1).generate();
        assert!(matches!(r, Err(TopologyError::DisconnectedAfterRetries(CONNECT_RETRIES))));
    }

    #[test]
    fn kind_text_round_trip() {
        for kind in [
            TopologyKind::Grid { rows: 10, cols: 10 },
            TopologyKind::Star { n: 100 },
            TopologyKind::ErdosRenyi { n: 100, p: 0.6 },
            TopologyKind::PreferentialAttachment { n: 100, m_new: 3 },
            TopologyKind::WattsStrogatz { rows: 10, cols: 10, rewire_p: 0.1 },
        ] {
            assert_eq!(kind.to_string().parse::<TopologyKind>().unwrap(), kind);
        }
        assert!("grid 5".parse::<TopologyKind>().is_err());
        assert!("ring 5".parse::<TopologyKind>().is_err());
    }

    #[test]
    fn edge_list_parse_errors() {
        assert!(matches!(
            Graph::from_edge_list_str("3 2\n0 1\n"),
            Err(TopologyError::Parse { .. })
        ));
        assert!(matches!(
            Graph::from_edge_list_str("3 1\n0 x\n"),
            Err(TopologyError::Parse { line: 2, .. })
        ));
        let g = Graph::from_edge_list_str("3 2\n0 1\n1 2\n").unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
    }
}
