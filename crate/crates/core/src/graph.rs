//! Mobility graphs: random `d`-regular graphs drawn by the pairing model,
//! complete graphs, and relay placement on vertices.

use std::collections::VecDeque;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use thiserror::Error;

use crate::stochastic::{stream, Purpose};

/// Rejection attempts before the pairing model gives up.
pub const PAIRING_RETRY_BUDGET: usize = 10_000;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("v·d must be even for a {degree}-regular graph on {vertices} vertices")]
    OddDegreeSum { vertices: usize, degree: usize },
    #[error("degree {degree} must be below the vertex count {vertices}")]
    DegreeTooLarge { vertices: usize, degree: usize },
    #[error("regular graphs need degree ≥ 3, got {0}")]
    DegreeTooSmall(usize),
    #[error("a complete graph needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("pairing model found no simple connected graph in {0} attempts")]
    NonConvergence(usize),
    #[error("cannot place {relays} relays on {vertices} vertices")]
    TooManyRelays { relays: usize, vertices: usize },
    #[error("relay count must be positive")]
    NoRelays,
    #[error("edge list line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("edge list: {0}")]
    Io(String),
}

/// Degree of the mobility graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Degree {
    Regular(usize),
    Complete,
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::Regular(d) => write!(f, "{d}"),
            Degree::Complete => f.write_str("complete"),
        }
    }
}

impl FromStr for Degree {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("complete") {
            return Ok(Degree::Complete);
        }
        s.parse::<usize>()
            .map(Degree::Regular)
            .map_err(|_| format!("degree must be an integer or \"complete\", got {s:?}"))
    }
}

/// Vertex count plus degree: enough to build a graph or evaluate a formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GraphSpec {
    pub vertices: usize,
    pub degree: Degree,
}

impl GraphSpec {
    pub fn regular(vertices: usize, degree: usize) -> Self {
        Self { vertices, degree: Degree::Regular(degree) }
    }

    pub fn complete(vertices: usize) -> Self {
        Self { vertices, degree: Degree::Complete }
    }

    /// `θ_d · v`, the expected steps to hit one specific vertex from stationarity.
    pub fn theta_v(&self) -> Result<f64, GraphError> {
        Ok(theta(self.degree)? * self.vertices as f64)
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        match self.degree {
            Degree::Complete if self.vertices < 2 => Err(GraphError::TooFewVertices(self.vertices)),
            Degree::Complete => Ok(()),
            Degree::Regular(d) => check_regular(self.vertices, d),
        }
    }

    /// Builds a graph for this spec; `seed` is ignored for complete graphs.
    pub fn build(&self, seed: u64) -> Result<Graph, GraphError> {
        match self.degree {
            Degree::Complete => gen_complete(self.vertices),
            Degree::Regular(d) => gen_random_regular(self.vertices, d, seed),
        }
    }
}

/// Regular-graph correction factor `(d−1)/(d−2)`; 1 for complete graphs.
pub fn theta(degree: Degree) -> Result<f64, GraphError> {
    match degree {
        Degree::Complete => Ok(1.0),
        Degree::Regular(d) if d < 3 => Err(GraphError::DegreeTooSmall(d)),
        Degree::Regular(d) => Ok((d - 1) as f64 / (d - 2) as f64),
    }
}

fn check_regular(vertices: usize, degree: usize) -> Result<(), GraphError> {
    if degree < 3 {
        return Err(GraphError::DegreeTooSmall(degree));
    }
    if degree >= vertices {
        return Err(GraphError::DegreeTooLarge { vertices, degree });
    }
    if (vertices * degree) % 2 == 1 {
        return Err(GraphError::OddDegreeSum { vertices, degree });
    }
    Ok(())
}

/// An undirected simple graph with every vertex of the same degree.
///
/// Vertices are labelled `0..v`. Adjacency is stored as a flat row-major
/// table of `v × degree` neighbour labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertices: usize,
    kind: Degree,
    row: usize,
    adjacency: Vec<u32>,
}

impl Graph {
    fn from_lists(kind: Degree, lists: Vec<Vec<u32>>) -> Self {
        let vertices = lists.len();
        let row = lists.first().map_or(0, Vec::len);
        let mut adjacency = Vec::with_capacity(vertices * row);
        for mut l in lists {
            l.sort_unstable();
            adjacency.extend(l);
        }
        Self { vertices, kind, row, adjacency }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    /// Number of neighbours of every vertex.
    pub fn degree(&self) -> usize {
        self.row
    }

    pub fn kind(&self) -> Degree {
        self.kind
    }

    pub fn spec(&self) -> GraphSpec {
        GraphSpec { vertices: self.vertices, degree: self.kind }
    }

    pub fn is_complete(&self) -> bool {
        self.kind == Degree::Complete
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adjacency[v * self.row..(v + 1) * self.row]
    }

    /// Undirected edges `(u, w)` with `u < w`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.vertices).flat_map(move |u| {
            self.neighbors(u).iter().map(|&w| w as usize).filter(move |&w| u < w).map(move |w| (u, w))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.vertices * self.row / 2
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices == 0 {
            return true;
        }
        let mut seen = vec![false; self.vertices];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &w in self.neighbors(u) {
                let w = w as usize;
                if !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        reached == self.vertices
    }

    /// Checks regularity, simplicity and symmetry. Returns a description of
    /// the first violation found.
    pub fn check_invariants(&self) -> Result<(), String> {
        let expected = match self.kind {
            Degree::Complete => self.vertices - 1,
            Degree::Regular(d) => d,
        };
        if self.row != expected {
            return Err(format!("row width {} but degree {expected}", self.row));
        }
        if (self.vertices * self.row) % 2 == 1 {
            return Err("v·d is odd".into());
        }
        for u in 0..self.vertices {
            let nb = self.neighbors(u);
            for (i, &w) in nb.iter().enumerate() {
                let w = w as usize;
                if w >= self.vertices {
                    return Err(format!("vertex {u} has out-of-range neighbour {w}"));
                }
                if w == u {
                    return Err(format!("self-loop at {u}"));
                }
                if i > 0 && nb[i - 1] as usize == w {
                    return Err(format!("multi-edge {u}–{w}"));
                }
                if self.neighbors(w).binary_search(&(u as u32)).is_err() {
                    return Err(format!("edge {u}→{w} has no reverse"));
                }
            }
        }
        Ok(())
    }

    /// Writes the edge list: a `v d` header then one `u w` line per edge.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.vertices, self.kind)?;
        for (u, w) in self.edges() {
            writeln!(out, "{u} {w}")?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self, GraphError> {
        let mut lines = input.lines().enumerate();
        let parse_err = |line: usize, message: String| GraphError::Parse { line: line + 1, message };
        let (hline, header) = lines.next().ok_or_else(|| parse_err(0, "empty input".into()))?;
        let header = header.map_err(|e| GraphError::Io(e.to_string()))?;
        let mut head = header.split_whitespace();
        let (Some(vs), Some(ds), None) = (head.next(), head.next(), head.next()) else {
            return Err(parse_err(hline, format!("expected \"v d\", got {header:?}")));
        };
        let vertices: usize = vs.parse().map_err(|_| parse_err(hline, format!("bad vertex count {vs:?}")))?;
        let kind: Degree = ds.parse().map_err(|m| parse_err(hline, m))?;
        GraphSpec { vertices, degree: kind }.validate()?;

        let mut lists = vec![Vec::new(); vertices];
        for (i, line) in lines {
            let line = line.map_err(|e| GraphError::Io(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(parse_err(i, format!("expected \"u w\", got {line:?}")));
            };
            let u: usize = a.parse().map_err(|_| parse_err(i, format!("bad vertex {a:?}")))?;
            let w: usize = b.parse().map_err(|_| parse_err(i, format!("bad vertex {b:?}")))?;
            if u >= vertices || w >= vertices {
                return Err(parse_err(i, format!("vertex out of range in {line:?}")));
            }
            lists[u].push(w as u32);
            lists[w].push(u as u32);
        }
        let g = Graph::from_lists(kind, lists);
        g.check_invariants().map_err(|m| GraphError::Parse { line: 0, message: m })?;
        Ok(g)
    }
}

/// Samples a simple, connected `d`-regular graph on `v` vertices.
///
/// Pairing model: `v·d` half-edges are matched uniformly; any matching with a
/// loop or a repeated edge is thrown away, as is a disconnected result. The
/// matching is built incrementally and abandoned at the first collision,
/// which leaves the distribution of accepted graphs unchanged.
pub fn gen_random_regular(vertices: usize, degree: usize, seed: u64) -> Result<Graph, GraphError> {
    check_regular(vertices, degree)?;
    let mut rng = stream(seed, Purpose::Graph, 0);
    let points = vertices * degree;
    let mut owner: Vec<u32> = Vec::with_capacity(points);
    let mut lists: Vec<Vec<u32>> = vec![Vec::with_capacity(degree); vertices];

    'attempt: for _ in 0..PAIRING_RETRY_BUDGET {
        owner.clear();
        for v in 0..vertices as u32 {
            owner.extend(std::iter::repeat_n(v, degree));
        }
        lists.iter_mut().for_each(Vec::clear);
        // Pair the last unmatched point with a uniformly chosen other one.
        while owner.len() >= 2 {
            let a = owner.pop().expect("len checked");
            let j = rng.random_range(0..owner.len());
            let b = owner.swap_remove(j);
            if a == b || lists[a as usize].contains(&b) {
                continue 'attempt;
            }
            lists[a as usize].push(b);
            lists[b as usize].push(a);
        }
        let g = Graph::from_lists(Degree::Regular(degree), lists.clone());
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(GraphError::NonConvergence(PAIRING_RETRY_BUDGET))
}

/// The complete graph `K_v`.
pub fn gen_complete(vertices: usize) -> Result<Graph, GraphError> {
    if vertices < 2 {
        return Err(GraphError::TooFewVertices(vertices));
    }
    let lists = (0..vertices as u32).map(|u| (0..vertices as u32).filter(|&w| w != u).collect()).collect();
    Ok(Graph::from_lists(Degree::Complete, lists))
}

/// What a relay currently holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    NotRelay,
    Empty,
    Holding(usize),
}

/// Relays on a graph and the coded chunk (if any) each one stores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelayPlacement {
    relays: Vec<usize>,
    slots: Vec<Slot>,
}

impl RelayPlacement {
    /// Relay vertices in ascending order.
    pub fn relays(&self) -> &[usize] {
        &self.relays
    }

    pub fn relay_count(&self) -> usize {
        self.relays.len()
    }

    pub fn slot(&self, v: usize) -> Slot {
        self.slots[v]
    }

    pub fn is_relay(&self, v: usize) -> bool {
        self.slots[v] != Slot::NotRelay
    }

    pub fn is_free_relay(&self, v: usize) -> bool {
        self.slots[v] == Slot::Empty
    }

    pub fn occupied(&self) -> usize {
        self.slots.iter().filter(|s| matches!(s, Slot::Holding(_))).count()
    }

    /// Stores `chunk` on relay `v`. Returns `false` if `v` is not an empty relay.
    pub fn deposit(&mut self, v: usize, chunk: usize) -> bool {
        if self.slots[v] != Slot::Empty {
            return false;
        }
        self.slots[v] = Slot::Holding(chunk);
        true
    }

    /// `(vertex, chunk)` for every occupied relay.
    pub fn occupancy(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.relays.iter().filter_map(|&v| match self.slots[v] {
            Slot::Holding(c) => Some((v, c)),
            _ => None,
        })
    }
}

/// Picks `relays` distinct vertices uniformly without replacement.
pub fn place_relays<R: Rng + ?Sized>(graph: &Graph, relays: usize, rng: &mut R) -> Result<RelayPlacement, GraphError> {
    let v = graph.vertex_count();
    if relays == 0 {
        return Err(GraphError::NoRelays);
    }
    if relays > v {
        return Err(GraphError::TooManyRelays { relays, vertices: v });
    }
    let mut chosen = index::sample(rng, v, relays).into_vec();
    chosen.sort_unstable();
    let mut slots = vec![Slot::NotRelay; v];
    for &r in &chosen {
        slots[r] = Slot::Empty;
    }
    Ok(RelayPlacement { relays: chosen, slots })
}
