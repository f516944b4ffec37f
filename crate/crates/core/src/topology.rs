//! Gossip network construction: seeded random graphs and the Laplacian-based
//! weight matrix `L = I − M/λ_max(M)`.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};

use rand::Rng;
use thiserror::Error;

use crate::linalg::{seeded_rng, symmetric_eigen, symmetric_eigenvalues, LinalgError, Matrix};

/// Draws attempted by [`random_graph`] before giving up.
pub const MAX_CONNECT_RETRIES: u64 = 1000;

const SYMMETRY_TOL: f64 = 1e-12;
const ROW_SUM_TOL: f64 = 1e-10;
const SPECTRUM_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("agent count must be at least 1")]
    NoAgents,
    #[error("edge probability {0} outside (0, 1]")]
    InvalidProbability(f64),
    #[error("no connected graph with m={m}, p={p} after {retries} draws")]
    NotConnectable { m: usize, p: f64, retries: u64 },
    #[error("graph is not connected")]
    Disconnected,
    #[error("invalid edge ({0}, {1})")]
    InvalidEdge(usize, usize),
    #[error("edge list parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Undirected simple graph on agents `0..m`; always connected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    m: usize,
    // (i, j) with i < j, sorted
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph from an edge list, normalizing orientation and rejecting
    /// self-loops, duplicates, out-of-range endpoints and disconnected input.
    pub fn from_edges(m: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, TopologyError> {
        if m == 0 {
            return Err(TopologyError::NoAgents);
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b || a >= m || b >= m {
                return Err(TopologyError::InvalidEdge(a, b));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(TopologyError::InvalidEdge(a, b));
            }
        }
        let g = Self {
            m,
            edges: set.into_iter().collect(),
        };
        if !g.is_connected() {
            return Err(TopologyError::Disconnected);
        }
        Ok(g)
    }

    pub fn complete(m: usize) -> Result<Self, TopologyError> {
        let edges = (0..m).flat_map(|i| ((i + 1)..m).map(move |j| (i, j)));
        Self::from_edges(m, edges)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == i || b == i).count()
    }

    fn is_connected(&self) -> bool {
        connected(self.m, &self.edges)
    }

    /// Edge-list text: first line `m`, then one `i j` pair per line (0-based).
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", self.m)?;
        for (i, j) in &self.edges {
            writeln!(out, "{i} {j}")?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self, TopologyError> {
        let mut lines = input.lines().enumerate();
        let parse_err = |line: usize, message: &str| TopologyError::Parse {
            line,
            message: message.to_string(),
        };
        let m = loop {
            match lines.next() {
                None => return Err(parse_err(1, "missing agent count")),
                Some((n, line)) => {
                    let line = line?;
                    let t = line.trim();
                    if t.is_empty() {
                        continue;
                    }
                    break t
                        .parse::<usize>()
                        .map_err(|_| parse_err(n + 1, "agent count is not an integer"))?;
                }
            }
        };
        let mut edges = Vec::new();
        for (n, line) in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let mut it = t.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => edges.push((a, b)),
                _ => return Err(parse_err(n + 1, "expected two vertex indices")),
            }
        }
        Self::from_edges(m, edges)
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(m={}, edges={})", self.m, self.edges.len())
    }
}

fn connected(m: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut components = m;
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            components -= 1;
        }
    }
    components == 1
}

/// Erdős–Rényi graph conditioned on connectivity.
///
/// Every unordered pair `(i, j)`, `i < j`, is visited in lexicographic order and
/// kept with probability `p`. A disconnected draw is discarded and redrawn from
/// the next ChaCha stream of the same seed, so the result depends only on
/// `(m, p, seed)`.
pub fn random_graph(m: usize, p: f64, seed: u64) -> Result<Graph, TopologyError> {
    if m == 0 {
        return Err(TopologyError::NoAgents);
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(TopologyError::InvalidProbability(p));
    }
    let mut rng = seeded_rng(seed);
    for stream in 0..MAX_CONNECT_RETRIES {
        rng.set_stream(stream);
        rng.set_word_pos(0);
        let mut edges = Vec::new();
        for i in 0..m {
            for j in (i + 1)..m {
                if rng.random::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
        if connected(m, &edges) {
            return Ok(Graph { m, edges });
        }
    }
    Err(TopologyError::NotConnectable {
        m,
        p,
        retries: MAX_CONNECT_RETRIES,
    })
}

/// Symmetric doubly-stochastic gossip matrix with its cached second eigenvalue.
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    l: Matrix,
    lambda2: f64,
}

impl WeightMatrix {
    /// Wraps an arbitrary square matrix, taking `lambda2` as the second largest
    /// eigenvalue of its symmetric part (0 for a single agent). No property is
    /// enforced; see [`validate_weight_matrix`].
    pub fn from_matrix(l: Matrix) -> Result<Self, TopologyError> {
        if !l.is_square() {
            return Err(LinalgError::NotSquare(l.shape()).into());
        }
        let lambda2 = if l.rows() == 1 {
            0.0
        } else {
            let mut sym = l.clone();
            sym.symmetrize();
            symmetric_eigenvalues(&sym)?[1]
        };
        Ok(Self { l, lambda2 })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.l
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    /// Number of agents.
    pub fn m(&self) -> usize {
        self.l.rows()
    }

    /// `1 − λ₂`.
    pub fn spectral_gap(&self) -> f64 {
        1.0 - self.lambda2
    }

    /// Relabels agents: new agent `i` is old agent `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let m = self.m();
        assert_eq!(perm.len(), m);
        let mut l = Matrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                l[(i, j)] = self.l[(perm[i], perm[j])];
            }
        }
        Self {
            l,
            lambda2: self.lambda2,
        }
    }
}

/// `L = I − M/λ_max(M)` for the unit-weight Laplacian `M = D − Adj`.
///
/// `λ₂(L)` is read off the same eigendecomposition of `M`:
/// `λ₂(L) = 1 − μ_{m−1}/μ_max` with `μ` the Laplacian spectrum.
pub fn laplacian_weight_matrix(g: &Graph) -> Result<WeightMatrix, TopologyError> {
    let m = g.m();
    if m == 1 {
        return Ok(WeightMatrix {
            l: Matrix::identity(1),
            lambda2: 0.0,
        });
    }
    let mut lap = Matrix::zeros(m, m);
    for &(i, j) in g.edges() {
        lap[(i, j)] -= 1.0;
        lap[(j, i)] -= 1.0;
        lap[(i, i)] += 1.0;
        lap[(j, j)] += 1.0;
    }
    let mu = symmetric_eigen(&lap)?.eigenvalues;
    let mu_max = mu[0];
    let mut l = lap.scale(-1.0 / mu_max);
    for i in 0..m {
        l[(i, i)] += 1.0;
    }
    let lambda2 = (1.0 - mu[m - 2] / mu_max).clamp(0.0, 1.0);
    Ok(WeightMatrix { l, lambda2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightProperty {
    Symmetric,
    RowStochastic,
    SpectrumInUnitInterval,
    SimpleUnitEigenvalue,
}

/// One failed weight-matrix property and its measured residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub property: WeightProperty,
    pub residual: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.property {
            WeightProperty::Symmetric => "asymmetric",
            WeightProperty::RowStochastic => "row sums differ from 1",
            WeightProperty::SpectrumInUnitInterval => "eigenvalue outside [0, 1]",
            WeightProperty::SimpleUnitEigenvalue => "eigenvalue 1 is not simple",
        };
        write!(f, "{what} (residual {:e})", self.residual)
    }
}

/// Checks symmetry, `L·1 = 1`, `0 ⪯ L ⪯ I` and `null(I − L) = span(1)`.
/// Returns an empty list when all hold.
pub fn validate_weight_matrix(w: &WeightMatrix) -> Vec<Violation> {
    let l = w.matrix();
    let m = l.rows();
    let mut out = Vec::new();
    if !l.is_square() {
        out.push(Violation {
            property: WeightProperty::Symmetric,
            residual: f64::INFINITY,
        });
        return out;
    }

    let asym = l.max_abs_diff(&l.transpose());
    if asym > SYMMETRY_TOL {
        out.push(Violation {
            property: WeightProperty::Symmetric,
            residual: asym,
        });
    }

    let row_dev = (0..m)
        .map(|i| (l.row(i).iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    if row_dev > ROW_SUM_TOL {
        out.push(Violation {
            property: WeightProperty::RowStochastic,
            residual: row_dev,
        });
    }

    let mut sym = l.clone();
    sym.symmetrize();
    let eig = match symmetric_eigenvalues(&sym) {
        Ok(e) => e,
        Err(_) => {
            out.push(Violation {
                property: WeightProperty::SpectrumInUnitInterval,
                residual: f64::INFINITY,
            });
            return out;
        }
    };
    let above = eig[0] - 1.0;
    let below = -eig[m - 1];
    let range_dev = above.max(below);
    if range_dev > SPECTRUM_TOL {
        out.push(Violation {
            property: WeightProperty::SpectrumInUnitInterval,
            residual: range_dev,
        });
    }

    if m > 1 && eig[1] >= 1.0 - SPECTRUM_TOL {
        out.push(Violation {
            property: WeightProperty::SimpleUnitEigenvalue,
            residual: eig[1] - (1.0 - SPECTRUM_TOL),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_agent_graph() {
        let g = random_graph(1, 0.3, 9).unwrap();
        assert_eq!(g.m(), 1);
        assert!(g.edges().is_empty());
        let w = laplacian_weight_matrix(&g).unwrap();
        assert_eq!(w.matrix(), &Matrix::identity(1));
        assert_eq!(w.lambda2(), 0.0);
        assert!(validate_weight_matrix(&w).is_empty());
    }

    #[test]
    fn p_one_gives_complete_graph() {
        let g = random_graph(4, 1.0, 123).unwrap();
        assert_eq!(g.edges().len(), 6);
        assert_eq!(g, Graph::complete(4).unwrap());
    }

    #[test]
    fn fifty_agent_draw_is_connected_with_plausible_edge_count() {
        let g = random_graph(50, 0.5, 1).unwrap();
        // Binomial(1225, 0.5): mean 612.5, sd ≈ 17.5, ±5σ ⊂ [400, 825].
        let e = g.edges().len();
        assert!((400..=825).contains(&e), "{e} edges");
        assert!(connected(50, g.edges()));
    }

    #[test]
    fn draws_are_deterministic() {
        assert_eq!(random_graph(30, 0.2, 77).unwrap(), random_graph(30, 0.2, 77).unwrap());
        assert_ne!(random_graph(30, 0.2, 77).unwrap(), random_graph(30, 0.2, 78).unwrap());
    }

    #[test]
    fn hopeless_probability_reports_not_connectable() {
        assert!(matches!(
            random_graph(40, 1e-6, 0),
            Err(TopologyError::NotConnectable { .. })
        ));
        assert!(matches!(random_graph(3, 0.0, 0), Err(TopologyError::InvalidProbability(_))));
        assert!(matches!(random_graph(0, 0.5, 0), Err(TopologyError::NoAgents)));
    }

    #[test]
    fn two_agent_weight_matrix() {
        let g = Graph::complete(2).unwrap();
        let w = laplacian_weight_matrix(&g).unwrap();
        let expected = Matrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!(w.matrix().max_abs_diff(&expected) < 1e-15);
        assert!(w.lambda2().abs() < 1e-15);
    }

    #[test]
    fn complete_graph_has_zero_lambda2() {
        for m in [3, 5, 8] {
            let w = laplacian_weight_matrix(&Graph::complete(m).unwrap()).unwrap();
            // Laplacian spectrum of K_m is {0, m, …, m}, so λ₂(L) = 1 − m/m = 0.
            assert!(w.lambda2().abs() < 1e-12, "m={m}: {}", w.lambda2());
            let avg = Matrix::from_vec(m, m, vec![1.0 / m as f64; m * m]).unwrap();
            assert!(w.matrix().max_abs_diff(&avg) < 1e-14);
        }
    }

    #[test]
    fn laplacian_weights_validate() {
        for seed in 0..5 {
            let g = random_graph(12, 0.4, seed).unwrap();
            let w = laplacian_weight_matrix(&g).unwrap();
            assert!(validate_weight_matrix(&w).is_empty());
            assert!(w.lambda2() >= 0.0 && w.lambda2() < 1.0);
            let fresh = WeightMatrix::from_matrix(w.matrix().clone()).unwrap();
            assert!((fresh.lambda2() - w.lambda2()).abs() < 1e-12);
        }
    }

    #[test]
    fn asymmetric_matrix_flagged() {
        let l = Matrix::from_rows(&[vec![0.5, 0.5], vec![0.4, 0.6]]).unwrap();
        let v = validate_weight_matrix(&WeightMatrix::from_matrix(l).unwrap());
        let asym = v
            .iter()
            .find(|x| x.property == WeightProperty::Symmetric)
            .expect("asymmetry reported");
        assert!((asym.residual - 0.1).abs() < 1e-15);
    }

    #[test]
    fn identity_on_two_agents_has_double_unit_eigenvalue() {
        let v = validate_weight_matrix(&WeightMatrix::from_matrix(Matrix::identity(2)).unwrap());
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].property, WeightProperty::SimpleUnitEigenvalue);
    }

    #[test]
    fn powers_approach_averaging_matrix() {
        let g = random_graph(10, 0.5, 4).unwrap();
        let w = laplacian_weight_matrix(&g).unwrap();
        assert!(w.lambda2() <= 0.95);
        let mut p = w.matrix().clone();
        for _ in 0..8 {
            p = p.matmul(&p).unwrap(); // l^256 after 8 squarings
        }
        assert!(p.max_abs_diff(&Matrix::from_vec(10, 10, vec![0.1; 100]).unwrap()) <= 1e-6);
    }

    #[test]
    fn edge_list_roundtrip() {
        let g = random_graph(9, 0.4, 2).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("9\n"));
        let back = Graph::read_edge_list(&buf[..]).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn edge_list_rejects_bad_input() {
        assert!(Graph::read_edge_list("3\n0 1\n".as_bytes()).is_err()); // disconnected
        assert!(Graph::read_edge_list("2\n0 0\n".as_bytes()).is_err());
        assert!(Graph::read_edge_list("2\n0 x\n".as_bytes()).is_err());
        assert!(Graph::read_edge_list("".as_bytes()).is_err());
    }
}
