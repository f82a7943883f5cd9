//! Communication graphs, the consensus matrix `P`, and the spectral
//! explore-exploit measures.
//!
//! For a connected undirected graph with Laplacian `L` and maximum degree
//! `d_max`, the consensus matrix is `P = I - (kappa/d_max) L`. `P` is
//! symmetric and doubly stochastic; its leading eigenvalue is 1 with the
//! uniform eigenvector, and a valid step size keeps every other eigenvalue
//! strictly inside the unit interval in magnitude.
//!
//! Two topology-only quantities derived from the spectrum govern estimation
//! quality:
//!
//! - `epsilon_n = sqrt(M) * sum_{p>=2} |lambda_p| / (1 - |lambda_p|)` bounds
//!   how far any agent's count estimate can drift from the network average;
//! - `epsilon_c^k` ("explore-exploit centrality") inflates agent k's
//!   effective estimate variance; larger values mean a worse-positioned
//!   agent and more regret.
//!
//! The sign split inside `epsilon_c^k` applies the indicator entrywise along
//! the summation index of the eigenvector products (the diagonal entries
//! `(u_p u_j^T)_dd`), the only reading under which the split is a nontrivial
//! decomposition of `u_p . u_j`. The CLI reports this convention next to the
//! metrics it prints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{eig_sym, Mat, RandomStream, SymmetricSpectrum};

/// Eigenvalue magnitudes at or above `1 - SPECTRUM_MARGIN` (excluding the
/// leading eigenvalue) make the deviation series diverge and are rejected.
const SPECTRUM_MARGIN: f64 = 1e-9;

/// Resampling cap for connected Erdos-Renyi draws.
const ER_ATTEMPT_CAP: usize = 10_000;

/// Undirected, connected communication topology over `M` agents.
///
/// Node ids are 1-indexed in every external interface (edge lists, reports);
/// vector positions are 0-indexed, so position `k` holds node `k + 1`.
#[derive(Debug, Clone)]
pub struct Graph {
    agents: usize,
    adjacency: Mat,
}

impl Graph {
    /// Build a validated graph from unordered 1-indexed edge pairs.
    pub fn from_edge_list(agents: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if agents == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut adjacency = Mat::zeros(agents, agents);
        for &(u, v) in edges {
            if u == v {
                return Err(Error::SelfLoop { node: u });
            }
            if u == 0 || v == 0 || u > agents || v > agents {
                return Err(Error::EdgeOutOfRange {
                    u,
                    v,
                    nodes: agents,
                });
            }
            adjacency[(u - 1, v - 1)] = 1.0;
            adjacency[(v - 1, u - 1)] = 1.0;
        }
        let graph = Self { agents, adjacency };
        let components = graph.components();
        if components.len() > 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(graph)
    }

    /// Parse the edge-list text format: first line `M`, then one `u v` pair
    /// per line, 1-indexed. Blank lines are ignored.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut agents = None;
        let mut edges = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if agents.is_none() {
                let m = line.parse::<usize>().map_err(|_| Error::EdgeListParse {
                    line: idx + 1,
                    message: format!("expected agent count, got {line:?}"),
                })?;
                agents = Some(m);
                continue;
            }
            let mut parts = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<usize> {
                tok.and_then(|t| t.parse::<usize>().ok())
                    .ok_or(Error::EdgeListParse {
                        line: idx + 1,
                        message: format!("expected \"u v\", got {line:?}"),
                    })
            };
            let u = parse(parts.next())?;
            let v = parse(parts.next())?;
            if parts.next().is_some() {
                return Err(Error::EdgeListParse {
                    line: idx + 1,
                    message: format!("trailing tokens after edge in {line:?}"),
                });
            }
            edges.push((u, v));
        }
        let agents = agents.ok_or(Error::EdgeListParse {
            line: 1,
            message: "empty edge-list input".into(),
        })?;
        Self::from_edge_list(agents, &edges)
    }

    /// Connected Erdos-Renyi sample: each unordered pair appears
    /// independently with probability `rho`; the whole graph is resampled
    /// until connected, up to a cap.
    pub fn erdos_renyi(agents: usize, rho: f64, stream: &mut RandomStream) -> Result<Self> {
        if agents == 0 {
            return Err(Error::EmptyGraph);
        }
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "edge probability rho must be in (0, 1], got {rho}"
            )));
        }
        for _ in 0..ER_ATTEMPT_CAP {
            let adjacency = sample_adjacency(agents, rho, stream);
            let graph = Self { agents, adjacency };
            if graph.is_connected() {
                return Ok(graph);
            }
        }
        Err(Error::ConnectivityCapExceeded {
            attempts: ER_ATTEMPT_CAP,
            rho,
            nodes: agents,
        })
    }

    /// Complete graph on `agents` nodes.
    pub fn complete(agents: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 1..=agents {
            for v in (u + 1)..=agents {
                edges.push((u, v));
            }
        }
        Self::from_edge_list(agents, &edges)
    }

    /// Path graph 1 - 2 - ... - M.
    pub fn path(agents: usize) -> Result<Self> {
        let edges: Vec<_> = (1..agents).map(|u| (u, u + 1)).collect();
        Self::from_edge_list(agents, &edges)
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn adjacency(&self) -> &Mat {
        &self.adjacency
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[(u - 1, v - 1)] != 0.0
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.agents)
            .map(|k| self.adjacency.row(k).iter().filter(|&&a| a != 0.0).count())
            .collect()
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Edge list in 1-indexed pairs, `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.agents {
            for v in (u + 1)..self.agents {
                if self.adjacency[(u, v)] != 0.0 {
                    out.push((u + 1, v + 1));
                }
            }
        }
        out
    }

    /// Standard reachability check from node 1.
    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Connected components as sorted lists of 1-indexed node ids.
    fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.agents];
        let mut components = Vec::new();
        for start in 0..self.agents {
            if seen[start] {
                continue;
            }
            let mut queue = vec![start];
            let mut component = Vec::new();
            seen[start] = true;
            while let Some(node) = queue.pop() {
                component.push(node + 1);
                for next in 0..self.agents {
                    if !seen[next] && self.adjacency[(node, next)] != 0.0 {
                        seen[next] = true;
                        queue.push(next);
                    }
                }
            }
            component.sort_unstable();
            components.push(component);
        }
        components
    }

    /// Graph Laplacian `L = diag(degrees) - adjacency`; rows sum to zero.
    pub fn laplacian(&self) -> Mat {
        let degrees = self.degrees();
        Mat::from_fn(self.agents, self.agents, |r, c| {
            if r == c {
                degrees[r] as f64
            } else {
                -self.adjacency[(r, c)]
            }
        })
    }
}

fn sample_adjacency(agents: usize, rho: f64, stream: &mut RandomStream) -> Mat {
    let mut adjacency = Mat::zeros(agents, agents);
    for u in 0..agents {
        for v in (u + 1)..agents {
            if stream.next_f64() < rho {
                adjacency[(u, v)] = 1.0;
                adjacency[(v, u)] = 1.0;
            }
        }
    }
    adjacency
}

/// Step size used by the reference experiments: `d_max / (d_max - 1)`, with
/// a fallback of 0.5 when `d_max <= 1` (where the ratio is undefined).
///
/// This default is not valid for every topology (complete graphs, for one,
/// need `kappa <= (M-1)/M`); [`ConsensusModel::new`] validates the resulting
/// spectrum and rejects invalid combinations.
pub fn default_kappa(graph: &Graph) -> f64 {
    let d_max = graph.max_degree();
    if d_max <= 1 {
        0.5
    } else {
        d_max as f64 / (d_max as f64 - 1.0)
    }
}

/// The consensus matrix `P`, its spectrum, and the derived explore-exploit
/// measures. Immutable after construction; safe to share across concurrent
/// simulation runs.
#[derive(Debug, Clone)]
pub struct ConsensusModel {
    p: Mat,
    kappa: f64,
    spectrum: SymmetricSpectrum,
    epsilon_n: f64,
    epsilon_c: Vec<f64>,
}

impl ConsensusModel {
    /// Build `P = I - (kappa/d_max) L`, decompose it, validate the spectrum,
    /// and compute `epsilon_n` and `epsilon_c^k`.
    ///
    /// Rejects any non-leading eigenvalue with magnitude at or above
    /// `1 - 1e-9`: the deviation series diverges there (bipartite graphs
    /// with `kappa = 1` are the classic case, placing -1 in the spectrum).
    pub fn new(graph: &Graph, kappa: f64) -> Result<Self> {
        let m = graph.agents();
        if m == 1 {
            // Single agent: P = [1], no consensus error by convention.
            return Ok(Self {
                p: Mat::identity(1),
                kappa,
                spectrum: eig_sym(&Mat::identity(1))?,
                epsilon_n: 0.0,
                epsilon_c: vec![0.0],
            });
        }
        if !(kappa > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "step size kappa must be positive, got {kappa}"
            )));
        }

        let laplacian = graph.laplacian();
        let d_max = graph.max_degree() as f64;
        let weight = kappa / d_max;
        let p = Mat::from_fn(m, m, |r, c| {
            let identity = if r == c { 1.0 } else { 0.0 };
            identity - weight * laplacian[(r, c)]
        });

        let spectrum = eig_sym(&p)?;
        for (index, lambda) in spectrum.eigenvalues.iter().enumerate().skip(1) {
            if lambda.abs() >= 1.0 - SPECTRUM_MARGIN {
                return Err(Error::SpectrumRejected {
                    index: index + 1,
                    magnitude: lambda.abs(),
                });
            }
        }

        let epsilon_n = epsilon_n_closed_form(&spectrum);
        let epsilon_c = epsilon_c_closed_form(&spectrum);

        Ok(Self {
            p,
            kappa,
            spectrum,
            epsilon_n,
            epsilon_c,
        })
    }

    pub fn agents(&self) -> usize {
        self.spectrum.order()
    }

    pub fn p(&self) -> &Mat {
        &self.p
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn spectrum(&self) -> &SymmetricSpectrum {
        &self.spectrum
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.eigenvalues
    }

    /// Network-wide bound on |count estimate - centralized count|.
    pub fn epsilon_n(&self) -> f64 {
        self.epsilon_n
    }

    /// Explore-exploit centrality per node (0-indexed position `k` holds
    /// node `k + 1`).
    pub fn epsilon_c(&self) -> &[f64] {
        &self.epsilon_c
    }

    /// Second-largest eigenvalue magnitude: the geometric consensus rate.
    pub fn mixing_rate(&self) -> f64 {
        self.spectrum.eigenvalues[1..]
            .iter()
            .fold(0.0f64, |acc, l| acc.max(l.abs()))
    }

    pub fn metrics(&self) -> GraphMetrics {
        GraphMetrics {
            agents: self.agents(),
            kappa: self.kappa,
            eigenvalues: self.spectrum.eigenvalues.clone(),
            epsilon_n: self.epsilon_n,
            epsilon_c: self.epsilon_c.clone(),
        }
    }
}

/// JSON-exportable summary of a consensus model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphMetrics {
    #[serde(rename = "M")]
    pub agents: usize,
    pub kappa: f64,
    pub eigenvalues: Vec<f64>,
    pub epsilon_n: f64,
    pub epsilon_c: Vec<f64>,
}

fn epsilon_n_closed_form(spectrum: &SymmetricSpectrum) -> f64 {
    let m = spectrum.order() as f64;
    m.sqrt()
        * spectrum.eigenvalues[1..]
            .iter()
            .map(|l| l.abs() / (1.0 - l.abs()))
            .sum::<f64>()
}

/// Sign-split sums of the entrywise eigenvector product `u_p .* u_j`.
struct PairSplit {
    nu_plus: f64,
    nu_minus: f64,
    nu_max: f64,
}

fn pair_split(up: &[f64], uj: &[f64]) -> PairSplit {
    let mut nu_plus = 0.0;
    let mut nu_minus = 0.0;
    for (a, b) in up.iter().zip(uj) {
        let g = a * b;
        if g >= 0.0 {
            nu_plus += g;
        } else {
            nu_minus += g;
        }
    }
    PairSplit {
        nu_plus,
        nu_minus,
        nu_max: nu_minus.abs().max(nu_plus),
    }
}

/// Three-case node weight for the pair (p, j): the same-sign branch pairs
/// the node's diagonal product entry with the matching sign split, while an
/// oscillating eigenvalue product (`lambda_p lambda_j < 0`) takes the
/// worst-case split against the magnitude. All branches vanish when the
/// node's entry is zero.
fn b_value(split: &PairSplit, lambda_product: f64, node_entry: f64) -> f64 {
    if lambda_product >= 0.0 {
        if node_entry >= 0.0 {
            split.nu_plus * node_entry
        } else {
            split.nu_minus * node_entry
        }
    } else {
        split.nu_max * node_entry.abs()
    }
}

fn epsilon_c_closed_form(spectrum: &SymmetricSpectrum) -> Vec<f64> {
    let m = spectrum.order();
    let lambdas = &spectrum.eigenvalues;
    let vectors: Vec<Vec<f64>> = (0..m).map(|c| spectrum.eigenvector(c)).collect();
    let mut epsilon_c = vec![0.0; m];
    for p in 0..m {
        for j in 1..m {
            let x = (lambdas[p] * lambdas[j]).abs();
            let weight = x / (1.0 - x);
            if weight == 0.0 {
                continue;
            }
            let split = pair_split(&vectors[p], &vectors[j]);
            let lambda_product = lambdas[p] * lambdas[j];
            for (k, acc) in epsilon_c.iter_mut().enumerate() {
                let node_entry = vectors[p][k] * vectors[j][k];
                *acc += weight * b_value(&split, lambda_product, node_entry);
            }
        }
    }
    for value in epsilon_c.iter_mut() {
        *value *= m as f64;
    }
    epsilon_c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node_graph_is_valid() {
        let g = Graph::from_edge_list(1, &[]).unwrap();
        assert!(g.is_connected());
        assert_eq!(g.laplacian().as_slice(), &[0.0]);
        let model = ConsensusModel::new(&g, 1.0).unwrap();
        assert_eq!(model.p().as_slice(), &[1.0]);
        assert_eq!(model.epsilon_n(), 0.0);
        assert_eq!(model.epsilon_c(), &[0.0]);
    }

    #[test]
    fn path_graph_degrees() {
        let g = Graph::from_edge_list(3, &[(1, 2), (2, 3)]).unwrap();
        assert_eq!(g.degrees(), vec![1, 2, 1]);
        assert!(g.is_connected());
    }

    #[test]
    fn disconnected_graph_reports_components() {
        let err = Graph::from_edge_list(4, &[(1, 2), (3, 4)]).unwrap_err();
        match err {
            Error::Disconnected { components } => {
                assert_eq!(components, vec![vec![1, 2], vec![3, 4]]);
            }
            other => panic!("unexpected error: {other:?}"),
        }
    }

    #[test]
    fn self_loop_and_range_rejected() {
        assert!(matches!(
            Graph::from_edge_list(3, &[(2, 2)]),
            Err(Error::SelfLoop { node: 2 })
        ));
        assert!(matches!(
            Graph::from_edge_list(3, &[(1, 4)]),
            Err(Error::EdgeOutOfRange { .. })
        ));
        assert!(matches!(
            Graph::from_edge_list(3, &[(0, 1)]),
            Err(Error::EdgeOutOfRange { .. })
        ));
    }

    #[test]
    fn two_isolated_nodes_not_connected() {
        let err = Graph::from_edge_list(2, &[]).unwrap_err();
        assert!(matches!(err, Error::Disconnected { .. }));
    }

    #[test]
    fn complete_graph_is_connected() {
        let g = Graph::complete(10).unwrap();
        assert!(g.is_connected());
        assert_eq!(g.max_degree(), 9);
    }

    #[test]
    fn laplacian_matches_definition() {
        let path = Graph::path(3).unwrap();
        let l = path.laplacian();
        let expect = [1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0];
        assert_eq!(l.as_slice(), &expect);

        let complete = Graph::complete(4).unwrap();
        let l = complete.laplacian();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 3.0 } else { -1.0 };
                assert_eq!(l[(i, j)], expect);
            }
            assert_eq!(l.row(i).iter().sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn edge_list_text_round_trip() {
        let g = Graph::parse_edge_list("3\n1 2\n2 3\n").unwrap();
        assert_eq!(g.edges(), vec![(1, 2), (2, 3)]);
        assert!(Graph::parse_edge_list("").is_err());
        assert!(Graph::parse_edge_list("3\n1 2 9\n").is_err());
        assert!(Graph::parse_edge_list("3\n1 x\n").is_err());
    }

    #[test]
    fn erdos_renyi_forced_edge() {
        let mut stream = RandomStream::new(3);
        let g = Graph::erdos_renyi(2, 1.0, &mut stream).unwrap();
        assert!(g.has_edge(1, 2));
    }

    #[test]
    fn erdos_renyi_connected_at_paper_density() {
        let rho = 10f64.ln() / 10.0;
        let mut stream = RandomStream::new(11);
        for _ in 0..20 {
            let g = Graph::erdos_renyi(10, rho, &mut stream).unwrap();
            assert!(g.is_connected());
            assert_eq!(g.agents(), 10);
        }
    }

    #[test]
    fn erdos_renyi_edge_frequency() {
        // Raw sampler, before the connectivity filter: empirical frequency of
        // a fixed pair over 1e4 draws within +-0.02 of rho (binomial standard
        // error is about 0.004).
        let rho = 0.4;
        let mut stream = RandomStream::new(17);
        let draws = 10_000;
        let mut hits = 0usize;
        for _ in 0..draws {
            let adjacency = sample_adjacency(6, rho, &mut stream);
            if adjacency[(0, 1)] != 0.0 {
                hits += 1;
            }
        }
        let freq = hits as f64 / draws as f64;
        assert!((freq - rho).abs() < 0.02, "frequency {freq}");
    }

    #[test]
    fn erdos_renyi_cap_exceeded_for_tiny_rho() {
        let mut stream = RandomStream::new(5);
        let err = Graph::erdos_renyi(30, 1e-6, &mut stream).unwrap_err();
        assert!(matches!(err, Error::ConnectivityCapExceeded { .. }));
    }

    #[test]
    fn complete_graph_model_has_zero_measures() {
        // kappa = (M-1)/M makes P = ones(M)/M: all non-leading eigenvalues
        // vanish, so both deviation measures are exactly zero.
        let g = Graph::complete(4).unwrap();
        let model = ConsensusModel::new(&g, 0.75).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                assert!((model.p()[(r, c)] - 0.25).abs() < 1e-15);
            }
        }
        assert!(model.epsilon_n().abs() < 1e-12);
        for &e in model.epsilon_c() {
            assert!(e.abs() < 1e-12);
        }
    }

    #[test]
    fn path3_closed_form_measures() {
        let g = Graph::path(3).unwrap();
        let model = ConsensusModel::new(&g, 1.0).unwrap();
        let expect = [1.0, 0.5, -0.5];
        for (lambda, e) in model.eigenvalues().iter().zip(expect) {
            assert!((lambda - e).abs() < 1e-12);
        }
        // epsilon_n = sqrt(3) * (0.5/0.5 + 0.5/0.5) = 2 sqrt(3).
        assert!((model.epsilon_n() - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        // Hand evaluation of the three-case formula on the closed-form
        // spectrum u1 = (1,1,1)/sqrt(3), u2 = (1,0,-1)/sqrt(2),
        // u3 = (1,-2,1)/sqrt(6) gives (5/3, 4/3, 5/3).
        let expect_c = [5.0 / 3.0, 4.0 / 3.0, 5.0 / 3.0];
        for (got, want) in model.epsilon_c().iter().zip(expect_c) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn epsilon_series_oracles_agree_on_path3() {
        let g = Graph::path(3).unwrap();
        let model = ConsensusModel::new(&g, 1.0).unwrap();
        let (en, ec) = epsilon_series_oracle(model.spectrum());
        assert!((model.epsilon_n() - en).abs() < 1e-6);
        for (got, want) in model.epsilon_c().iter().zip(&ec) {
            assert!((got - want).abs() < 1e-6);
        }
    }

    #[test]
    fn bipartite_kappa_one_rejected() {
        // Single edge, kappa = 1: P is the swap matrix with eigenvalue -1.
        let g = Graph::from_edge_list(2, &[(1, 2)]).unwrap();
        let err = ConsensusModel::new(&g, 1.0).unwrap_err();
        assert!(matches!(err, Error::SpectrumRejected { .. }));
        // The d_max = 1 fallback step size is valid.
        assert_eq!(default_kappa(&g), 0.5);
        let model = ConsensusModel::new(&g, default_kappa(&g)).unwrap();
        assert!(model.epsilon_n() < 1e-12);
    }

    #[test]
    fn default_kappa_ratio() {
        let g = Graph::path(3).unwrap();
        assert_eq!(default_kappa(&g), 2.0);
    }

    #[test]
    fn doubly_stochastic_rows_and_columns() {
        let g = Graph::path(5).unwrap();
        let model = ConsensusModel::new(&g, 0.7).unwrap();
        let m = model.agents();
        for r in 0..m {
            let row: f64 = model.p().row(r).iter().sum();
            let col: f64 = (0..m).map(|i| model.p()[(i, r)]).sum();
            assert!((row - 1.0).abs() < 1e-12);
            assert!((col - 1.0).abs() < 1e-12);
        }
        assert!(model.mixing_rate() < 1.0);
        assert!((model.eigenvalues()[0] - 1.0).abs() < 1e-12);
        // Leading eigenvector is uniform up to sign; the sign convention
        // makes it positive.
        let lead = model.spectrum().eigenvector(0);
        for entry in lead {
            assert!((entry - (1.0 / (m as f64).sqrt())).abs() < 1e-9);
        }
    }

    #[test]
    fn b_value_vanishes_at_case_boundary() {
        // When the node's diagonal entry is zero every applicable branch
        // returns zero, so the case split is continuous there.
        let split = PairSplit {
            nu_plus: 0.7,
            nu_minus: -0.4,
            nu_max: 0.7,
        };
        assert_eq!(b_value(&split, 1.0, 0.0), 0.0);
        assert_eq!(b_value(&split, -1.0, 0.0), 0.0);
        assert_eq!(b_value(&split, 0.0, 0.0), 0.0);
    }

    #[test]
    fn epsilon_c_nonnegative_on_er_samples() {
        let mut stream = RandomStream::new(23);
        for _ in 0..10 {
            let g = Graph::erdos_renyi(10, 0.3, &mut stream).unwrap();
            let model = ConsensusModel::new(&g, 0.9).unwrap();
            for &e in model.epsilon_c() {
                assert!(e >= 0.0);
            }
        }
    }

    /// Truncated-series oracle for both measures: every closed-form factor
    /// x/(1-x) is replaced by the partial geometric sum, capped at 1e6 terms
    /// with early exit once the residual bound drops below 1e-12.
    pub(super) fn epsilon_series_oracle(spectrum: &SymmetricSpectrum) -> (f64, Vec<f64>) {
        const CAP: usize = 1_000_000;
        fn geometric_tail(x: f64) -> f64 {
            let mut sum = 0.0;
            let mut term = x;
            for _ in 0..CAP {
                sum += term;
                term *= x;
                if term / (1.0 - x) < 1e-12 {
                    break;
                }
            }
            sum
        }

        let m = spectrum.order();
        let en = (m as f64).sqrt()
            * spectrum.eigenvalues[1..]
                .iter()
                .map(|l| geometric_tail(l.abs()))
                .sum::<f64>();

        let lambdas = &spectrum.eigenvalues;
        let vectors: Vec<Vec<f64>> = (0..m).map(|c| spectrum.eigenvector(c)).collect();
        let mut ec = vec![0.0; m];
        for p in 0..m {
            for j in 1..m {
                let x = (lambdas[p] * lambdas[j]).abs();
                if x == 0.0 {
                    continue;
                }
                let weight = geometric_tail(x);
                let split = pair_split(&vectors[p], &vectors[j]);
                let lambda_product = lambdas[p] * lambdas[j];
                for (k, acc) in ec.iter_mut().enumerate() {
                    let node_entry = vectors[p][k] * vectors[j][k];
                    *acc += weight * b_value(&split, lambda_product, node_entry);
                }
            }
        }
        for value in ec.iter_mut() {
            *value *= m as f64;
        }
        (en, ec)
    }
}
