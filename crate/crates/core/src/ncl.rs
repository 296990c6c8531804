//! Node clique learning.
//!
//! Each node's clique is found by spreading one unit of information from it
//! along weighted out-edges. A node that receives more than `lambda` becomes
//! privileged and passes information on; the privileged set is the clique.
//! Cliques are then compared pairwise (row and column overlap of the clique
//! matrix) to give a coherence matrix, whose row means are the node
//! collectiveness values and whose overall mean is the graph collectiveness.

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedDigraph};

/// How a ready node combines the weighted information of its privileged
/// in-neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Avg,
    Min,
}

/// Clique comparison rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Intersection over union of rows and of columns (symmetric).
    Ncl1,
    /// Intersection over the reference row/column size (asymmetric).
    Ncl2,
}

/// When newly computed privileges become visible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrivilegeUpdate {
    /// Right after each ready node is computed, so later nodes of the same
    /// iteration already see it.
    #[default]
    Immediate,
    /// After every ready node of the iteration has been computed.
    Batched,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NclConfig {
    pub lambda: f64,
    pub strategy: Strategy,
    pub scheme: Scheme,
    pub update: PrivilegeUpdate,
}

impl NclConfig {
    pub fn new(lambda: f64, strategy: Strategy, scheme: Scheme) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self {
            lambda,
            strategy,
            scheme,
            update: PrivilegeUpdate::Immediate,
        })
    }

    pub fn with_update(mut self, update: PrivilegeUpdate) -> Self {
        self.update = update;
        self
    }

    pub fn variant(&self) -> Variant {
        Variant::from_parts(self.scheme, self.strategy)
    }

    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)
    }
}

impl Default for NclConfig {
    fn default() -> Self {
        Self {
            lambda: 0.7,
            strategy: Strategy::Avg,
            scheme: Scheme::Ncl1,
            update: PrivilegeUpdate::Immediate,
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::param(format!("lambda = {lambda} outside [0, 1]")))
    }
}

/// The four named scheme/strategy combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Ncl1Avg,
    Ncl2Avg,
    Ncl1Min,
    Ncl2Min,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Ncl1Avg,
        Variant::Ncl2Avg,
        Variant::Ncl1Min,
        Variant::Ncl2Min,
    ];

    pub fn from_parts(scheme: Scheme, strategy: Strategy) -> Self {
        match (scheme, strategy) {
            (Scheme::Ncl1, Strategy::Avg) => Variant::Ncl1Avg,
            (Scheme::Ncl2, Strategy::Avg) => Variant::Ncl2Avg,
            (Scheme::Ncl1, Strategy::Min) => Variant::Ncl1Min,
            (Scheme::Ncl2, Strategy::Min) => Variant::Ncl2Min,
        }
    }

    pub fn scheme(self) -> Scheme {
        match self {
            Variant::Ncl1Avg | Variant::Ncl1Min => Scheme::Ncl1,
            Variant::Ncl2Avg | Variant::Ncl2Min => Scheme::Ncl2,
        }
    }

    pub fn strategy(self) -> Strategy {
        match self {
            Variant::Ncl1Avg | Variant::Ncl2Avg => Strategy::Avg,
            Variant::Ncl1Min | Variant::Ncl2Min => Strategy::Min,
        }
    }

    pub fn config(self, lambda: f64) -> Result<NclConfig> {
        NclConfig::new(lambda, self.strategy(), self.scheme())
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Ncl1Avg => "NCL1_avg",
            Variant::Ncl2Avg => "NCL2_avg",
            Variant::Ncl1Min => "NCL1_min",
            Variant::Ncl2Min => "NCL2_min",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "avg" => Ok(Strategy::Avg),
            "min" => Ok(Strategy::Min),
            _ => Err(Error::param(format!("unknown strategy {s:?}"))),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ncl1" => Ok(Scheme::Ncl1),
            "ncl2" => Ok(Scheme::Ncl2),
            _ => Err(Error::param(format!("unknown scheme {s:?}"))),
        }
    }
}

/// Working state of one information-spreading pass. Reusable across core
/// nodes of the same graph size.
#[derive(Debug, Clone)]
pub struct SpreadState {
    information: Vec<f64>,
    privileged: Vec<bool>,
    renewed: Vec<bool>,
    iteration: usize,
    ready_set: Vec<NodeId>,
    next_ready: Vec<NodeId>,
    queued: Vec<bool>,
    pending: Vec<NodeId>,
}

impl SpreadState {
    pub fn new(n_nodes: usize) -> Self {
        Self {
            information: vec![0.0; n_nodes],
            privileged: vec![false; n_nodes],
            renewed: vec![false; n_nodes],
            iteration: 0,
            ready_set: Vec::new(),
            next_ready: Vec::new(),
            queued: vec![false; n_nodes],
            pending: Vec::new(),
        }
    }

    pub fn information(&self) -> &[f64] {
        &self.information
    }

    pub fn privileged(&self) -> &[bool] {
        &self.privileged
    }

    pub fn renewed(&self) -> &[bool] {
        &self.renewed
    }

    /// Number of completed spreading iterations.
    pub fn iterations(&self) -> usize {
        self.iteration
    }

    /// The privileged nodes, ascending.
    pub fn clique(&self) -> Vec<NodeId> {
        (0..self.privileged.len()).filter(|&x| self.privileged[x]).collect()
    }

    fn reset(&mut self, n_nodes: usize) {
        if self.information.len() != n_nodes {
            *self = Self::new(n_nodes);
            return;
        }
        self.information.fill(0.0);
        self.privileged.fill(false);
        self.renewed.fill(false);
        self.iteration = 0;
        self.ready_set.clear();
    }

    /// Queues the unrenewed out-neighbours of a freshly privileged node.
    fn enqueue_successors(&mut self, g: &WeightedDigraph, x: NodeId) {
        for &y in g.out_edges(x).0 {
            if !self.renewed[y] && !self.queued[y] {
                self.queued[y] = true;
                self.next_ready.push(y);
            }
        }
    }

    fn run(&mut self, g: &WeightedDigraph, core: NodeId, lambda: f64, strategy: Strategy, update: PrivilegeUpdate) {
        self.reset(g.n_nodes());
        self.information[core] = 1.0;
        self.privileged[core] = true;
        self.renewed[core] = true;

        self.next_ready.clear();
        self.enqueue_successors(g, core);
        loop {
            // Nodes renewed after being queued are no longer ready.
            std::mem::swap(&mut self.ready_set, &mut self.next_ready);
            self.next_ready.clear();
            for &z in &self.ready_set {
                self.queued[z] = false;
            }
            let renewed = &self.renewed;
            self.ready_set.retain(|&z| !renewed[z]);
            if self.ready_set.is_empty() {
                break;
            }
            self.ready_set.sort_unstable();
            self.iteration += 1;
            self.pending.clear();

            for idx in 0..self.ready_set.len() {
                let z = self.ready_set[idx];
                self.renewed[z] = true;
                let value = self.gather(g, z, strategy);
                self.information[z] = value;
                if value > lambda {
                    match update {
                        PrivilegeUpdate::Immediate => {
                            self.privileged[z] = true;
                            self.enqueue_successors(g, z);
                        }
                        PrivilegeUpdate::Batched => self.pending.push(z),
                    }
                }
            }
            for idx in 0..self.pending.len() {
                let z = self.pending[idx];
                self.privileged[z] = true;
                self.enqueue_successors(g, z);
            }
        }
    }

    /// Information reaching `z` from its currently privileged in-neighbours.
    #[inline]
    fn gather(&self, g: &WeightedDigraph, z: NodeId, strategy: Strategy) -> f64 {
        let (sources, weights) = g.in_edges(z);
        match strategy {
            Strategy::Avg => {
                let mut sum = 0.0;
                let mut count = 0usize;
                for (&x, &w) in sources.iter().zip(weights) {
                    if self.privileged[x] {
                        sum += w * self.information[x];
                        count += 1;
                    }
                }
                debug_assert!(count > 0, "ready node without privileged in-neighbour");
                sum / count as f64
            }
            Strategy::Min => sources
                .iter()
                .zip(weights)
                .filter(|(&x, _)| self.privileged[x])
                .map(|(&x, &w)| w * self.information[x])
                .fold(f64::INFINITY, f64::min),
        }
    }
}

fn check_graph(g: &WeightedDigraph) -> Result<()> {
    if g.weights_in_unit_interval() {
        Ok(())
    } else {
        Err(Error::InvalidInput(
            "edge weights must lie in [0, 1]; clamp the graph first".into(),
        ))
    }
}

/// Runs one spreading pass from `core` and returns the final state.
pub fn spread(
    g: &WeightedDigraph,
    core: NodeId,
    lambda: f64,
    strategy: Strategy,
    update: PrivilegeUpdate,
) -> Result<SpreadState> {
    if core >= g.n_nodes() {
        return Err(Error::Index {
            index: core,
            n_nodes: g.n_nodes(),
        });
    }
    check_lambda(lambda)?;
    check_graph(g)?;
    let mut state = SpreadState::new(g.n_nodes());
    state.run(g, core, lambda, strategy, update);
    Ok(state)
}

/// The clique of `core`: every node privileged by spreading, core included.
pub fn learn_clique(
    g: &WeightedDigraph,
    core: NodeId,
    lambda: f64,
    strategy: Strategy,
) -> Result<BTreeSet<NodeId>> {
    let state = spread(g, core, lambda, strategy, PrivilegeUpdate::Immediate)?;
    Ok(state.clique().into_iter().collect())
}

/// Square binary matrix stored as packed bit rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl CliqueMatrix {
    pub fn zeros(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Self {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    /// Builds a matrix from dense boolean rows.
    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &b) in row.iter().enumerate() {
                if b {
                    m.set(i, j);
                }
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    /// Members of row `i`, ascending.
    pub fn row_members(&self, i: usize) -> Vec<NodeId> {
        (0..self.n).filter(|&j| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                if self.get(i, j) {
                    t.set(j, i);
                }
            }
        }
        t
    }

    pub fn row_sums(&self) -> Vec<usize> {
        (0..self.n).map(|i| popcount(self.row(i))).collect()
    }

    pub fn col_sums(&self) -> Vec<usize> {
        self.transpose().row_sums()
    }

    pub fn is_symmetric(&self) -> bool {
        *self == self.transpose()
    }
}

fn popcount(a: &[u64]) -> usize {
    a.iter().map(|w| w.count_ones() as usize).sum()
}

#[inline]
fn intersection(a: &[u64], b: &[u64]) -> usize {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as usize).sum()
}

/// Clique matrix of `g`: row `i` is the clique of node `i`.
pub fn learn_cliques(g: &WeightedDigraph, cfg: &NclConfig) -> Result<CliqueMatrix> {
    cfg.validate()?;
    check_graph(g)?;
    let n = g.n_nodes();
    let mut c = CliqueMatrix::zeros(n);
    if n == 0 {
        return Ok(c);
    }
    let words = c.words;
    c.bits
        .par_chunks_mut(words)
        .enumerate()
        .for_each_init(
            || SpreadState::new(n),
            |state, (core, row)| {
                state.run(g, core, cfg.lambda, cfg.strategy, cfg.update);
                for (x, &p) in state.privileged.iter().enumerate() {
                    if p {
                        row[x / 64] |= 1 << (x % 64);
                    }
                }
            },
        );
    Ok(c)
}

/// Dense pairwise coherence matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceMatrix {
    n: usize,
    z: Vec<f64>,
}

impl CoherenceMatrix {
    /// Wraps a row-major `n x n` matrix.
    pub fn from_dense(n: usize, z: Vec<f64>) -> Result<Self> {
        if z.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "{} entries for a {n}x{n} matrix",
                z.len()
            )));
        }
        Ok(Self { n, z })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.z[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.z[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.z
    }
}

/// Compares cliques pairwise.
///
/// Every row and column of `c` must be non-empty; matrices from
/// [`learn_cliques`] always satisfy this because each core is in its own
/// clique.
pub fn coherence(c: &CliqueMatrix, scheme: Scheme) -> Result<CoherenceMatrix> {
    let n = c.n;
    let ct = c.transpose();
    let row_sums = c.row_sums();
    let col_sums = ct.row_sums();
    if let Some(i) = row_sums.iter().position(|&s| s == 0) {
        return Err(Error::Invariant(format!("clique row {i} is empty")));
    }
    if let Some(j) = col_sums.iter().position(|&s| s == 0) {
        return Err(Error::Invariant(format!("clique column {j} is empty")));
    }

    let mut z = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let rows = intersection(c.row(i), c.row(j));
            let cols = intersection(ct.row(i), ct.row(j));
            match scheme {
                Scheme::Ncl1 => {
                    let j1 = rows as f64 / (row_sums[i] + row_sums[j] - rows) as f64;
                    let j2 = cols as f64 / (col_sums[i] + col_sums[j] - cols) as f64;
                    let v = (j1 + j2) / 2.0;
                    z[i * n + j] = v;
                    z[j * n + i] = v;
                }
                Scheme::Ncl2 => {
                    z[i * n + j] =
                        (rows as f64 / row_sums[i] as f64 + cols as f64 / col_sums[i] as f64) / 2.0;
                    z[j * n + i] =
                        (rows as f64 / row_sums[j] as f64 + cols as f64 / col_sums[j] as f64) / 2.0;
                }
            }
        }
    }
    Ok(CoherenceMatrix { n, z })
}

/// Mean coherence of each node with every other node.
pub fn node_collectiveness(z: &CoherenceMatrix) -> Result<Vec<f64>> {
    if z.n < 2 {
        return Err(Error::param("node collectiveness needs at least 2 nodes"));
    }
    let denom = (z.n - 1) as f64;
    Ok((0..z.n).map(|i| z.row(i).iter().sum::<f64>() / denom).collect())
}

/// Mean of the node collectiveness vector.
pub fn graph_collectiveness(phi: &[f64]) -> Result<f64> {
    if phi.is_empty() {
        return Err(Error::param("graph collectiveness of an empty vector"));
    }
    Ok(phi.iter().sum::<f64>() / phi.len() as f64)
}

/// Everything produced by one collectiveness measurement.
#[derive(Debug, Clone)]
pub struct CollectivenessReport {
    pub cliques: CliqueMatrix,
    pub coherence: CoherenceMatrix,
    pub phi: Vec<f64>,
    pub capital_phi: f64,
}

/// Cliques, coherence, node collectiveness and graph collectiveness of `g`.
pub fn measure(g: &WeightedDigraph, cfg: &NclConfig) -> Result<CollectivenessReport> {
    let cliques = learn_cliques(g, cfg)?;
    let coherence = coherence(&cliques, cfg.scheme)?;
    let phi = node_collectiveness(&coherence)?;
    let capital_phi = graph_collectiveness(&phi)?;
    Ok(CollectivenessReport {
        cliques,
        coherence,
        phi,
        capital_phi,
    })
}

/// Graph collectiveness under both schemes from one set of cliques,
/// returned as `[ncl1, ncl2]`.
pub fn graph_collectiveness_both(g: &WeightedDigraph, lambda: f64, strategy: Strategy) -> Result<[f64; 2]> {
    let cfg = NclConfig::new(lambda, strategy, Scheme::Ncl1)?;
    let c = learn_cliques(g, &cfg)?;
    let mut out = [0.0; 2];
    for (slot, scheme) in out.iter_mut().zip([Scheme::Ncl1, Scheme::Ncl2]) {
        let z = coherence(&c, scheme)?;
        *slot = graph_collectiveness(&node_collectiveness(&z)?)?;
    }
    Ok(out)
}

/// Writes the clique matrix as `0`/`1` rows under a `# N=<n>` header.
pub fn write_clique_csv(c: &CliqueMatrix, path: &Path) -> Result<()> {
    let mut body = format!("# N={}\n", c.n);
    for i in 0..c.n {
        let row: Vec<&str> = (0..c.n).map(|j| if c.get(i, j) { "1" } else { "0" }).collect();
        body.push_str(&row.join(","));
        body.push('\n');
    }
    write_file(path, &body)
}

/// Writes the coherence matrix row-major under a `# N=<n>` header.
pub fn write_coherence_csv(z: &CoherenceMatrix, path: &Path) -> Result<()> {
    let mut body = format!("# N={}\n", z.n);
    for i in 0..z.n {
        let row: Vec<String> = z.row(i).iter().map(|&v| crate::fmt::sig(v, 12)).collect();
        body.push_str(&row.join(","));
        body.push('\n');
    }
    write_file(path, &body)
}

pub(crate) fn write_file(path: &Path, body: &str) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    out.write_all(body.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_circle, make_rectilinear, prune_zero_edges, reachable_set, Direction};
    use proptest::prelude::*;
    use super::Strategy;
    use proptest::strategy::Strategy as PropStrategy;

    fn cfg(lambda: f64, strategy: Strategy, scheme: Scheme) -> NclConfig {
        NclConfig::new(lambda, strategy, scheme).unwrap()
    }

    #[test]
    fn chain_cliques_are_suffixes() {
        let g = make_rectilinear(5, Direction::One, 1.0).unwrap();
        for i in 0..5 {
            let c = learn_clique(&g, i, 0.7, Strategy::Avg).unwrap();
            assert_eq!(c, (i..5).collect());
        }
    }

    #[test]
    fn lambda_one_keeps_only_the_core() {
        let g = make_circle(6, 1.0).unwrap();
        for s in [Strategy::Avg, Strategy::Min] {
            for i in 0..6 {
                assert_eq!(learn_clique(&g, i, 1.0, s).unwrap(), BTreeSet::from([i]));
            }
        }
    }

    #[test]
    fn ring_decay_under_min_strategy() {
        // 0.9^4 > 0.6 >= 0.9^5
        let g = make_circle(10, 0.9).unwrap();
        assert_eq!(
            learn_clique(&g, 0, 0.6, Strategy::Min).unwrap(),
            BTreeSet::from([0, 1, 2, 3, 4])
        );
        assert_eq!(
            learn_clique(&g, 7, 0.6, Strategy::Min).unwrap(),
            BTreeSet::from([7, 8, 9, 0, 1])
        );
    }

    #[test]
    fn lambda_zero_reaches_the_component() {
        let g = crate::graph::WeightedDigraph::from_edges(
            5,
            &[(0, 1, 0.5), (1, 2, 0.0), (2, 3, 1.0), (1, 4, 0.2), (4, 0, 0.9)],
        )
        .unwrap();
        let pruned = prune_zero_edges(&g);
        for i in 0..5 {
            assert_eq!(
                learn_clique(&pruned, i, 0.0, Strategy::Avg).unwrap(),
                reachable_set(&pruned, i).unwrap()
            );
        }
    }

    #[test]
    fn mid_iteration_privileges_are_visible() {
        // Core 0 feeds 1 and 2; 1 also feeds 2. Node 2 is processed after 1
        // in the same iteration and averages over both.
        let g = crate::graph::WeightedDigraph::from_edges(3, &[(0, 1, 0.9), (0, 2, 0.5), (1, 2, 0.9)])
            .unwrap();
        let s = spread(&g, 0, 0.6, Strategy::Avg, PrivilegeUpdate::Immediate).unwrap();
        assert_eq!(s.iterations(), 1);
        assert!((s.information()[2] - (0.5 + 0.81) / 2.0).abs() < 1e-15);
        assert!(s.privileged()[2]);

        let b = spread(&g, 0, 0.6, Strategy::Avg, PrivilegeUpdate::Batched).unwrap();
        assert_eq!(b.information()[2], 0.5);
        assert!(!b.privileged()[2]);
    }

    #[test]
    fn renewed_nodes_are_final() {
        // Node 2 is ready in iteration 1 via the weak edge and fails; the
        // strong path through 1 arrives too late to revisit it.
        let g = crate::graph::WeightedDigraph::from_edges(
            4,
            &[(0, 2, 0.1), (0, 3, 1.0), (3, 1, 1.0), (1, 2, 1.0)],
        )
        .unwrap();
        let c = learn_clique(&g, 0, 0.5, Strategy::Avg).unwrap();
        assert_eq!(c, BTreeSet::from([0, 1, 3]));
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = make_circle(3, 1.0).unwrap();
        assert!(matches!(learn_clique(&g, 3, 0.5, Strategy::Avg), Err(Error::Index { .. })));
        assert!(matches!(learn_clique(&g, 0, 1.5, Strategy::Avg), Err(Error::Parameter(_))));
        assert!(NclConfig::new(f64::NAN, Strategy::Avg, Scheme::Ncl1).is_err());
        let heavy = crate::graph::WeightedDigraph::from_edges(2, &[(0, 1, 1.5)]).unwrap();
        assert!(matches!(learn_clique(&heavy, 0, 0.5, Strategy::Avg), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn clique_matrix_shapes() {
        let chain = make_rectilinear(6, Direction::One, 1.0).unwrap();
        let c = learn_cliques(&chain, &cfg(0.3, Strategy::Avg, Scheme::Ncl1)).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(c.get(i, j), j >= i);
            }
        }
        let ring = make_circle(6, 1.0).unwrap();
        let c = learn_cliques(&ring, &cfg(0.99, Strategy::Min, Scheme::Ncl1)).unwrap();
        assert!(c.row_sums().iter().all(|&s| s == 6));
        let c = learn_cliques(&ring, &cfg(1.0, Strategy::Avg, Scheme::Ncl1)).unwrap();
        for i in 0..6 {
            assert_eq!(c.row_members(i), vec![i]);
        }
    }

    #[test]
    fn coherence_of_full_and_identity_cliques() {
        let full = CliqueMatrix::from_rows(&vec![vec![true; 4]; 4]).unwrap();
        let ident =
            CliqueMatrix::from_rows(&(0..4).map(|i| (0..4).map(|j| i == j).collect()).collect::<Vec<_>>())
                .unwrap();
        for scheme in [Scheme::Ncl1, Scheme::Ncl2] {
            let z = coherence(&full, scheme).unwrap();
            let zi = coherence(&ident, scheme).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    assert_eq!(z.get(i, j), if i == j { 0.0 } else { 1.0 });
                    assert_eq!(zi.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn chain_coherence_pair() {
        let rows: Vec<Vec<bool>> = (0..5).map(|i| (0..5).map(|j| j >= i).collect()).collect();
        let c = CliqueMatrix::from_rows(&rows).unwrap();
        let z = coherence(&c, Scheme::Ncl1).unwrap();
        assert!((z.get(0, 2) - 7.0 / 15.0).abs() < 1e-15);
        // NCL2: row 0 to row 2 = 3/5 over |row 0| ... J'1 = 3/5, J'2 = 1/1
        let z2 = coherence(&c, Scheme::Ncl2).unwrap();
        assert!((z2.get(0, 2) - (3.0 / 5.0 + 1.0) / 2.0).abs() < 1e-15);
        assert!((z2.get(2, 0) - (1.0 + 1.0 / 3.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn coherence_rejects_empty_rows() {
        let c = CliqueMatrix::from_rows(&[vec![true, false], vec![false, false]]).unwrap();
        assert!(matches!(coherence(&c, Scheme::Ncl1), Err(Error::Invariant(_))));
        let c = CliqueMatrix::from_rows(&[vec![true, false], vec![true, false]]).unwrap();
        assert!(matches!(coherence(&c, Scheme::Ncl2), Err(Error::Invariant(_))));
    }

    #[test]
    fn collectiveness_aggregation() {
        let z = CoherenceMatrix::from_dense(3, vec![0.0, 0.4, 0.8, 0.4, 0.0, 0.0, 0.8, 0.0, 0.0]).unwrap();
        let phi = node_collectiveness(&z).unwrap();
        assert!((phi[0] - 0.6).abs() < 1e-15);
        let ones = CoherenceMatrix::from_dense(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(node_collectiveness(&ones).unwrap(), vec![1.0, 1.0]);
        let zeros = CoherenceMatrix::from_dense(2, vec![0.0; 4]).unwrap();
        assert_eq!(node_collectiveness(&zeros).unwrap(), vec![0.0, 0.0]);
        let single = CoherenceMatrix::from_dense(1, vec![0.0]).unwrap();
        assert!(node_collectiveness(&single).is_err());
        assert!(graph_collectiveness(&[]).is_err());
        assert_eq!(graph_collectiveness(&[0.2, 0.4]).unwrap(), 0.30000000000000004);
    }

    #[test]
    fn toy_graph_collectiveness() {
        let chain = make_rectilinear(5, Direction::One, 1.0).unwrap();
        let ncl1 = measure(&chain, &cfg(0.7, Strategy::Avg, Scheme::Ncl1)).unwrap();
        let ncl2 = measure(&chain, &cfg(0.7, Strategy::Avg, Scheme::Ncl2)).unwrap();
        assert!((ncl1.capital_phi - 0.5).abs() < 1e-12);
        assert!((ncl2.capital_phi - 0.75).abs() < 1e-12);

        let bi = make_rectilinear(5, Direction::Bi, 1.0).unwrap();
        let ring = make_circle(5, 1.0).unwrap();
        for scheme in [Scheme::Ncl1, Scheme::Ncl2] {
            assert!((measure(&bi, &cfg(0.7, Strategy::Avg, scheme)).unwrap().capital_phi - 1.0).abs() < 1e-12);
            assert!((measure(&ring, &cfg(0.7, Strategy::Min, scheme)).unwrap().capital_phi - 1.0).abs() < 1e-12);
            assert_eq!(measure(&ring, &cfg(1.0, Strategy::Avg, scheme)).unwrap().capital_phi, 0.0);
        }
        assert_eq!(
            graph_collectiveness_both(&chain, 0.7, Strategy::Avg).unwrap(),
            [ncl1.capital_phi, ncl2.capital_phi]
        );
    }

    #[test]
    fn parallel_particles_are_fully_collective() {
        let g = crate::graph::build_knn_graph(
            &[[0.0, 0.0], [0.5, 0.0]],
            &[[0.03, 0.0], [0.06, 0.0]],
            1,
            crate::graph::Metric::Euclidean,
        )
        .unwrap();
        let r = measure(&g, &NclConfig::default()).unwrap();
        assert_eq!(r.capital_phi, 1.0);
    }

    #[test]
    fn symmetric_weights_can_give_asymmetric_cliques() {
        let w = [(0, 1, 1.0), (1, 2, 0.75), (0, 2, 0.5)];
        let edges: Vec<_> = w.iter().flat_map(|&(a, b, x)| [(a, b, x), (b, a, x)]).collect();
        let g = WeightedDigraph::from_edges(3, &edges).unwrap();
        for s in [Strategy::Avg, Strategy::Min] {
            let c = learn_cliques(&g, &cfg(0.7, s, Scheme::Ncl1)).unwrap();
            assert_eq!(c.row_members(1), vec![0, 1]);
            assert_eq!(c.row_members(2), vec![1, 2]);
            assert!(!c.is_symmetric());
        }
    }

    #[test]
    fn ncl2_chain_phi_is_uniform() {
        for n in 2..12 {
            let chain = make_rectilinear(n, Direction::One, 1.0).unwrap();
            let r = measure(&chain, &cfg(0.7, Strategy::Avg, Scheme::Ncl2)).unwrap();
            assert!(r.phi.iter().all(|p| (p - 0.75).abs() < 1e-12), "{:?}", r.phi);
        }
    }

    #[test]
    fn csv_exports() {
        let dir = tempfile::tempdir().unwrap();
        let chain = make_rectilinear(3, Direction::One, 1.0).unwrap();
        let r = measure(&chain, &NclConfig::default()).unwrap();
        write_clique_csv(&r.cliques, &dir.path().join("c.csv")).unwrap();
        write_coherence_csv(&r.coherence, &dir.path().join("z.csv")).unwrap();
        let c = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
        assert_eq!(c, "# N=3\n1,1,1\n0,1,1\n0,0,1\n");
        let z = std::fs::read_to_string(dir.path().join("z.csv")).unwrap();
        assert!(z.starts_with("# N=3\n0.00000000000,"));
    }

    fn arb_clique_matrix() -> impl PropStrategy<Value = CliqueMatrix> {
        (1usize..20)
            .prop_flat_map(|n| proptest::collection::vec(proptest::collection::vec(any::<bool>(), n), n))
            .prop_map(|mut rows| {
                // Force non-empty rows and columns.
                for (i, row) in rows.iter_mut().enumerate() {
                    row[i] = true;
                }
                CliqueMatrix::from_rows(&rows).unwrap()
            })
    }

    proptest! {
        #[test]
        fn ncl1_coherence_is_symmetric(c in arb_clique_matrix()) {
            let z = coherence(&c, Scheme::Ncl1).unwrap();
            for i in 0..c.n() {
                prop_assert_eq!(z.get(i, i), 0.0);
                for j in 0..c.n() {
                    prop_assert_eq!(z.get(i, j), z.get(j, i));
                }
            }
        }

        #[test]
        fn coherence_in_unit_interval(c in arb_clique_matrix()) {
            for scheme in [Scheme::Ncl1, Scheme::Ncl2] {
                let z = coherence(&c, scheme).unwrap();
                prop_assert!(z.values().iter().all(|v| (0.0..=1.0).contains(v)));
            }
        }

        #[test]
        fn symmetric_cliques_compare_rows_like_columns(c in arb_clique_matrix()) {
            // Symmetrize, then J1 = J2 and J'1 = J'2, so Z equals either half.
            let n = c.n();
            let rows: Vec<Vec<bool>> = (0..n)
                .map(|i| (0..n).map(|j| c.get(i, j) || c.get(j, i)).collect())
                .collect();
            let s = CliqueMatrix::from_rows(&rows).unwrap();
            prop_assert!(s.is_symmetric());
            let z1 = coherence(&s, Scheme::Ncl1).unwrap();
            let z2 = coherence(&s, Scheme::Ncl2).unwrap();
            let sums = s.row_sums();
            for (i, &sum) in sums.iter().enumerate() {
                for j in 0..n {
                    if i == j { continue; }
                    let inter = (0..n).filter(|&k| s.get(i, k) && s.get(j, k)).count() as f64;
                    let union = (0..n).filter(|&k| s.get(i, k) || s.get(j, k)).count() as f64;
                    prop_assert!((z1.get(i, j) - inter / union).abs() < 1e-15);
                    prop_assert!((z2.get(i, j) - inter / sum as f64).abs() < 1e-15);
                }
            }
        }

        #[test]
        fn spreading_stays_bounded(
            n in 2usize..16,
            raw in proptest::collection::vec((0usize..16, 0usize..16, 0.0f64..=1.0), 0..60),
            lambda in 0.0f64..=1.0,
            min in any::<bool>(),
        ) {
            let mut seen = BTreeSet::new();
            let edges: Vec<_> = raw.into_iter()
                .filter(|&(s, d, _)| s < n && d < n && s != d && seen.insert((s, d)))
                .collect();
            let g = crate::graph::WeightedDigraph::from_edges(n, &edges).unwrap();
            let strategy = if min { Strategy::Min } else { Strategy::Avg };
            for core in 0..n {
                let s = spread(&g, core, lambda, strategy, PrivilegeUpdate::Immediate).unwrap();
                prop_assert!(s.iterations() <= n);
                prop_assert!(s.information().iter().all(|v| (0.0..=1.0).contains(v)));
                prop_assert!(s.privileged()[core]);
                for x in 0..n {
                    if s.privileged()[x] { prop_assert!(s.renewed()[x]); }
                    if x != core && s.privileged()[x] { prop_assert!(s.information()[x] > lambda); }
                }
                let renewals = s.renewed().iter().filter(|&&r| r).count();
                prop_assert!(renewals <= n);
            }
        }
    }
}
