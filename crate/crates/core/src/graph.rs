//! Directed weighted graphs: K-NN motion graphs, toy generators and the
//! edge-list file format.

use std::collections::{BTreeSet, VecDeque};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fmt;

/// Dense 0-based node index.
pub type NodeId = usize;

/// A 2-D point or vector.
pub type Vec2 = [f64; 2];

/// Distance used when selecting nearest neighbours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Euclidean,
    /// Periodic square domain of the given side length.
    Torus { side: f64 },
}

impl Metric {
    pub fn distance_sq(&self, a: Vec2, b: Vec2) -> f64 {
        let (dx, dy) = match *self {
            Metric::Euclidean => (a[0] - b[0], a[1] - b[1]),
            Metric::Torus { side } => (
                periodic_delta(a[0] - b[0], side),
                periodic_delta(a[1] - b[1], side),
            ),
        };
        dx * dx + dy * dy
    }
}

/// Shortest signed separation on a circle of circumference `side`.
pub(crate) fn periodic_delta(d: f64, side: f64) -> f64 {
    let d = d.rem_euclid(side);
    if d > 0.5 * side {
        d - side
    } else {
        d
    }
}

/// Immutable directed graph with weighted edges, stored as forward and
/// reverse compressed adjacency lists. Neighbour lists are sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    n_nodes: usize,
    out_offsets: Vec<usize>,
    out_targets: Vec<NodeId>,
    out_weights: Vec<f64>,
    in_offsets: Vec<usize>,
    in_sources: Vec<NodeId>,
    in_weights: Vec<f64>,
}

impl WeightedDigraph {
    /// Builds a graph from `(src, dst, weight)` triples.
    ///
    /// Rejects self-loops, duplicate ordered pairs, out-of-range ids and
    /// non-finite weights. Weights outside `[0, 1]` are kept as given; see
    /// [`clamp_weights`].
    pub fn from_edges(n_nodes: usize, edges: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        let mut sorted = edges.to_vec();
        for &(s, d, w) in &sorted {
            if s >= n_nodes {
                return Err(Error::Index { index: s, n_nodes });
            }
            if d >= n_nodes {
                return Err(Error::Index { index: d, n_nodes });
            }
            if s == d {
                return Err(Error::InvalidInput(format!("self-loop on node {s}")));
            }
            if !w.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite weight on edge {s}->{d}")));
            }
        }
        sorted.sort_by_key(|e| (e.0, e.1));
        if let Some(w) = sorted.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::InvalidInput(format!(
                "duplicate edge {}->{}",
                w[0].0, w[0].1
            )));
        }
        Ok(Self::from_sorted_unchecked(n_nodes, &sorted))
    }

    /// `edges` must be sorted by (src, dst), free of duplicates and self-loops.
    fn from_sorted_unchecked(n_nodes: usize, edges: &[(NodeId, NodeId, f64)]) -> Self {
        let mut out_offsets = vec![0usize; n_nodes + 1];
        let mut in_offsets = vec![0usize; n_nodes + 1];
        for &(s, d, _) in edges {
            out_offsets[s + 1] += 1;
            in_offsets[d + 1] += 1;
        }
        for i in 0..n_nodes {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }
        let out_targets = edges.iter().map(|e| e.1).collect();
        let out_weights = edges.iter().map(|e| e.2).collect();

        // Sources arrive in ascending order, so each in-list ends up sorted.
        let mut in_sources = vec![0; edges.len()];
        let mut in_weights = vec![0.0; edges.len()];
        let mut cursor = in_offsets.clone();
        for &(s, d, w) in edges {
            in_sources[cursor[d]] = s;
            in_weights[cursor[d]] = w;
            cursor[d] += 1;
        }
        Self {
            n_nodes,
            out_offsets,
            out_targets,
            out_weights,
            in_offsets,
            in_sources,
            in_weights,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.out_targets.len()
    }

    /// Out-neighbours of `i` as parallel (ids, weights) slices.
    #[inline]
    pub fn out_edges(&self, i: NodeId) -> (&[NodeId], &[f64]) {
        let r = self.out_offsets[i]..self.out_offsets[i + 1];
        (&self.out_targets[r.clone()], &self.out_weights[r])
    }

    /// In-neighbours of `z` as parallel (ids, weights) slices.
    #[inline]
    pub fn in_edges(&self, z: NodeId) -> (&[NodeId], &[f64]) {
        let r = self.in_offsets[z]..self.in_offsets[z + 1];
        (&self.in_sources[r.clone()], &self.in_weights[r])
    }

    pub fn out_degree(&self, i: NodeId) -> usize {
        self.out_offsets[i + 1] - self.out_offsets[i]
    }

    /// All edges as `(src, dst, weight)`, sorted by (src, dst).
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        (0..self.n_nodes).flat_map(move |s| {
            let (t, w) = self.out_edges(s);
            t.iter().zip(w).map(move |(&d, &w)| (s, d, w))
        })
    }

    pub fn weight(&self, src: NodeId, dst: NodeId) -> Option<f64> {
        let (t, w) = self.out_edges(src);
        t.binary_search(&dst).ok().map(|k| w[k])
    }

    pub fn weights_in_unit_interval(&self) -> bool {
        self.out_weights.iter().all(|w| (0.0..=1.0).contains(w))
    }

    fn check_node(&self, i: NodeId) -> Result<()> {
        if i < self.n_nodes {
            Ok(())
        } else {
            Err(Error::Index {
                index: i,
                n_nodes: self.n_nodes,
            })
        }
    }

    fn map_weights(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut g = self.clone();
        for w in g.out_weights.iter_mut().chain(g.in_weights.iter_mut()) {
            *w = f(*w);
        }
        g
    }
}

/// Replaces every weight `w` by `min(1, max(0, w))`.
pub fn clamp_weights(g: &WeightedDigraph) -> WeightedDigraph {
    g.map_weights(|w| w.clamp(0.0, 1.0))
}

/// Removes edges whose weight is exactly zero.
pub fn prune_zero_edges(g: &WeightedDigraph) -> WeightedDigraph {
    let kept: Vec<_> = g.edges().filter(|e| e.2 != 0.0).collect();
    WeightedDigraph::from_sorted_unchecked(g.n_nodes, &kept)
}

/// In-neighbours of `z` with their edge weights, ascending by source id.
pub fn in_neighbors(g: &WeightedDigraph, z: NodeId) -> Result<Vec<(NodeId, f64)>> {
    g.check_node(z)?;
    let (s, w) = g.in_edges(z);
    Ok(s.iter().copied().zip(w.iter().copied()).collect())
}

/// Nodes reachable from `i` along directed edges, `i` included.
pub fn reachable_set(g: &WeightedDigraph, i: NodeId) -> Result<BTreeSet<NodeId>> {
    g.check_node(i)?;
    let mut seen = vec![false; g.n_nodes];
    let mut queue = VecDeque::from([i]);
    seen[i] = true;
    while let Some(x) = queue.pop_front() {
        for &y in g.out_edges(x).0 {
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    Ok((0..g.n_nodes).filter(|&x| seen[x]).collect())
}

/// Cosine similarity of two vectors clamped into `[0, 1]`.
pub fn motion_weight(a: Vec2, b: Vec2) -> f64 {
    let dot = a[0] * b[0] + a[1] * b[1];
    let norm = (a[0] * a[0] + a[1] * a[1]).sqrt() * (b[0] * b[0] + b[1] * b[1]).sqrt();
    (dot / norm).clamp(0.0, 1.0)
}

/// K-nearest-neighbour motion graph.
///
/// Node `i` gets an edge to each of its `k` spatially nearest other points
/// under `metric` (distance ties go to the lower id). The edge weight is the
/// velocity cosine clamped at zero, so zero-weight edges are kept.
pub fn build_knn_graph(
    positions: &[Vec2],
    velocities: &[Vec2],
    k: usize,
    metric: Metric,
) -> Result<WeightedDigraph> {
    let n = positions.len();
    if velocities.len() != n {
        return Err(Error::InvalidInput(format!(
            "{n} positions but {} velocities",
            velocities.len()
        )));
    }
    if n < 2 {
        return Err(Error::param("K-NN graph needs at least 2 points"));
    }
    if k == 0 || k > n - 1 {
        return Err(Error::param(format!("K = {k} outside 1..={}", n - 1)));
    }
    if let Metric::Torus { side } = metric {
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::param(format!("torus side {side} must be positive")));
        }
    }
    for (i, (p, v)) in positions.iter().zip(velocities).enumerate() {
        if !p.iter().chain(v).all(|c| c.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite coordinate at point {i}")));
        }
        if v[0] == 0.0 && v[1] == 0.0 {
            return Err(Error::InvalidInput(format!("zero velocity at point {i}")));
        }
    }

    let mut edges = Vec::with_capacity(n * k);
    let mut candidates: Vec<(f64, NodeId)> = Vec::with_capacity(n - 1);
    let mut chosen: Vec<NodeId> = Vec::with_capacity(k);
    let by_distance_then_id = |a: &(f64, NodeId), b: &(f64, NodeId)| {
        a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
    };
    for i in 0..n {
        candidates.clear();
        candidates.extend(
            (0..n)
                .filter(|&j| j != i)
                .map(|j| (metric.distance_sq(positions[i], positions[j]), j)),
        );
        if k < candidates.len() {
            candidates.select_nth_unstable_by(k - 1, by_distance_then_id);
        }
        chosen.clear();
        chosen.extend(candidates[..k].iter().map(|c| c.1));
        chosen.sort_unstable();
        edges.extend(
            chosen
                .iter()
                .map(|&j| (i, j, motion_weight(velocities[i], velocities[j]))),
        );
    }
    Ok(WeightedDigraph::from_sorted_unchecked(n, &edges))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    One,
    Bi,
}

/// Chain `0 -> 1 -> ... -> n-1`, optionally with reverse edges.
pub fn make_rectilinear(n: usize, direction: Direction, w: f64) -> Result<WeightedDigraph> {
    if n == 0 {
        return Err(Error::param("rectilinear graph needs at least one node"));
    }
    let mut edges = Vec::new();
    for i in 0..n - 1 {
        edges.push((i, i + 1, w));
        if direction == Direction::Bi {
            edges.push((i + 1, i, w));
        }
    }
    WeightedDigraph::from_edges(n, &edges)
}

/// Directed ring `i -> (i + 1) mod n`.
pub fn make_circle(n: usize, w: f64) -> Result<WeightedDigraph> {
    if n < 2 {
        return Err(Error::param("circle graph needs at least two nodes"));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, w)).collect();
    WeightedDigraph::from_edges(n, &edges)
}

/// Writes the `src,dst,weight` edge-list format.
pub fn write_edge_list(g: &WeightedDigraph, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut body = format!("src,dst,weight\n# nodes={}\n", g.n_nodes);
    for (s, d, w) in g.edges() {
        body.push_str(&format!("{s},{d},{}\n", fmt::sig(w, 10)));
    }
    out.write_all(body.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

/// Reads the `src,dst,weight` edge-list format.
///
/// The node count is `1 + max id`, or the value of a `# nodes=N` line when
/// present.
pub fn read_edge_list(path: &Path) -> Result<WeightedDigraph> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut declared: Option<usize> = None;
    let mut edges = Vec::new();
    let mut seen_header = false;
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let first = rec.get(0).unwrap_or("");
        if let Some(comment) = first.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("nodes=") {
                let n = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(path, line, format!("bad node count {v:?}")))?;
                declared = Some(n);
            }
            continue;
        }
        if rec.len() == 1 && first.is_empty() {
            continue;
        }
        if !seen_header {
            if rec.iter().collect::<Vec<_>>() != ["src", "dst", "weight"] {
                return Err(Error::parse(path, line, "expected header `src,dst,weight`"));
            }
            seen_header = true;
            continue;
        }
        if rec.len() != 3 {
            return Err(Error::parse(path, line, format!("expected 3 fields, found {}", rec.len())));
        }
        let id = |k: usize| -> Result<NodeId> {
            rec[k]
                .parse()
                .map_err(|_| Error::parse(path, line, format!("bad node id {:?}", &rec[k])))
        };
        let (s, d) = (id(0)?, id(1)?);
        let w: f64 = rec[2]
            .parse()
            .map_err(|_| Error::parse(path, line, format!("bad weight {:?}", &rec[2])))?;
        edges.push((s, d, w));
    }
    if !seen_header {
        return Err(Error::parse(path, 1, "missing header `src,dst,weight`"));
    }
    let observed = edges.iter().map(|e| e.0.max(e.1) + 1).max().unwrap_or(0);
    let n = match declared {
        Some(n) if n < observed => {
            return Err(Error::InvalidInput(format!(
                "declared {n} nodes but edge ids reach {}",
                observed - 1
            )))
        }
        Some(n) => n,
        None => observed,
    };
    WeightedDigraph::from_edges(n, &edges)
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::parse(path, line, e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn chain3() -> WeightedDigraph {
        WeightedDigraph::from_edges(3, &[(0, 1, 0.5), (1, 2, 0.25)]).unwrap()
    }

    #[test]
    fn clamp_examples() {
        let g = WeightedDigraph::from_edges(4, &[(0, 1, 1.3), (1, 2, -0.2), (2, 3, 0.5)]).unwrap();
        let c = clamp_weights(&g);
        assert_eq!(c.weight(0, 1), Some(1.0));
        assert_eq!(c.weight(1, 2), Some(0.0));
        assert_eq!(c.weight(2, 3), Some(0.5));
        assert_eq!(in_neighbors(&c, 2).unwrap(), vec![(1, 0.0)]);
        assert!(c.weights_in_unit_interval());
    }

    #[test]
    fn rejects_malformed_edges() {
        assert!(matches!(
            WeightedDigraph::from_edges(2, &[(0, 0, 1.0)]),
            Err(Error::InvalidInput(_))
        ));
        assert!(WeightedDigraph::from_edges(2, &[(0, 1, 1.0), (0, 1, 0.5)]).is_err());
        assert!(matches!(
            WeightedDigraph::from_edges(2, &[(0, 2, 1.0)]),
            Err(Error::Index { index: 2, .. })
        ));
        assert!(WeightedDigraph::from_edges(2, &[(0, 1, f64::NAN)]).is_err());
    }

    #[test]
    fn knn_weights_follow_velocity_cosine() {
        let pos = [[0.0, 0.0], [1.0, 0.0]];
        let parallel = build_knn_graph(&pos, &[[1.0, 0.0], [2.0, 0.0]], 1, Metric::Euclidean).unwrap();
        assert_eq!(parallel.weight(0, 1), Some(1.0));
        assert_eq!(parallel.weight(1, 0), Some(1.0));

        let orthogonal = build_knn_graph(&pos, &[[1.0, 0.0], [0.0, 1.0]], 1, Metric::Euclidean).unwrap();
        assert_eq!(orthogonal.weight(0, 1), Some(0.0));

        let anti = build_knn_graph(&pos, &[[1.0, 0.0], [-1.0, 0.0]], 1, Metric::Euclidean).unwrap();
        assert_eq!(anti.weight(0, 1), Some(0.0));
        assert_eq!(anti.n_edges(), 2);
        assert_eq!(prune_zero_edges(&anti).n_edges(), 0);
    }

    #[test]
    fn knn_rejects_bad_input() {
        let pos = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        let vel = [[1.0, 0.0]; 3];
        assert!(matches!(
            build_knn_graph(&pos, &vel, 0, Metric::Euclidean),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            build_knn_graph(&pos, &vel, 3, Metric::Euclidean),
            Err(Error::Parameter(_))
        ));
        let still = [[1.0, 0.0], [0.0, 0.0], [1.0, 0.0]];
        assert!(matches!(
            build_knn_graph(&pos, &still, 1, Metric::Euclidean),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn knn_distance_ties_prefer_lower_ids() {
        // Node 0 sits between 1 and 2 at equal distance.
        let pos = [[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0]];
        let g = build_knn_graph(&pos, &[[1.0, 0.0]; 3], 1, Metric::Euclidean).unwrap();
        assert_eq!(g.out_edges(0).0, &[1]);
    }

    #[test]
    fn torus_metric_wraps() {
        let m = Metric::Torus { side: 7.0 };
        let d = m.distance_sq([6.9, 0.0], [0.1, 0.0]);
        assert!((d - 0.04).abs() < 1e-12);
        // On the torus the wrapped point is nearer than a point at distance 1.
        let pos = [[6.9, 3.0], [0.1, 3.0], [5.9, 3.0]];
        let g = build_knn_graph(&pos, &[[1.0, 0.0]; 3], 1, m).unwrap();
        assert_eq!(g.out_edges(0).0, &[1]);
    }

    #[test]
    fn knn_matches_exhaustive_sort() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let pos: Vec<Vec2> = (0..5).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
            let vel: Vec<Vec2> = (0..5).map(|_| [rng.random::<f64>() + 0.1, rng.random::<f64>()]).collect();
            let g = build_knn_graph(&pos, &vel, 2, Metric::Euclidean).unwrap();
            for i in 0..5 {
                let mut all: Vec<(f64, usize)> = (0..5)
                    .filter(|&j| j != i)
                    .map(|j| (((pos[i][0] - pos[j][0]).powi(2) + (pos[i][1] - pos[j][1]).powi(2)).sqrt(), j))
                    .collect();
                all.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let mut expect: Vec<usize> = all[..2].iter().map(|x| x.1).collect();
                expect.sort();
                assert_eq!(g.out_edges(i).0, expect.as_slice());
                assert_eq!(g.out_degree(i), 2);
            }
        }
    }

    #[test]
    fn generators() {
        let chain = make_rectilinear(5, Direction::One, 1.0).unwrap();
        assert_eq!(chain.n_edges(), 4);
        assert_eq!(chain.weight(3, 4), Some(1.0));
        let bi = make_rectilinear(2, Direction::Bi, 1.0).unwrap();
        assert_eq!(bi.edges().map(|e| (e.0, e.1)).collect::<Vec<_>>(), vec![(0, 1), (1, 0)]);
        let single = make_rectilinear(1, Direction::One, 1.0).unwrap();
        assert_eq!((single.n_nodes(), single.n_edges()), (1, 0));

        let ring = make_circle(5, 1.0).unwrap();
        assert_eq!(ring.n_edges(), 5);
        assert_eq!(ring.weight(4, 0), Some(1.0));
        let ring3 = make_circle(3, 0.9).unwrap();
        assert!(ring3.edges().all(|e| e.2 == 0.9));
        assert!(matches!(make_circle(1, 1.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn prune_examples() {
        let g = WeightedDigraph::from_edges(3, &[(0, 1, 0.0), (1, 2, 0.5), (2, 0, 1.0)]).unwrap();
        let p = prune_zero_edges(&g);
        assert_eq!(p.edges().collect::<Vec<_>>(), vec![(1, 2, 0.5), (2, 0, 1.0)]);
        assert_eq!(prune_zero_edges(&p), p);
    }

    #[test]
    fn chain_neighbourhoods() {
        let g = chain3();
        assert_eq!(in_neighbors(&g, 1).unwrap(), vec![(0, 0.5)]);
        assert!(in_neighbors(&g, 0).unwrap().is_empty());
        assert!(in_neighbors(&g, 3).is_err());
        assert_eq!(reachable_set(&g, 0).unwrap(), BTreeSet::from([0, 1, 2]));
        assert_eq!(reachable_set(&g, 2).unwrap(), BTreeSet::from([2]));
        assert!(reachable_set(&g, 7).is_err());
    }

    #[test]
    fn generator_reachability() {
        for n in 2..12 {
            let ring = make_circle(n, 1.0).unwrap();
            let chain = make_rectilinear(n, Direction::One, 0.3).unwrap();
            for i in 0..n {
                assert_eq!(reachable_set(&ring, i).unwrap().len(), n);
                assert_eq!(
                    reachable_set(&chain, i).unwrap(),
                    (i..n).collect::<BTreeSet<_>>()
                );
            }
        }
    }

    #[test]
    fn edge_list_round_trip_keeps_isolated_nodes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        let g = WeightedDigraph::from_edges(6, &[(0, 1, 0.123456789), (3, 1, 1.0)]).unwrap();
        write_edge_list(&g, &path).unwrap();
        let back = read_edge_list(&path).unwrap();
        assert_eq!(back.n_nodes(), 6);
        assert_eq!(back.n_edges(), 2);
        assert!((back.weight(0, 1).unwrap() - 0.123456789).abs() < 1e-12);
    }

    #[test]
    fn edge_list_errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "src,dst,weight\n0,1,0.5\n1,x,0.5\n").unwrap();
        match read_edge_list(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        std::fs::write(&path, "src,dst,weight\n0,1\n").unwrap();
        assert!(matches!(read_edge_list(&path), Err(Error::Parse { line: 2, .. })));
        std::fs::write(&path, "0,1,0.5\n").unwrap();
        assert!(matches!(read_edge_list(&path), Err(Error::Parse { .. })));
    }

    fn arb_graph() -> impl Strategy<Value = WeightedDigraph> {
        (2usize..15)
            .prop_flat_map(|n| {
                (
                    Just(n),
                    proptest::collection::vec(((0..n), (0..n), -0.5f64..1.5), 0..40),
                )
            })
            .prop_map(|(n, raw)| {
                let mut seen = BTreeSet::new();
                let edges: Vec<_> = raw
                    .into_iter()
                    .filter(|&(s, d, _)| s != d && seen.insert((s, d)))
                    .collect();
                WeightedDigraph::from_edges(n, &edges).unwrap()
            })
    }

    proptest! {
        #[test]
        fn clamp_is_idempotent(g in arb_graph()) {
            let once = clamp_weights(&g);
            prop_assert_eq!(clamp_weights(&once), once.clone());
            prop_assert!(once.weights_in_unit_interval());
        }

        #[test]
        fn in_neighbors_is_transpose(g in arb_graph()) {
            let mut transpose = vec![Vec::new(); g.n_nodes()];
            for (s, d, w) in g.edges() {
                transpose[d].push((s, w));
            }
            for (z, expect) in transpose.iter_mut().enumerate() {
                expect.sort_by_key(|e| e.0);
                prop_assert_eq!(&in_neighbors(&g, z).unwrap(), expect);
            }
        }

        #[test]
        fn reachable_matches_fixpoint(g in arb_graph()) {
            let n = g.n_nodes();
            for i in 0..n {
                let mut reach = vec![false; n];
                reach[i] = true;
                loop {
                    let mut changed = false;
                    for (s, d, _) in g.edges() {
                        if reach[s] && !reach[d] {
                            reach[d] = true;
                            changed = true;
                        }
                    }
                    if !changed { break; }
                }
                let expect: BTreeSet<_> = (0..n).filter(|&x| reach[x]).collect();
                prop_assert_eq!(reachable_set(&g, i).unwrap(), expect);
            }
        }
    }
}
