//! Undirected networks, the adjacency-with-self-loops algebra used by the
//! risk formulas, and the four random graph families used in studies.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::seeds::rng_from_seed;
use crate::{Error, Result};

/// Simple undirected graph on nodes `0..n`.
///
/// Edges are stored as normalized `(min, max)` pairs in ascending order, so
/// two networks with the same edge set always compare equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    n: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Network {
    /// Builds a network from an edge list, collapsing duplicates.
    pub fn from_edge_list<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n < 2 {
            return Err(Error::invalid(format!("network needs at least 2 nodes, got {n}")));
        }
        let mut set = BTreeSet::new();
        for (i, j) in pairs {
            for index in [i, j] {
                if index >= n {
                    return Err(Error::IndexOutOfRange { index, n });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            set.insert((i.min(j), i.max(j)));
        }
        Ok(Self::from_normalized(n, set.into_iter().collect()))
    }

    fn from_normalized(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut neighbors = vec![Vec::new(); n];
        for &(i, j) in &edges {
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Network { n, edges, neighbors }
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::from_edge_list(n, std::iter::empty())
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::from_edge_list(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::from_edge_list(n, (1..n).map(|i| (i - 1, i)))
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn mean_degree(&self) -> f64 {
        2.0 * self.edges.len() as f64 / self.n as f64
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    /// Precomputes the dense matrices the risk formulas need.
    pub fn algebra(&self) -> NetworkAlgebra {
        NetworkAlgebra::new(self)
    }

    /// Plain-text edge list: first line `n`, then one `i j` line per edge.
    pub fn to_edge_list_string(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for &(i, j) in &self.edges {
            let _ = writeln!(out, "{i} {j}");
        }
        out
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let n = tokens
            .next()
            .ok_or_else(|| Error::Parse("empty edge list".into()))
            .and_then(parse_index)?;
        let rest: Vec<&str> = tokens.collect();
        if !rest.len().is_multiple_of(2) {
            return Err(Error::Parse("edge list has a dangling endpoint".into()));
        }
        let pairs = rest
            .chunks(2)
            .map(|c| Ok((parse_index(c[0])?, parse_index(c[1])?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_edge_list(n, pairs)
    }

    pub fn to_json_string(&self) -> String {
        let doc = NetworkJson {
            n: self.n,
            edges: self.edges.iter().map(|&(i, j)| [i, j]).collect(),
        };
        serde_json::to_string(&doc).expect("network serializes")
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        let doc: NetworkJson = serde_json::from_str(text).map_err(|e| Error::Parse(format!("network JSON: {e}")))?;
        Self::from_edge_list(doc.n, doc.edges.into_iter().map(|[i, j]| (i, j)))
    }

    /// Reads either format; JSON is detected by a leading `{`.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if text.trim_start().starts_with('{') {
            Self::parse_json(&text)
        } else {
            Self::parse_edge_list(&text)
        }
    }

    /// Writes JSON when the extension is `.json`, the edge-list format otherwise.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = if path.extension().is_some_and(|e| e == "json") {
            self.to_json_string()
        } else {
            self.to_edge_list_string()
        };
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

fn parse_index(token: &str) -> Result<usize> {
    token
        .parse()
        .map_err(|_| Error::Parse(format!("expected a non-negative integer, got {token:?}")))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

/// `A = A* + I`: symmetric 0/1 matrix with a unit diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedAdjacency(pub DMatrix<f64>);

/// Closed-neighborhood sizes `1 + degree(i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborhoodSizes(pub Vec<usize>);

/// `A'A`: entry `(i, j)` counts the closed neighbors shared by `i` and `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix(pub DMatrix<f64>);

pub fn augmented_adjacency(net: &Network) -> AugmentedAdjacency {
    let mut a = DMatrix::identity(net.n, net.n);
    for &(i, j) in &net.edges {
        a[(i, j)] = 1.0;
        a[(j, i)] = 1.0;
    }
    AugmentedAdjacency(a)
}

pub fn neighborhood_sizes(net: &Network) -> NeighborhoodSizes {
    NeighborhoodSizes(net.neighbors.iter().map(|l| l.len() + 1).collect())
}

pub fn gram_matrix(adj: &AugmentedAdjacency) -> GramMatrix {
    GramMatrix(adj.0.transpose() * &adj.0)
}

/// Dense derived quantities of a network, computed once and shared.
#[derive(Clone, Debug)]
pub struct NetworkAlgebra {
    pub adjacency: AugmentedAdjacency,
    pub sizes: NeighborhoodSizes,
    pub gram: GramMatrix,
    /// Row sums of the Gram matrix.
    pub gram_row_sums: Vec<f64>,
}

impl NetworkAlgebra {
    pub fn new(net: &Network) -> Self {
        let adjacency = augmented_adjacency(net);
        let gram = gram_matrix(&adjacency);
        let gram_row_sums = gram.0.row_iter().map(|r| r.sum()).collect();
        NetworkAlgebra {
            sizes: neighborhood_sizes(net),
            adjacency,
            gram,
            gram_row_sums,
        }
    }

    pub fn len(&self) -> usize {
        self.sizes.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.0.is_empty()
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be in [0, 1], got {p}")))
    }
}

/// G(n, p): each pair is linked independently with probability `p`.
pub fn gen_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Network> {
    check_probability("p", p)?;
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Network::from_edge_list(n, edges)
}

/// Ring lattice of even degree `k` whose edges are rewired independently
/// with probability `beta`.
///
/// For every lattice edge `(i, i + s)`, a rewire replaces the far endpoint
/// with a uniformly chosen node; targets that would create a self-loop or a
/// duplicate are redrawn, and the edge is kept when `i` is already linked
/// to every other node.
pub fn gen_small_world(n: usize, k: usize, beta: f64, seed: u64) -> Result<Network> {
    check_probability("beta", beta)?;
    if k == 0 || !k.is_multiple_of(2) || k >= n {
        return Err(Error::invalid(format!(
            "ring degree k must be even, positive and below n={n}, got {k}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for i in 0..n {
        for s in 1..=k / 2 {
            let j = (i + s) % n;
            adj[i].insert(j);
            adj[j].insert(i);
        }
    }
    for s in 1..=k / 2 {
        for i in 0..n {
            let j = (i + s) % n;
            if rng.random::<f64>() >= beta || !adj[i].contains(&j) {
                continue;
            }
            if adj[i].len() >= n - 1 {
                continue;
            }
            let target = loop {
                let t = rng.random_range(0..n);
                if t != i && !adj[i].contains(&t) {
                    break t;
                }
            };
            adj[i].remove(&j);
            adj[j].remove(&i);
            adj[i].insert(target);
            adj[target].insert(i);
        }
    }
    let edges = adj
        .iter()
        .enumerate()
        .flat_map(|(i, set)| set.iter().filter(move |&&j| j > i).map(move |&j| (i, j)));
    Network::from_edge_list(n, edges)
}

/// Preferential attachment: starts from an `m`-clique, then each arriving
/// node links to `m` distinct existing nodes drawn proportionally to degree.
pub fn gen_power_law(n: usize, m: usize, seed: u64) -> Result<Network> {
    if m == 0 || m >= n {
        return Err(Error::invalid(format!(
            "edges per arriving node m must satisfy 1 <= m < n={n}, got {m}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    // One entry per edge endpoint, so a uniform pick is degree-proportional.
    let mut endpoints: Vec<usize> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            edges.push((i, j));
            endpoints.extend([i, j]);
        }
    }
    for new in m..n {
        let mut targets = BTreeSet::new();
        while targets.len() < m {
            let t = if endpoints.is_empty() {
                rng.random_range(0..new)
            } else {
                endpoints[rng.random_range(0..endpoints.len())]
            };
            targets.insert(t);
        }
        for t in targets {
            edges.push((t, new));
            endpoints.extend([t, new]);
        }
    }
    Network::from_edge_list(n, edges)
}

/// Stochastic blockmodel with contiguous blocks of the given sizes.
pub fn gen_sbm(block_sizes: &[usize], link_probs: &[Vec<f64>], seed: u64) -> Result<Network> {
    let b = block_sizes.len();
    if b == 0 || block_sizes.contains(&0) {
        return Err(Error::invalid("block sizes must be non-empty and positive"));
    }
    if link_probs.len() != b || link_probs.iter().any(|row| row.len() != b) {
        return Err(Error::invalid(format!("link probabilities must form a {b}x{b} matrix")));
    }
    #[allow(clippy::needless_range_loop)]
    for r in 0..b {
        for c in 0..b {
            check_probability("link probability", link_probs[r][c])?;
            if link_probs[r][c] != link_probs[c][r] {
                return Err(Error::invalid("link probability matrix must be symmetric"));
            }
        }
    }
    let block_of: Vec<usize> = block_sizes
        .iter()
        .enumerate()
        .flat_map(|(blk, &size)| std::iter::repeat_n(blk, size))
        .collect();
    let n = block_of.len();
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < link_probs[block_of[i]][block_of[j]] {
                edges.push((i, j));
            }
        }
    }
    Network::from_edge_list(n, edges)
}

/// Random graph family together with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum NetworkFamily {
    ErdosRenyi {
        p: f64,
    },
    SmallWorld {
        k: usize,
        beta: f64,
    },
    PowerLaw {
        m: usize,
    },
    /// `n_blocks` near-equal contiguous blocks.
    Sbm {
        n_blocks: usize,
        p_in: f64,
        p_out: f64,
    },
}

impl NetworkFamily {
    pub fn name(&self) -> &'static str {
        match self {
            NetworkFamily::ErdosRenyi { .. } => "erdos-renyi",
            NetworkFamily::SmallWorld { .. } => "small-world",
            NetworkFamily::PowerLaw { .. } => "power-law",
            NetworkFamily::Sbm { .. } => "sbm",
        }
    }

    pub fn generate(&self, n: usize, seed: u64) -> Result<Network> {
        match *self {
            NetworkFamily::ErdosRenyi { p } => gen_erdos_renyi(n, p, seed),
            NetworkFamily::SmallWorld { k, beta } => gen_small_world(n, k, beta, seed),
            NetworkFamily::PowerLaw { m } => gen_power_law(n, m, seed),
            NetworkFamily::Sbm { n_blocks, p_in, p_out } => {
                if n_blocks == 0 || n_blocks > n {
                    return Err(Error::invalid(format!("n_blocks must be in 1..={n}, got {n_blocks}")));
                }
                let sizes: Vec<usize> = (0..n_blocks)
                    .map(|b| n / n_blocks + usize::from(b < n % n_blocks))
                    .collect();
                let probs: Vec<Vec<f64>> = (0..n_blocks)
                    .map(|r| (0..n_blocks).map(|c| if r == c { p_in } else { p_out }).collect())
                    .collect();
                gen_sbm(&sizes, &probs, seed)
            }
        }
    }

    /// The four families at mean degree close to 5 for `n` nodes.
    pub fn desk_defaults(n: usize) -> Vec<NetworkFamily> {
        let n_f = n.max(2) as f64;
        vec![
            NetworkFamily::ErdosRenyi {
                p: (5.0 / (n_f - 1.0)).min(1.0),
            },
            NetworkFamily::SmallWorld { k: 4, beta: 0.1 },
            NetworkFamily::PowerLaw { m: 2 },
            NetworkFamily::Sbm {
                n_blocks: 4,
                p_in: (16.0 / n_f).min(1.0),
                p_out: (4.0 / (3.0 * n_f)).min(1.0),
            },
        ]
    }
}

/// Draws `count` distinct nodes uniformly; helper shared with the designs.
pub(crate) fn sample_nodes<R: Rng + ?Sized>(rng: &mut R, n: usize, count: usize) -> Vec<usize> {
    sample(rng, n, count).into_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_row_slice(
            rows.len(),
            rows[0].len(),
            &rows.iter().flat_map(|r| r.iter().copied()).collect::<Vec<_>>(),
        )
    }

    #[test]
    fn edge_list_construction() {
        let path = Network::from_edge_list(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(path.edges(), &[(0, 1), (1, 2)]);

        let dup = Network::from_edge_list(3, [(1, 0), (0, 1)]).unwrap();
        assert_eq!(dup.edges(), &[(0, 1)]);

        assert!(matches!(
            Network::from_edge_list(2, [(0, 2)]),
            Err(Error::IndexOutOfRange { index: 2, n: 2 })
        ));
        assert!(matches!(Network::from_edge_list(3, [(1, 1)]), Err(Error::SelfLoop(1))));
        assert!(Network::from_edge_list(1, []).is_err());
    }

    #[test]
    fn augmented_adjacency_examples() {
        let path = Network::path(3).unwrap();
        assert_eq!(
            augmented_adjacency(&path).0,
            mat(&[&[1., 1., 0.], &[1., 1., 1.], &[0., 1., 1.]])
        );
        assert_eq!(
            augmented_adjacency(&Network::empty(4).unwrap()).0,
            DMatrix::identity(4, 4)
        );
        assert_eq!(
            augmented_adjacency(&Network::complete(3).unwrap()).0,
            DMatrix::from_element(3, 3, 1.0)
        );
    }

    #[test]
    fn neighborhood_size_examples() {
        assert_eq!(neighborhood_sizes(&Network::path(3).unwrap()).0, vec![2, 3, 2]);
        assert_eq!(neighborhood_sizes(&Network::empty(5).unwrap()).0, vec![1; 5]);
        assert_eq!(neighborhood_sizes(&Network::complete(4).unwrap()).0, vec![4; 4]);
    }

    #[test]
    fn gram_matrix_examples() {
        let gram = |net: &Network| gram_matrix(&augmented_adjacency(net)).0;
        // closed neighborhoods {0,1}, {0,1,2}, {1,2}
        assert_eq!(
            gram(&Network::path(3).unwrap()),
            mat(&[&[2., 2., 1.], &[2., 3., 2.], &[1., 2., 2.]])
        );
        assert_eq!(gram(&Network::empty(6).unwrap()), DMatrix::identity(6, 6));
        assert_eq!(gram(&Network::complete(3).unwrap()), DMatrix::from_element(3, 3, 3.0));
    }

    #[test]
    fn generator_degenerate_parameters() {
        let er0 = gen_erdos_renyi(10, 0.0, 3).unwrap();
        assert_eq!(er0.edge_count(), 0);
        let er1 = gen_erdos_renyi(10, 1.0, 3).unwrap();
        assert_eq!(er1, Network::complete(10).unwrap());

        let sbm = gen_sbm(&[5, 5], &[vec![1.0, 0.0], vec![0.0, 1.0]], 9).unwrap();
        assert_eq!(sbm.edge_count(), 20);
        for &(i, j) in sbm.edges() {
            assert_eq!(i < 5, j < 5);
        }

        let ring = gen_small_world(20, 4, 0.0, 5).unwrap();
        assert!(ring.degrees().iter().all(|&d| d == 4));
        assert!(ring.has_edge(0, 19) && ring.has_edge(0, 18) && ring.has_edge(0, 2));
    }

    #[test]
    fn generator_parameter_validation() {
        assert!(gen_erdos_renyi(10, 1.5, 0).is_err());
        assert!(gen_erdos_renyi(10, -0.1, 0).is_err());
        assert!(gen_small_world(10, 3, 0.1, 0).is_err());
        assert!(gen_small_world(10, 10, 0.1, 0).is_err());
        assert!(gen_small_world(10, 4, 1.1, 0).is_err());
        assert!(gen_power_law(10, 0, 0).is_err());
        assert!(gen_power_law(3, 3, 0).is_err());
        assert!(gen_sbm(&[3, 0], &[vec![0.5, 0.5], vec![0.5, 0.5]], 0).is_err());
        assert!(gen_sbm(&[3, 3], &[vec![0.5, 0.1], vec![0.2, 0.5]], 0).is_err());
        assert!(gen_sbm(&[3, 3], &[vec![0.5, 0.1]], 0).is_err());
    }

    #[test]
    fn small_world_keeps_edge_count_and_simplicity() {
        for seed in 0..20 {
            let g = gen_small_world(30, 6, 0.3, seed).unwrap();
            assert_eq!(g.edge_count(), 30 * 3);
            assert!(g.edges().iter().all(|&(i, j)| i < j));
        }
        let full_rewire = gen_small_world(8, 6, 1.0, 1).unwrap();
        assert_eq!(full_rewire.edge_count(), 24);
    }

    #[test]
    fn power_law_edge_count() {
        let g = gen_power_law(100, 2, 4).unwrap();
        // 1 edge in the starting 2-clique, then 2 per arriving node
        assert_eq!(g.edge_count(), 1 + 2 * 98);
        let tree = gen_power_law(50, 1, 4).unwrap();
        assert_eq!(tree.edge_count(), 49);
    }

    #[test]
    fn power_law_has_heavier_tail_than_matched_erdos_renyi() {
        let n = 100;
        let mut wins = 0;
        let pairs = 50;
        for seed in 0..pairs {
            let pl = gen_power_law(n, 2, seed).unwrap();
            let p = pl.mean_degree() / (n as f64 - 1.0);
            let er = gen_erdos_renyi(n, p, seed + 1000).unwrap();
            if pl.max_degree() > er.max_degree() {
                wins += 1;
            }
        }
        assert!(wins as f64 >= 0.9 * pairs as f64, "wins={wins}");
    }

    #[test]
    fn family_generation_and_names() {
        for fam in NetworkFamily::desk_defaults(100) {
            let a = fam.generate(100, 11).unwrap();
            let b = fam.generate(100, 11).unwrap();
            assert_eq!(a, b, "{}", fam.name());
            assert!(a.mean_degree() > 3.0 && a.mean_degree() < 7.0, "{}", fam.name());
        }
        let js = serde_json::to_string(&NetworkFamily::SmallWorld { k: 4, beta: 0.1 }).unwrap();
        assert_eq!(js, r#"{"family":"small-world","k":4,"beta":0.1}"#);
    }

    #[test]
    fn edge_list_text_and_json_formats() {
        let g = gen_erdos_renyi(12, 0.3, 2).unwrap();
        assert_eq!(Network::parse_edge_list(&g.to_edge_list_string()).unwrap(), g);
        assert_eq!(Network::parse_json(&g.to_json_string()).unwrap(), g);
        let parsed = Network::parse_edge_list("3\n0 1\n2   1\n").unwrap();
        assert_eq!(parsed.edges(), &[(0, 1), (1, 2)]);
        assert!(Network::parse_edge_list("3\n0 1\n2").is_err());
        assert!(Network::parse_edge_list("3\n0 x\n").is_err());
        assert!(Network::parse_json(r#"{"n": 3, "edges": [[0, 1]], "extra": 1}"#).is_err());
        assert_eq!(
            Network::parse_json(r#"{"n": 3, "edges": [[1, 0]]}"#).unwrap().edges(),
            &[(0, 1)]
        );
    }

    fn brute_force_gram(net: &Network) -> DMatrix<f64> {
        let n = net.node_count();
        let closed: Vec<BTreeSet<usize>> = (0..n)
            .map(|i| net.neighbors(i).iter().copied().chain([i]).collect())
            .collect();
        DMatrix::from_fn(n, n, |i, j| closed[i].intersection(&closed[j]).count() as f64)
    }

    proptest! {
        #[test]
        fn gram_matches_neighborhood_intersections(n in 2usize..=15, p in 0.0f64..=1.0, seed in any::<u64>()) {
            let net = gen_erdos_renyi(n, p, seed).unwrap();
            let alg = net.algebra();
            prop_assert_eq!(&alg.gram.0, &brute_force_gram(&net));
            prop_assert_eq!(&alg.gram.0, &alg.gram.0.transpose());
            for i in 0..n {
                prop_assert_eq!(alg.gram.0[(i, i)], alg.sizes.0[i] as f64);
                prop_assert_eq!(alg.adjacency.0.row(i).sum(), alg.sizes.0[i] as f64);
                prop_assert_eq!(alg.sizes.0[i], net.degree(i) + 1);
            }
        }

        #[test]
        fn generators_are_seed_deterministic(seed in any::<u64>()) {
            prop_assert_eq!(gen_erdos_renyi(30, 0.2, seed).unwrap(), gen_erdos_renyi(30, 0.2, seed).unwrap());
            prop_assert_eq!(gen_small_world(30, 4, 0.2, seed).unwrap(), gen_small_world(30, 4, 0.2, seed).unwrap());
            prop_assert_eq!(gen_power_law(30, 2, seed).unwrap(), gen_power_law(30, 2, seed).unwrap());
            let probs = vec![vec![0.5, 0.1], vec![0.1, 0.5]];
            prop_assert_eq!(gen_sbm(&[15, 15], &probs, seed).unwrap(), gen_sbm(&[15, 15], &probs, seed).unwrap());
        }
    }
}
