//! Kontsevich graphs: enumeration, canonical forms and the operator schemata
//! used by the comparison.
//!
//! Every aerial vertex `p_k` emits two ordered edges `(first, second)`. The
//! first edge carries the upper index `i_k` of `Lambda^{i_k j_k}`, the second
//! carries `j_k`, and each edge differentiates whatever vertex it lands on.
//! Two graphs are in the same class when they differ by a relabeling of aerial
//! vertices and by swapping edge order inside vertices; each swap flips the
//! sign of the associated operator.

use itertools::Itertools;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("unsupported size n={n}, m={m} (need n <= 3, m in 1..=2)")]
    OutOfRange { n: usize, m: usize },
    #[error("cannot parse graph `{0}`")]
    Parse(String),
    #[error("invalid graph: {0}")]
    Invalid(String),
}

/// Vertex label. Terrestrial vertices sort before aerial ones.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Vertex {
    Terrestrial(usize),
    Aerial(usize),
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Terrestrial(j) => write!(f, "q{}", j + 1),
            Vertex::Aerial(k) => write!(f, "p{}", k + 1),
        }
    }
}

/// Directed graph with `n` aerial and `m` terrestrial vertices.
///
/// Identity and ordering ignore the `generalized` flag, which only records
/// the admissibility rules the graph was built under.
#[derive(Clone, Debug)]
pub struct KGraph {
    pub n_aerial: usize,
    pub m_terrestrial: usize,
    /// `edges[k] = (first, second)` for aerial vertex `p_{k+1}`.
    pub edges: Vec<(Vertex, Vertex)>,
    pub generalized: bool,
}

impl KGraph {
    fn key(&self) -> (usize, usize, &[(Vertex, Vertex)]) {
        (self.n_aerial, self.m_terrestrial, &self.edges)
    }

    pub fn new(m: usize, edges: Vec<(Vertex, Vertex)>, generalized: bool) -> Result<Self, GraphError> {
        let g = KGraph {
            n_aerial: edges.len(),
            m_terrestrial: m,
            edges,
            generalized,
        };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<(), GraphError> {
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            for v in [a, b] {
                let ok = match v {
                    Vertex::Aerial(i) => i < self.n_aerial,
                    Vertex::Terrestrial(j) => j < self.m_terrestrial,
                };
                if !ok {
                    return Err(GraphError::Invalid(format!("p{} targets missing vertex {v}", k + 1)));
                }
            }
            if a == b {
                return Err(GraphError::Invalid(format!("p{} has a double edge", k + 1)));
            }
            if !self.generalized && (a == Vertex::Aerial(k) || b == Vertex::Aerial(k)) {
                return Err(GraphError::Invalid(format!("p{} has a loop", k + 1)));
            }
        }
        Ok(())
    }

    /// Every terrestrial vertex receives at least one edge.
    pub fn hits_all_terrestrial(&self) -> bool {
        (0..self.m_terrestrial).all(|j| self.in_degree(Vertex::Terrestrial(j)) > 0)
    }

    pub fn in_degree(&self, v: Vertex) -> usize {
        self.edges.iter().map(|&(a, b)| (a == v) as usize + (b == v) as usize).sum()
    }

    pub fn has_loop(&self) -> bool {
        self.edges
            .iter()
            .enumerate()
            .any(|(k, &(a, b))| a == Vertex::Aerial(k) || b == Vertex::Aerial(k))
    }

    /// Relabel aerial vertices by `perm` (old index -> new index) and swap the
    /// edge order at every vertex flagged in `swaps` (indexed by old label).
    /// Returns the image and the sign `(-1)^{#swaps}`.
    pub fn transform(&self, perm: &[usize], swaps: &[bool]) -> (KGraph, i32) {
        let map = |v: Vertex| match v {
            Vertex::Aerial(k) => Vertex::Aerial(perm[k]),
            t => t,
        };
        let mut edges = vec![(Vertex::Terrestrial(0), Vertex::Terrestrial(0)); self.n_aerial];
        let mut sign = 1;
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            let (a, b) = (map(a), map(b));
            edges[perm[k]] = if swaps[k] {
                sign = -sign;
                (b, a)
            } else {
                (a, b)
            };
        }
        (
            KGraph {
                edges,
                ..self.clone()
            },
            sign,
        )
    }

    /// Swap the two terrestrial labels (only meaningful for `m = 2`).
    pub fn mirror(&self) -> KGraph {
        let flip = |v: Vertex| match v {
            Vertex::Terrestrial(j) => Vertex::Terrestrial(self.m_terrestrial - 1 - j),
            a => a,
        };
        KGraph {
            edges: self.edges.iter().map(|&(a, b)| (flip(a), flip(b))).collect(),
            ..self.clone()
        }
    }

    /// All distinct images under relabeling and edge swaps, with the sign
    /// relating each image's operator to this graph's operator. If some image
    /// is reached with both signs, the operator vanishes identically and the
    /// sign recorded for it is `0`.
    pub fn orbit(&self) -> BTreeMap<KGraph, i32> {
        let n = self.n_aerial;
        let mut out: BTreeMap<KGraph, i32> = BTreeMap::new();
        for perm in (0..n).permutations(n) {
            for mask in 0..(1u32 << n) {
                let swaps: Vec<bool> = (0..n).map(|k| mask >> k & 1 == 1).collect();
                let (g, s) = self.transform(&perm, &swaps);
                out.entry(g)
                    .and_modify(|old| {
                        if *old != s {
                            *old = 0
                        }
                    })
                    .or_insert(s);
            }
        }
        if out.values().any(|&s| s == 0) {
            out.values_mut().for_each(|s| *s = 0);
        }
        out
    }

    /// Lexicographically minimal member of the orbit and the sign relating it
    /// to this graph (`0` when the operator vanishes).
    pub fn canonical(&self) -> (KGraph, i32) {
        let orbit = self.orbit();
        let (g, s) = orbit.iter().next().expect("orbit contains the graph itself");
        (g.clone(), *s)
    }

    /// Text form `n=2 m=2; p1->(p2,q1); p2->(q1,q2)`.
    pub fn render(&self) -> String {
        let mut s = format!("n={} m={}", self.n_aerial, self.m_terrestrial);
        for (k, (a, b)) in self.edges.iter().enumerate() {
            s.push_str(&format!("; p{}->({a},{b})", k + 1));
        }
        s
    }

    /// Parse the text form. Loops mark the graph as generalized.
    pub fn parse(s: &str) -> Result<KGraph, GraphError> {
        let err = || GraphError::Parse(s.to_string());
        let mut parts = s.split(';').map(str::trim);
        let head = parts.next().ok_or_else(err)?;
        let mut n = None;
        let mut m = None;
        for tok in head.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(err)?;
            let v: usize = v.parse().map_err(|_| err())?;
            match k {
                "n" => n = Some(v),
                "m" => m = Some(v),
                _ => return Err(err()),
            }
        }
        let (n, m) = (n.ok_or_else(err)?, m.ok_or_else(err)?);
        let vertex = |t: &str| -> Result<Vertex, GraphError> {
            let t = t.trim();
            let idx: usize = t.get(1..).and_then(|x| x.parse().ok()).filter(|&i| i >= 1).ok_or_else(err)?;
            match t.as_bytes().first() {
                Some(b'p') => Ok(Vertex::Aerial(idx - 1)),
                Some(b'q') => Ok(Vertex::Terrestrial(idx - 1)),
                _ => Err(err()),
            }
        };
        let mut edges = vec![None; n];
        for p in parts.filter(|p| !p.is_empty()) {
            let (src, rest) = p.split_once("->").ok_or_else(err)?;
            let Vertex::Aerial(k) = vertex(src)? else { return Err(err()) };
            let inner = rest.trim().strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(err)?;
            let (a, b) = inner.split_once(',').ok_or_else(err)?;
            *edges.get_mut(k).ok_or_else(err)? = Some((vertex(a)?, vertex(b)?));
        }
        let edges: Vec<_> = edges.into_iter().collect::<Option<_>>().ok_or_else(err)?;
        let mut g = KGraph {
            n_aerial: n,
            m_terrestrial: m,
            edges,
            generalized: true,
        };
        g.validate()?;
        g.generalized = g.has_loop();
        Ok(g)
    }
}

impl PartialEq for KGraph {
    fn eq(&self, o: &Self) -> bool {
        self.key() == o.key()
    }
}

impl Eq for KGraph {}

impl PartialOrd for KGraph {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for KGraph {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.key().cmp(&o.key())
    }
}

impl std::hash::Hash for KGraph {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.key().hash(h)
    }
}

impl fmt::Display for KGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Orbit of graphs under aerial relabeling and edge swaps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphClass {
    pub representative: KGraph,
    /// Distinct members with the sign relating their operator to the
    /// representative's (`0` if the class operator vanishes identically).
    pub members: Vec<(KGraph, i32)>,
    /// Index of the class containing the terrestrial mirror image.
    pub mirror: usize,
    /// `+1` if the mirror image of the representative is a member with sign
    /// `+1` (argument-symmetric operator), `-1` for antisymmetric, `0` when
    /// the mirror lies in another class.
    pub mirror_sign: i32,
}

impl GraphClass {
    pub fn is_self_mirror(&self) -> bool {
        self.mirror_sign != 0
    }

    /// Closed under swapping the terrestrial vertices, alone or together
    /// with its mirror class.
    pub fn symmetric(&self) -> bool {
        self.mirror_sign >= 0
    }

    pub fn vanishes(&self) -> bool {
        self.members.iter().all(|(_, s)| *s == 0)
    }
}

fn check_range(n: usize, m: usize) -> Result<(), GraphError> {
    if n > 3 || !(1..=2).contains(&m) {
        return Err(GraphError::OutOfRange { n, m });
    }
    Ok(())
}

fn all_graphs(n: usize, m: usize, generalized: bool) -> Vec<KGraph> {
    let vertices: Vec<Vertex> = (0..m).map(Vertex::Terrestrial).chain((0..n).map(Vertex::Aerial)).collect();
    let choices: Vec<Vec<(Vertex, Vertex)>> = (0..n)
        .map(|k| {
            vertices
                .iter()
                .cartesian_product(vertices.iter())
                .filter(|(a, b)| a != b)
                .filter(|(a, b)| generalized || (**a != Vertex::Aerial(k) && **b != Vertex::Aerial(k)))
                .map(|(a, b)| (*a, *b))
                .collect()
        })
        .collect();
    choices
        .into_iter()
        .multi_cartesian_product()
        .chain(if n == 0 { Some(vec![]) } else { None })
        .map(|edges| KGraph {
            n_aerial: n,
            m_terrestrial: m,
            edges,
            generalized,
        })
        .filter(KGraph::hits_all_terrestrial)
        .collect()
}

/// All classes in canonical order. Graphs must reach every terrestrial vertex.
pub fn enumerate_graphs(n: usize, m: usize, generalized: bool) -> Result<Vec<GraphClass>, GraphError> {
    check_range(n, m)?;
    let mut reps: BTreeMap<KGraph, BTreeMap<KGraph, i32>> = BTreeMap::new();
    for g in all_graphs(n, m, generalized) {
        let (rep, _) = g.canonical();
        reps.entry(rep.clone()).or_insert_with(|| rep.orbit());
    }
    let keys: Vec<KGraph> = reps.keys().cloned().collect();
    let index: BTreeMap<&KGraph, usize> = keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let mut out = Vec::new();
    for rep in &keys {
        let orbit = &reps[rep];
        let mirrored = rep.mirror();
        let (mrep, _) = mirrored.canonical();
        let mirror = index[&mrep];
        let mirror_sign = if &mrep == rep { orbit[&mirrored] } else { 0 };
        out.push(GraphClass {
            representative: rep.clone(),
            members: orbit.iter().map(|(g, s)| (g.clone(), *s)).collect(),
            mirror,
            mirror_sign,
        });
    }
    Ok(out)
}

/// Class counts under the readings of "the same graph" that matter here.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassCounts {
    /// Aerial relabeling and edge swaps.
    pub classes: usize,
    /// Additionally identifying terrestrial mirror images.
    pub classes_up_to_mirror: usize,
    /// Aerial relabeling only, edge order kept.
    pub ordered_edge_classes: usize,
    /// Aerial relabeling and mirror, edge order kept.
    pub ordered_edge_classes_up_to_mirror: usize,
}

pub fn class_counts(n: usize, m: usize, generalized: bool) -> Result<ClassCounts, GraphError> {
    check_range(n, m)?;
    let classes = enumerate_graphs(n, m, generalized)?;
    let up_to_mirror = classes.iter().enumerate().filter(|(i, c)| c.mirror >= *i).count();
    let mut ordered = std::collections::BTreeSet::new();
    let mut ordered_mirror = std::collections::BTreeSet::new();
    let relabel_min = |g: &KGraph| -> KGraph {
        (0..n)
            .permutations(n)
            .map(|p| g.transform(&p, &vec![false; n]).0)
            .min()
            .unwrap_or_else(|| g.clone())
    };
    for g in all_graphs(n, m, generalized) {
        let a = relabel_min(&g);
        let b = relabel_min(&g.mirror());
        ordered_mirror.insert(a.clone().min(b));
        ordered.insert(a);
    }
    Ok(ClassCounts {
        classes: classes.len(),
        classes_up_to_mirror: up_to_mirror,
        ordered_edge_classes: ordered.len(),
        ordered_edge_classes_up_to_mirror: ordered_mirror.len(),
    })
}

/// A named operator pattern: the sum (with unit coefficients) of the
/// operators of its graphs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schema {
    pub label: String,
    pub weight_symbol: String,
    /// Power of the deformation parameter the term sits at.
    pub t_order: usize,
    pub graphs: Vec<KGraph>,
}

impl Schema {
    fn from_text(label: &str, weight_symbol: &str, t_order: usize, graphs: &[&str]) -> Schema {
        Schema {
            label: label.into(),
            weight_symbol: weight_symbol.into(),
            t_order,
            graphs: graphs.iter().map(|g| KGraph::parse(g).expect("built-in schema graph")).collect(),
        }
    }
}

/// The six argument-symmetric second-order bidifferential schemata.
///
/// With `(i_k, j_k)` the edge indices of `p_k`:
/// 1. `d_{j1} L^{i2 j2} d_{j2} L^{i1 j1} d_{i1} (x) d_{i2}`
/// 2. `d_{j1} L^{i1 j1} d_{j2} L^{i2 j2} d_{i1} (x) d_{i2}`
/// 3. `L^{i1 j1} d_{j1} d_{j2} L^{i2 j2} (d_{i1} (x) d_{i2} + d_{i2} (x) d_{i1})`
/// 4. `L^{i1 j1} L^{i2 j2} d_{i2} d_{i1} (x) d_{j2} d_{j1}`
/// 5. `L^{i1 j1} d_{j1} L^{i2 j2} (d_{i2} d_{i1} (x) d_{j2} + d_{j2} (x) d_{i2} d_{i1})`
/// 6. `L^{i2 j2} d_{j1} L^{i1 j1} (d_{i2} d_{i1} (x) d_{j2} + d_{j2} (x) d_{i2} d_{i1})`
pub fn symmetric_basis() -> Vec<Schema> {
    vec![
        Schema::from_text("G1", "a_G1", 2, &["n=2 m=2; p1->(q1,p2); p2->(q2,p1)"]),
        Schema::from_text("G2", "a_G2", 2, &["n=2 m=2; p1->(q1,p1); p2->(q2,p2)"]),
        Schema::from_text(
            "G3",
            "a_G3",
            2,
            &["n=2 m=2; p1->(q1,p2); p2->(q2,p2)", "n=2 m=2; p1->(q2,p2); p2->(q1,p2)"],
        ),
        Schema::from_text("G4", "a_G4", 2, &["n=2 m=2; p1->(q1,q2); p2->(q1,q2)"]),
        Schema::from_text(
            "G5",
            "a_G5",
            2,
            &["n=2 m=2; p1->(q1,p2); p2->(q1,q2)", "n=2 m=2; p1->(q2,p2); p2->(q2,q1)"],
        ),
        Schema::from_text(
            "G6",
            "a_G6",
            2,
            &["n=2 m=2; p1->(q1,p1); p2->(q1,q2)", "n=2 m=2; p1->(q2,p1); p2->(q2,q1)"],
        ),
    ]
}

/// The unary operators of a coordinate change `T = Id + t T1 + t^2 T2`:
/// one first-order term and five second-order terms.
///
/// 1. `d_j L^{ij} d_i`
/// 2. `d_{j2} L^{i2 j2} d_{j1} L^{i1 j1} d_{i1} d_{i2}`
/// 3. `L^{i2 j2} d_{j1} d_{j2} L^{i1 j1} d_{i1} d_{i2}`
/// 4. `d_{j1} L^{i2 j2} d_{j2} L^{i1 j1} d_{i1} d_{i2}`
/// 5. `d_{i1} L^{i1 j1} d_{j2} d_{j1} L^{i2 j2} d_{i2}`
/// 6. `d_{j2} d_{j1} L^{i1 j1} d_{i1} L^{i2 j2} d_{i2}`
pub fn unary_basis() -> Vec<Schema> {
    vec![
        Schema::from_text("K1", "K1", 1, &["n=1 m=1; p1->(q1,p1)"]),
        Schema::from_text("K2", "K2", 2, &["n=2 m=1; p1->(q1,p1); p2->(q1,p2)"]),
        Schema::from_text("K3", "K3", 2, &["n=2 m=1; p1->(q1,p1); p2->(q1,p1)"]),
        Schema::from_text("K4", "K4", 2, &["n=2 m=1; p1->(q1,p2); p2->(q1,p1)"]),
        Schema::from_text("K5", "K5", 2, &["n=2 m=1; p1->(p1,p2); p2->(q1,p2)"]),
        Schema::from_text("K6", "K6", 2, &["n=2 m=1; p1->(p2,p1); p2->(q1,p1)"]),
    ]
}

/// Locate a graph among classes: `(class index, sign)`.
pub fn classify(classes: &[GraphClass], g: &KGraph) -> Option<(usize, i32)> {
    classes
        .iter()
        .enumerate()
        .find_map(|(i, c)| c.members.iter().find(|(h, _)| h == g).map(|(_, s)| (i, *s)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generalized_two_two_has_ten_classes() {
        let cs = enumerate_graphs(2, 2, true).unwrap();
        assert_eq!(cs.len(), 10);
        let counts = class_counts(2, 2, true).unwrap();
        assert_eq!(counts.classes_up_to_mirror, 7);
        assert_eq!(counts.ordered_edge_classes, 39);
        assert_eq!(counts.ordered_edge_classes_up_to_mirror, 22);
    }

    #[test]
    fn standard_counts() {
        let c = class_counts(2, 2, false).unwrap();
        assert_eq!((c.classes, c.classes_up_to_mirror, c.ordered_edge_classes, c.ordered_edge_classes_up_to_mirror), (4, 3, 15, 9));
    }

    #[test]
    fn wedge_is_one_class_of_two_graphs() {
        let cs = enumerate_graphs(1, 2, true).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].members.len(), 2);
        assert_eq!(cs[0].representative.render(), "n=1 m=2; p1->(q1,q2)");
        assert_eq!(cs[0].mirror_sign, -1);
        assert_eq!(enumerate_graphs(1, 2, false).unwrap(), cs);
    }

    #[test]
    fn no_aerial_vertices_no_classes() {
        assert!(enumerate_graphs(0, 2, true).unwrap().is_empty());
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(enumerate_graphs(4, 2, true).is_err());
        assert!(enumerate_graphs(2, 3, true).is_err());
        assert!(enumerate_graphs(2, 0, true).is_err());
    }

    #[test]
    fn standard_classes_are_generalized_classes() {
        let gen = enumerate_graphs(2, 2, true).unwrap();
        for c in enumerate_graphs(2, 2, false).unwrap() {
            assert!(gen.iter().any(|g| g.representative == c.representative));
        }
    }

    #[test]
    fn mirror_is_an_involution_on_classes() {
        let cs = enumerate_graphs(2, 2, true).unwrap();
        for (i, c) in cs.iter().enumerate() {
            assert_eq!(cs[c.mirror].mirror, i);
        }
    }

    #[test]
    fn schemata_match_classes() {
        let cs = enumerate_graphs(2, 2, true).unwrap();
        let basis = symmetric_basis();
        assert_eq!(basis.len(), 6);
        let mut used = std::collections::BTreeSet::new();
        for s in &basis {
            for g in &s.graphs {
                let (i, sign) = classify(&cs, g).expect("schema graph is enumerated");
                assert_ne!(sign, 0);
                used.insert(i);
            }
        }
        assert_eq!(used.len(), 9);
        let missing: Vec<_> = (0..cs.len()).filter(|i| !used.contains(i)).collect();
        assert_eq!(cs[missing[0]].mirror_sign, -1);
        let unary = unary_basis();
        assert_eq!(unary.iter().filter(|s| s.t_order == 2).count(), 5);
    }

    #[test]
    fn text_round_trip() {
        let g = KGraph::parse("n=2 m=2; p1->(p2,q1); p2->(q1,q2)").unwrap();
        assert_eq!(g.render(), "n=2 m=2; p1->(p2,q1); p2->(q1,q2)");
        assert!(!g.generalized);
        assert!(KGraph::parse("n=1 m=2; p1->(q1,q1)").is_err());
        assert!(KGraph::parse("n=1 m=2; p1->(q1,q3)").is_err());
        assert!(KGraph::parse("n=1 m=2").is_err());
    }

    #[test]
    fn enumeration_is_stable() {
        assert_eq!(enumerate_graphs(3, 2, true).unwrap(), enumerate_graphs(3, 2, true).unwrap());
    }
}
