//! Finite metric graphs, labeled trees, covering towers, pruning, cycle
//! bases, and length-pairing Gram matrices.
//!
//! A labeled tree is a star of segments: each segment is divided into
//! regions carrying monodromy groups that grow toward the outer endpoint.
//! The covering tower replaces every region by one edge per orbit of its
//! group on a fixed point set, glued along orbit containment at the
//! breakpoints, with edge length (region length) / (orbit size).  The
//! tower of a modular curve's skeleton arises this way; everything here
//! is agnostic about where the labels come from.
//!
//! Lengths are exact rationals throughout.

use crate::cosets::{self, Coords, CosetPoint};
use crate::error::{Error, Result};
use crate::rings::ResidueMatrix;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

/// A vertex of a metric graph: a stable id, the base-tree position it lies
/// over, and the fiber class it represents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: String,
    pub base: String,
    pub fiber: String,
}

/// An edge with exact positive length.  `tower` records which base-tree
/// segment the edge covers (empty for hand-built graphs).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub len: BigRational,
    pub tower: String,
}

/// A finite metric graph; multi-edges and loops are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MetricGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

impl MetricGraph {
    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    /// Number of edge ends at each vertex (a loop counts twice).
    pub fn valences(&self) -> Vec<usize> {
        let mut val = vec![0usize; self.vertices.len()];
        for e in &self.edges {
            val[e.u] += 1;
            val[e.v] += 1;
        }
        val
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn total_length(&self) -> BigRational {
        self.edges.iter().map(|e| e.len.clone()).sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "vertices": self.vertices.iter().map(|v| serde_json::json!({
                "id": v.id, "base": v.base, "fiber": v.fiber,
            })).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|e| serde_json::json!({
                "u": self.vertices[e.u].id,
                "v": self.vertices[e.v].id,
                "len": format_len(&e.len),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph skeleton {\n");
        for v in &self.vertices {
            let _ = writeln!(out, "  \"{}\" [label=\"{} ({})\"];", v.id, v.fiber, v.base);
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  \"{}\" -- \"{}\" [label=\"{}\"];",
                self.vertices[e.u].id,
                self.vertices[e.v].id,
                format_len(&e.len)
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Render a rational length as "num/den", denominator always present.
pub fn format_len(len: &BigRational) -> String {
    format!("{}/{}", len.numer(), len.denom())
}

/// First Betti number |E| - |V| + 1 of a connected graph.
pub fn betti1(g: &MetricGraph) -> i64 {
    g.edges.len() as i64 - g.vertices.len() as i64 + 1
}

/// Retract all maximal trees hanging off the graph: repeatedly remove
/// valence-1 vertices.  A graph with no cycles collapses to a single
/// vertex.
pub fn prune(g: &MetricGraph) -> MetricGraph {
    let mut valence = g.valences();
    let mut vertex_alive = vec![true; g.vertices.len()];
    let mut edge_alive = vec![true; g.edges.len()];
    let mut incident = vec![Vec::new(); g.vertices.len()];
    for (i, e) in g.edges.iter().enumerate() {
        incident[e.u].push(i);
        incident[e.v].push(i);
    }
    let mut frontier: BTreeSet<usize> =
        (0..g.vertices.len()).filter(|&v| valence[v] == 1).collect();
    while let Some(&v) = frontier.iter().next() {
        frontier.remove(&v);
        if !vertex_alive[v] || valence[v] != 1 {
            continue;
        }
        vertex_alive[v] = false;
        let ei = *incident[v]
            .iter()
            .find(|&&ei| edge_alive[ei])
            .expect("valence-1 vertex has a live edge");
        edge_alive[ei] = false;
        let e = &g.edges[ei];
        let other = if e.u == v { e.v } else { e.u };
        valence[v] = 0;
        valence[other] -= 1;
        if valence[other] == 1 {
            frontier.insert(other);
        }
    }
    if vertex_alive.iter().filter(|&&a| a).count() == 0 {
        // Cannot happen: stripping leaves one at a time always leaves the
        // last endpoint standing.
        unreachable!("pruning removed every vertex");
    }
    // A cycle-free graph ends as isolated vertices plus nothing; keep one.
    let mut keep = vertex_alive.clone();
    if edge_alive.iter().all(|&a| !a) {
        let first = keep.iter().position(|&a| a).unwrap();
        keep.iter_mut().for_each(|k| *k = false);
        keep[first] = true;
    }
    let mut remap = vec![usize::MAX; g.vertices.len()];
    let mut vertices = Vec::new();
    for (i, v) in g.vertices.iter().enumerate() {
        if keep[i] {
            remap[i] = vertices.len();
            vertices.push(v.clone());
        }
    }
    let edges = g
        .edges
        .iter()
        .enumerate()
        .filter(|(i, _)| edge_alive[*i])
        .map(|(_, e)| Edge { u: remap[e.u], v: remap[e.v], len: e.len.clone(), tower: e.tower.clone() })
        .collect();
    MetricGraph { vertices, edges }
}

/// A monodromy group attached to a region: a display name and generators
/// acting on the point set.
#[derive(Debug, Clone)]
pub struct RegionLabel {
    pub name: String,
    pub generators: Vec<ResidueMatrix>,
}

/// One region of a labeled segment, with its base length.
#[derive(Debug, Clone)]
pub struct Region {
    pub label: RegionLabel,
    pub length: BigRational,
}

/// A labeled segment of the base tree, regions ordered from the central
/// vertex outward; groups must weakly increase outward.
#[derive(Debug, Clone)]
pub struct LabeledEdge {
    pub id: String,
    /// Prime-to-p multiplicity of the segment (supersingular type b).
    pub btype: u32,
    pub regions: Vec<Region>,
    pub endpoint: RegionLabel,
}

/// A star-shaped labeled tree: segments joined at a central point.
#[derive(Debug, Clone)]
pub struct LabeledTree {
    pub center: RegionLabel,
    pub edges: Vec<LabeledEdge>,
}

/// Orbit classes of one group on the point set: least representatives in
/// ascending order, with orbit sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LevelClasses {
    pub reps: Vec<Coords>,
    pub sizes: Vec<u64>,
}

impl LevelClasses {
    pub fn len(&self) -> usize {
        self.reps.len()
    }
}

/// One region of a tower edge, fully resolved into classes.
#[derive(Debug, Clone)]
pub(crate) struct TowerRegion {
    pub name: String,
    pub classes: LevelClasses,
    /// Containing class index in the next region out (or the endpoint).
    pub up: Vec<usize>,
    pub length: BigRational,
}

/// A fully resolved tower over one base segment.
#[derive(Debug, Clone)]
pub(crate) struct TowerEdge {
    pub id: String,
    pub regions: Vec<TowerRegion>,
    /// Containing central class index for each innermost-region class.
    pub into_center: Vec<usize>,
    pub endpoint: LevelClasses,
}

/// Glue resolved towers into the covering metric graph.  Vertices: one per
/// central class, one per class at each interior breakpoint (which carries
/// the outer region's partition), one per endpoint class.  Edges: one per
/// region class, of length (region length) / (class size).
pub(crate) fn assemble_tower(center: &LevelClasses, towers: &[TowerEdge]) -> MetricGraph {
    let mut g = MetricGraph::default();
    for (i, rep) in center.reps.iter().enumerate() {
        g.vertices.push(Vertex {
            id: format!("c{i}"),
            base: "central".to_string(),
            fiber: rep.to_string(),
        });
    }
    for tower in towers {
        let levels = tower.regions.len();
        // Breakpoint i (1-based) carries region i's partition; the outer
        // boundary of the last region is the endpoint.
        let mut layer_start = vec![0usize; levels + 1];
        for (i, region) in tower.regions.iter().enumerate().skip(1) {
            layer_start[i] = g.vertices.len();
            for (j, rep) in region.classes.reps.iter().enumerate() {
                g.vertices.push(Vertex {
                    id: format!("{}:{}:{}", tower.id, region.name, j),
                    base: format!("{}:{}", tower.id, region.name),
                    fiber: rep.to_string(),
                });
            }
        }
        layer_start[levels] = g.vertices.len();
        for (j, rep) in tower.endpoint.reps.iter().enumerate() {
            g.vertices.push(Vertex {
                id: format!("{}:end:{}", tower.id, j),
                base: format!("{}:end", tower.id),
                fiber: rep.to_string(),
            });
        }
        for (i, region) in tower.regions.iter().enumerate() {
            for (c, &size) in region.classes.sizes.iter().enumerate() {
                let inner = if i == 0 {
                    tower.into_center[c]
                } else {
                    layer_start[i] + c
                };
                let outer = layer_start[i + 1] + region.up[c];
                g.edges.push(Edge {
                    u: inner,
                    v: outer,
                    len: &region.length / BigRational::from_integer(BigInt::from(size)),
                    tower: tower.id.clone(),
                });
            }
        }
    }
    g
}

/// Build the covering graph of a labeled tree over a point set: fibers are
/// orbits of each label, glued along orbit containment, with the length
/// rule len(region) / |orbit|.
pub fn build_tower(tree: &LabeledTree, points: &[CosetPoint]) -> Result<MetricGraph> {
    let mut partitions: HashMap<String, (LevelClasses, Vec<usize>)> = HashMap::new();
    let mut membership = |label: &RegionLabel| -> Result<(LevelClasses, Vec<usize>)> {
        if let Some(hit) = partitions.get(&label.name) {
            return Ok(hit.clone());
        }
        let orbits = cosets::orbits(&label.generators, points)?;
        let mut point_class = vec![usize::MAX; points.len()];
        let index: HashMap<CosetPoint, usize> =
            points.iter().enumerate().map(|(i, p)| (*p, i)).collect();
        let mut reps = Vec::with_capacity(orbits.len());
        let mut sizes = Vec::with_capacity(orbits.len());
        for (c, orbit) in orbits.iter().enumerate() {
            reps.push(orbit[0].coords);
            sizes.push(orbit.len() as u64);
            for pt in orbit {
                point_class[index[pt]] = c;
            }
        }
        let value = (LevelClasses { reps, sizes }, point_class);
        partitions.insert(label.name.clone(), value.clone());
        Ok(value)
    };

    let (center, center_class) = membership(&tree.center)?;
    let mut towers = Vec::new();
    for edge in &tree.edges {
        if edge.regions.is_empty() {
            return Err(Error::domain(format!("segment {} has no regions", edge.id)));
        }
        let mut resolved: Vec<(LevelClasses, Vec<usize>, &Region)> = Vec::new();
        for region in &edge.regions {
            let (classes, point_class) = membership(&region.label)?;
            resolved.push((classes, point_class, region));
        }
        let (end_classes, end_class) = membership(&edge.endpoint)?;
        let coarsen = |fine: &(LevelClasses, Vec<usize>, &Region),
                       coarse_map: &[usize],
                       what: &str|
         -> Result<Vec<usize>> {
            let (classes, point_class, _) = fine;
            let mut up = vec![usize::MAX; classes.len()];
            for (pt_idx, &c) in point_class.iter().enumerate() {
                let outer = coarse_map[pt_idx];
                if up[c] == usize::MAX {
                    up[c] = outer;
                } else if up[c] != outer {
                    return Err(Error::InvalidLabeling(format!(
                        "orbit of {} under {} splits across {what} classes",
                        classes.reps[c], edge.id
                    )));
                }
            }
            Ok(up)
        };
        let into_center = coarsen(&resolved[0], &center_class, "central")?;
        let mut regions = Vec::new();
        for i in 0..resolved.len() {
            let up = if i + 1 < resolved.len() {
                coarsen(&resolved[i], &resolved[i + 1].1, "breakpoint")?
            } else {
                coarsen(&resolved[i], &end_class, "endpoint")?
            };
            regions.push(TowerRegion {
                name: resolved[i].2.label.name.clone(),
                classes: resolved[i].0.clone(),
                up,
                length: resolved[i].2.length.clone(),
            });
        }
        towers.push(TowerEdge {
            id: edge.id.clone(),
            regions,
            into_center,
            endpoint: end_classes,
        });
    }
    Ok(assemble_tower(&center, &towers))
}

/// A cycle as a signed list of edge indices; +1 traverses u -> v.
pub type Cycle = Vec<(usize, i8)>;

/// How a cycle basis was produced.
#[derive(Debug, Clone)]
pub enum BasisMode {
    /// Fundamental cycles of a breadth-first spanning tree.
    SpanningTree,
    /// The ladder basis of a two-rail tower graph.
    Ladder(LadderContext),
}

/// Data pinning down the ladder basis: the central vertices in rail order,
/// the base segment j0, and the partner segments in fixed order.
#[derive(Debug, Clone)]
pub struct LadderContext {
    pub marked_central: Vec<String>,
    pub base_edge: String,
    pub partner_edges: Vec<String>,
}

/// An ordered cycle basis of H_1.
#[derive(Debug, Clone)]
pub struct CycleBasis {
    pub cycles: Vec<Cycle>,
    pub ladder: bool,
}

/// Compute a cycle basis.  Spanning-tree mode yields the fundamental
/// cycles of a breadth-first tree.  Ladder mode yields the rung cycles
/// gamma_(k,i): rung k runs between consecutive marked central vertices
/// through the towers of the base segment and of partner i, with signs
/// alternating in k so that shared-rail pairings come out positive.
pub fn cycle_basis(g: &MetricGraph, mode: &BasisMode) -> Result<CycleBasis> {
    match mode {
        BasisMode::SpanningTree => spanning_tree_basis(g),
        BasisMode::Ladder(ctx) => ladder_basis(g, ctx),
    }
}

fn spanning_tree_basis(g: &MetricGraph) -> Result<CycleBasis> {
    let n = g.vertices.len();
    if n == 0 {
        return Ok(CycleBasis { cycles: Vec::new(), ladder: false });
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in g.edges.iter().enumerate() {
        adj[e.u].push(i);
        adj[e.v].push(i);
    }
    // parent edge of each vertex in the BFS tree, rooted at 0.
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut in_tree = vec![false; g.edges.len()];
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &ei in &adj[v] {
            let e = &g.edges[ei];
            let w = if e.u == v { e.v } else { e.u };
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some(ei);
                in_tree[ei] = true;
                queue.push_back(w);
            }
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(Error::domain("cycle basis needs a connected graph".to_string()));
    }
    // Signed path from v up to the root.
    let path_to_root = |mut v: usize| -> Cycle {
        let mut path = Vec::new();
        while let Some(ei) = parent[v] {
            let e = &g.edges[ei];
            if e.v == v {
                // traverse v -> u, against the edge's orientation
                path.push((ei, -1i8));
                v = e.u;
            } else {
                path.push((ei, 1i8));
                v = e.v;
            }
        }
        path
    };
    let mut cycles = Vec::new();
    for (ei, e) in g.edges.iter().enumerate() {
        if in_tree[ei] {
            continue;
        }
        // e traversed u -> v, then the tree path v -> root -> u.
        let mut cycle: Cycle = vec![(ei, 1)];
        cycle.extend(path_to_root(e.v));
        for (ej, s) in path_to_root(e.u) {
            cycle.push((ej, -s));
        }
        cycles.push(compress(cycle));
    }
    Ok(CycleBasis { cycles, ladder: false })
}

/// Net signed coefficients of a cycle, dropping canceled edges.
fn compress(cycle: Cycle) -> Cycle {
    let mut net: HashMap<usize, i64> = HashMap::new();
    for (ei, s) in cycle {
        *net.entry(ei).or_insert(0) += i64::from(s);
    }
    let mut out: Cycle = net
        .into_iter()
        .filter(|&(_, c)| c != 0)
        .map(|(ei, c)| {
            debug_assert!(c.abs() == 1, "cycle traverses an edge twice in one direction");
            (ei, c as i8)
        })
        .collect();
    out.sort_unstable();
    out
}

fn ladder_basis(g: &MetricGraph, ctx: &LadderContext) -> Result<CycleBasis> {
    let rails = ctx.marked_central.len();
    let mut cycles = Vec::new();
    let base_paths = tower_paths(g, &ctx.base_edge, &ctx.marked_central)?;
    for partner in &ctx.partner_edges {
        let partner_paths = tower_paths(g, partner, &ctx.marked_central)?;
        for k in 0..rails.saturating_sub(1) {
            // Rung k (1-based k+1): down the base tower from rail k, back up
            // to rail k+1, down the partner tower, back to rail k.  The
            // shared outer segments cancel in the net coefficients.  Signs
            // alternate with k so shared-rail pairings are positive.
            let sign = if k % 2 == 0 { 1i8 } else { -1i8 };
            let mut cycle: Cycle = Vec::new();
            let mut add = |path: &Cycle, s: i8| {
                for &(ei, es) in path {
                    cycle.push((ei, es * s));
                }
            };
            add(&base_paths[k], sign);
            add(&base_paths[k + 1], -sign);
            add(&partner_paths[k + 1], sign);
            add(&partner_paths[k], -sign);
            cycles.push(compress(cycle));
        }
    }
    Ok(CycleBasis { cycles, ladder: true })
}

/// Signed edge paths from each listed central vertex to the endpoint
/// vertex of one tower, inside that tower's subgraph (which is a tree).
fn tower_paths(g: &MetricGraph, tower: &str, from: &[String]) -> Result<Vec<Cycle>> {
    let end_base = format!("{tower}:end");
    let target = {
        let mut hits = g.vertices.iter().enumerate().filter(|(_, v)| v.base == end_base);
        let first = hits.next().map(|(i, _)| i).ok_or_else(|| {
            Error::domain(format!("tower {tower} has no endpoint vertex"))
        })?;
        if hits.next().is_some() {
            return Err(Error::domain(format!(
                "tower {tower} has several endpoint vertices; ladder basis undefined"
            )));
        }
        first
    };
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); g.vertices.len()];
    for (i, e) in g.edges.iter().enumerate() {
        if e.tower == tower {
            adj[e.u].push(i);
            adj[e.v].push(i);
        }
    }
    // BFS from the endpoint through the tower subgraph.
    let mut parent: Vec<Option<usize>> = vec![None; g.vertices.len()];
    let mut seen = vec![false; g.vertices.len()];
    seen[target] = true;
    let mut queue = std::collections::VecDeque::from([target]);
    while let Some(v) = queue.pop_front() {
        for &ei in &adj[v] {
            let e = &g.edges[ei];
            let w = if e.u == v { e.v } else { e.u };
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some(ei);
                queue.push_back(w);
            }
        }
    }
    from.iter()
        .map(|id| {
            let mut v = g
                .vertex_index(id)
                .ok_or_else(|| Error::domain(format!("no vertex with id {id}")))?;
            if !seen[v] {
                return Err(Error::domain(format!(
                    "vertex {id} is not connected to tower {tower}"
                )));
            }
            let mut path: Cycle = Vec::new();
            while v != target {
                let ei = parent[v].expect("reached by BFS");
                let e = &g.edges[ei];
                if e.u == v {
                    path.push((ei, 1));
                    v = e.v;
                } else {
                    path.push((ei, -1));
                    v = e.u;
                }
            }
            Ok(path)
        })
        .collect()
}

/// Gram matrix of the length pairing on a cycle basis, scaled by a
/// positive integer; every scaled entry must be an integer.
pub fn gram_matrix(
    g: &MetricGraph,
    basis: &CycleBasis,
    scale: &BigInt,
) -> Result<Vec<Vec<BigInt>>> {
    if scale.sign() != num_bigint::Sign::Plus {
        return Err(Error::domain("scale must be a positive integer".to_string()));
    }
    let coeffs: Vec<HashMap<usize, i64>> = basis
        .cycles
        .iter()
        .map(|cycle| {
            let mut map = HashMap::new();
            for &(ei, s) in cycle {
                *map.entry(ei).or_insert(0i64) += i64::from(s);
            }
            map
        })
        .collect();
    let n = coeffs.len();
    let mut out = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let mut pairing = BigRational::zero();
            for (&ei, &ci) in &coeffs[i] {
                if let Some(&cj) = coeffs[j].get(&ei) {
                    pairing += &g.edges[ei].len * BigRational::from_integer(BigInt::from(ci * cj));
                }
            }
            let scaled = pairing * BigRational::from_integer(scale.clone());
            if !scaled.is_integer() {
                return Err(Error::NormalizationInsufficient(
                    scaled.to_string(),
                    scale.to_string(),
                ));
            }
            out[i][j] = scaled.to_integer();
            out[j][i] = out[i][j].clone();
        }
    }
    Ok(out)
}

/// The least positive integer clearing all edge-length denominators.
pub fn integrality_normalizer(g: &MetricGraph) -> BigUint {
    let mut l = BigInt::one();
    for e in &g.edges {
        l = l.lcm(e.len.denom());
    }
    l.magnitude().clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cosets::{
        enumerate_coset_points, level_m_points, subgroup_generators, CurveFamily, SchemeKind,
        SubgroupKind,
    };
    use crate::rings::Modulus;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// Two vertices joined by parallel edges of the given lengths.
    fn banana(lens: &[BigRational]) -> MetricGraph {
        MetricGraph {
            vertices: vec![
                Vertex { id: "a".into(), base: "".into(), fiber: "".into() },
                Vertex { id: "b".into(), base: "".into(), fiber: "".into() },
            ],
            edges: lens
                .iter()
                .map(|l| Edge { u: 0, v: 1, len: l.clone(), tower: String::new() })
                .collect(),
        }
    }

    fn path_graph(k: usize) -> MetricGraph {
        MetricGraph {
            vertices: (0..k)
                .map(|i| Vertex { id: format!("v{i}"), base: "".into(), fiber: "".into() })
                .collect(),
            edges: (1..k)
                .map(|i| Edge { u: i - 1, v: i, len: rat(1, 1), tower: String::new() })
                .collect(),
        }
    }

    #[test]
    fn betti_numbers() {
        assert_eq!(betti1(&banana(&[rat(1, 1), rat(2, 1)])), 1);
        assert_eq!(betti1(&banana(&[rat(1, 1), rat(1, 1), rat(1, 1)])), 2);
        assert_eq!(betti1(&path_graph(5)), 0);
    }

    #[test]
    fn prune_path_to_single_vertex() {
        let pruned = prune(&path_graph(4));
        assert_eq!(pruned.vertices.len(), 1);
        assert!(pruned.edges.is_empty());
    }

    #[test]
    fn prune_keeps_cycle_drops_pendant() {
        // Banana with a pendant path attached at b.
        let mut g = banana(&[rat(1, 2), rat(1, 3)]);
        g.vertices.push(Vertex { id: "t".into(), base: "".into(), fiber: "".into() });
        g.edges.push(Edge { u: 1, v: 2, len: rat(7, 1), tower: String::new() });
        let pruned = prune(&g);
        assert_eq!(pruned.vertices.len(), 2);
        assert_eq!(pruned.edges.len(), 2);
        assert_eq!(betti1(&pruned), betti1(&g));
        // Idempotent.
        assert_eq!(prune(&pruned), pruned);
    }

    #[test]
    fn normalizer_is_lcm_of_denominators() {
        assert_eq!(integrality_normalizer(&banana(&[rat(1, 6), rat(5, 6)])), BigUint::from(6u32));
        assert_eq!(integrality_normalizer(&banana(&[rat(1, 2), rat(1, 3)])), BigUint::from(6u32));
        assert_eq!(integrality_normalizer(&banana(&[rat(3, 1), rat(4, 1)])), BigUint::from(1u32));
    }

    #[test]
    fn gram_single_cycle_and_banana() {
        let g = banana(&[rat(3, 1), rat(4, 1)]);
        let basis = cycle_basis(&g, &BasisMode::SpanningTree).unwrap();
        assert_eq!(basis.cycles.len(), 1);
        let a = gram_matrix(&g, &basis, &BigInt::one()).unwrap();
        assert_eq!(a, vec![vec![BigInt::from(7)]]);
    }

    #[test]
    fn gram_theta_graph_with_explicit_cycles() {
        // Edges a, b, c between the same two vertices; cycles (a, -b) and
        // (b, -c) share edge b with consistent orientation.
        let g = banana(&[rat(2, 1), rat(5, 1), rat(11, 1)]);
        let basis = CycleBasis {
            cycles: vec![vec![(0, 1), (1, -1)], vec![(1, 1), (2, -1)]],
            ladder: false,
        };
        let a = gram_matrix(&g, &basis, &BigInt::one()).unwrap();
        let want: Vec<Vec<BigInt>> = vec![
            vec![BigInt::from(7), BigInt::from(-5)],
            vec![BigInt::from(-5), BigInt::from(16)],
        ];
        assert_eq!(a, want);
        // Flipping the second cycle makes the shared contribution positive.
        let basis = CycleBasis {
            cycles: vec![vec![(0, 1), (1, -1)], vec![(1, -1), (2, 1)]],
            ladder: false,
        };
        let a = gram_matrix(&g, &basis, &BigInt::one()).unwrap();
        assert_eq!(a[0][1], BigInt::from(5));
        assert_eq!(a[0][0], BigInt::from(7));
        assert_eq!(a[1][1], BigInt::from(16));
    }

    #[test]
    fn gram_rejects_insufficient_scale() {
        // Cycle length 1/6 + 1/6 = 1/3: scale 2 leaves 2/3, scale 3 works.
        let g = banana(&[rat(1, 6), rat(1, 6)]);
        let basis = cycle_basis(&g, &BasisMode::SpanningTree).unwrap();
        assert!(matches!(
            gram_matrix(&g, &basis, &BigInt::from(2)),
            Err(Error::NormalizationInsufficient(..))
        ));
        let a = gram_matrix(&g, &basis, &BigInt::from(3)).unwrap();
        assert_eq!(a, vec![vec![BigInt::from(1)]]);
        let a = gram_matrix(&g, &basis, &BigInt::from(6)).unwrap();
        assert_eq!(a, vec![vec![BigInt::from(2)]]);
    }

    #[test]
    fn spanning_tree_basis_sizes() {
        assert_eq!(
            cycle_basis(&path_graph(4), &BasisMode::SpanningTree).unwrap().cycles.len(),
            0
        );
        let theta = banana(&[rat(1, 1), rat(1, 1), rat(1, 1)]);
        assert_eq!(cycle_basis(&theta, &BasisMode::SpanningTree).unwrap().cycles.len(), 2);
    }

    #[test]
    fn constant_label_tower_is_isometric_to_segment() {
        // A single auxiliary-level point; every group acts trivially.
        let md = Modulus::new(5, 0, 1).unwrap();
        let id = crate::rings::ResidueMatrix::identity(md);
        let label = |name: &str| RegionLabel { name: name.into(), generators: vec![id] };
        let tree = LabeledTree {
            center: label("g"),
            edges: vec![LabeledEdge {
                id: "seg".into(),
                btype: 1,
                regions: vec![
                    Region { label: label("g"), length: rat(2, 3) },
                    Region { label: label("g"), length: rat(1, 3) },
                ],
                endpoint: label("g"),
            }],
        };
        let points = level_m_points(CurveFamily::Gamma0, 5, 1).unwrap();
        let g = build_tower(&tree, &points).unwrap();
        assert_eq!(g.vertices.len(), 3);
        assert_eq!(g.edges.len(), 2);
        assert_eq!(g.total_length(), rat(1, 1));
        assert_eq!(betti1(&g), 0);
    }

    #[test]
    fn tower_of_level_five_segment() {
        // One segment of base length 5/6 with the Borel group everywhere
        // and full SL_2 at the endpoint, over P^1(F_5): two covering edges
        // of lengths 1/6 and 5/6 meeting at the single outer vertex.
        let t = subgroup_generators(SubgroupKind::Gamma0, 5, 1).unwrap();
        let sl2 = subgroup_generators(SubgroupKind::FullSl2, 5, 1).unwrap();
        let tree = LabeledTree {
            center: RegionLabel { name: "gamma0".into(), generators: t.clone() },
            edges: vec![LabeledEdge {
                id: "ss0".into(),
                btype: 1,
                regions: vec![Region {
                    label: RegionLabel { name: "gamma0".into(), generators: t },
                    length: rat(5, 6),
                }],
                endpoint: RegionLabel { name: "sl2".into(), generators: sl2 },
            }],
        };
        let points = enumerate_coset_points(SchemeKind::F0, 5, 1, 3000).unwrap();
        let g = build_tower(&tree, &points).unwrap();
        assert_eq!(g.vertices.len(), 3);
        assert_eq!(g.edges.len(), 2);
        let mut lens: Vec<BigRational> = g.edges.iter().map(|e| e.len.clone()).collect();
        lens.sort();
        assert_eq!(lens, vec![rat(1, 6), rat(5, 6)]);
        // Degree conservation: orbit sizes over the region sum to |P^1|.
        assert_eq!(g.total_length(), rat(1, 1));
    }

    #[test]
    fn labeling_violation_is_detected() {
        // Center is the full group but the (only) region is a proper
        // subgroup whose orbits the endpoint partition does not coarsen:
        // make the endpoint the proper subgroup and the region the full
        // group, so region orbits split across endpoint classes.
        let t = subgroup_generators(SubgroupKind::Gamma0, 5, 1).unwrap();
        let sl2 = subgroup_generators(SubgroupKind::FullSl2, 5, 1).unwrap();
        let tree = LabeledTree {
            center: RegionLabel { name: "sl2".into(), generators: sl2.clone() },
            edges: vec![LabeledEdge {
                id: "bad".into(),
                btype: 1,
                regions: vec![Region {
                    label: RegionLabel { name: "sl2".into(), generators: sl2 },
                    length: rat(1, 1),
                }],
                endpoint: RegionLabel { name: "gamma0".into(), generators: t },
            }],
        };
        let points = enumerate_coset_points(SchemeKind::F0, 5, 1, 3000).unwrap();
        assert!(matches!(
            build_tower(&tree, &points),
            Err(Error::InvalidLabeling(_))
        ));
    }

    #[test]
    fn json_and_dot_are_stable() {
        let g = banana(&[rat(1, 6), rat(5, 6)]);
        let json = g.to_json();
        assert_eq!(json["edges"][0]["len"], "1/6");
        assert_eq!(json["edges"][1]["len"], "5/6");
        assert_eq!(json["vertices"][0]["id"], "a");
        let dot = g.to_dot();
        assert!(dot.starts_with("graph skeleton {"));
        assert!(dot.contains("\"a\" -- \"b\" [label=\"1/6\"];"));
    }
}
