//! Finite polygonal 2-complexes.
//!
//! A [`CellComplex`] stores vertices as dense indices, edges as ordered
//! endpoint pairs and tiles as closed cycles of directed edge references.
//! Every complex built by this crate is a closed disk whose tiles are all
//! traversed in the same rotational sense, so no half-edge machinery is
//! needed: incidence is recovered from the tile cycles on demand.

use std::fmt;

use crate::error::{Error, Result};

/// Index of a tile type within a rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId(pub u32);

impl TypeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One side of a tile: an edge, traversed either along its stored direction
/// or against it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Side {
    pub edge: u32,
    pub reversed: bool,
}

impl Side {
    pub fn forward(edge: u32) -> Self {
        Side {
            edge,
            reversed: false,
        }
    }

    pub fn backward(edge: u32) -> Self {
        Side {
            edge,
            reversed: true,
        }
    }

    pub fn flip(self) -> Self {
        Side {
            edge: self.edge,
            reversed: !self.reversed,
        }
    }
}

/// A polygonal tile. `sides[0]` starts at the tile's first corner, so side
/// `i` is the image of edge `i` of the tile type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tile {
    pub ty: TypeId,
    pub sides: Vec<Side>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CellComplex {
    pub num_vertices: usize,
    pub edges: Vec<[u32; 2]>,
    pub tiles: Vec<Tile>,
}

impl CellComplex {
    pub fn new(num_vertices: usize, edges: Vec<[u32; 2]>, tiles: Vec<Tile>) -> Self {
        CellComplex {
            num_vertices,
            edges,
            tiles,
        }
    }

    /// Builds a complex from tiles given as vertex cycles. Each unordered
    /// vertex pair becomes one edge, stored in the direction of its first
    /// traversal.
    pub fn from_vertex_cycles(num_vertices: usize, cycles: &[(TypeId, Vec<u32>)]) -> Result<Self> {
        let mut index = std::collections::HashMap::new();
        let mut edges = Vec::new();
        let mut tiles = Vec::with_capacity(cycles.len());
        for (ty, cycle) in cycles {
            if cycle.is_empty() {
                return Err(Error::InvalidArgument("empty tile cycle".into()));
            }
            let mut sides = Vec::with_capacity(cycle.len());
            for (i, &a) in cycle.iter().enumerate() {
                let b = cycle[(i + 1) % cycle.len()];
                if a as usize >= num_vertices || b as usize >= num_vertices {
                    return Err(Error::InvalidArgument(format!(
                        "vertex {} out of range (complex has {num_vertices})",
                        a.max(b)
                    )));
                }
                let key = (a.min(b), a.max(b));
                let e = *index.entry(key).or_insert_with(|| {
                    edges.push([a, b]);
                    (edges.len() - 1) as u32
                });
                sides.push(Side {
                    edge: e,
                    reversed: edges[e as usize][0] != a,
                });
            }
            tiles.push(Tile { ty: *ty, sides });
        }
        Ok(CellComplex {
            num_vertices,
            edges,
            tiles,
        })
    }

    /// A single polygon with `n` sides.
    pub fn polygon(ty: TypeId, n: usize) -> Self {
        let cycle: Vec<u32> = (0..n as u32).collect();
        Self::from_vertex_cycles(n, &[(ty, cycle)]).expect("polygon is well formed")
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_tiles(&self) -> usize {
        self.tiles.len()
    }

    pub fn tail(&self, side: Side) -> u32 {
        let [a, b] = self.edges[side.edge as usize];
        if side.reversed {
            b
        } else {
            a
        }
    }

    pub fn head(&self, side: Side) -> u32 {
        let [a, b] = self.edges[side.edge as usize];
        if side.reversed {
            a
        } else {
            b
        }
    }

    /// Corner vertices of a tile, starting at its first corner.
    pub fn tile_vertices(&self, tile: usize) -> impl Iterator<Item = u32> + '_ {
        self.tiles[tile].sides.iter().map(move |&s| self.tail(s))
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices as i64 - self.edges.len() as i64 + self.tiles.len() as i64
    }

    /// For each edge, the `(tile, side index)` pairs that traverse it.
    pub fn edge_incidence(&self) -> Vec<Vec<(u32, u32)>> {
        let mut inc = vec![Vec::new(); self.edges.len()];
        for (t, tile) in self.tiles.iter().enumerate() {
            for (i, s) in tile.sides.iter().enumerate() {
                if let Some(slot) = inc.get_mut(s.edge as usize) {
                    slot.push((t as u32, i as u32));
                }
            }
        }
        inc
    }

    /// For each vertex, the sorted list of tiles having it as a corner.
    pub fn vertex_tiles(&self) -> Vec<Vec<u32>> {
        let mut vt = vec![Vec::new(); self.num_vertices];
        for t in 0..self.tiles.len() {
            for v in self.tile_vertices(t) {
                vt[v as usize].push(t as u32);
            }
        }
        for list in &mut vt {
            list.dedup();
            list.sort_unstable();
            list.dedup();
        }
        vt
    }

    /// Number of edges at each vertex.
    pub fn vertex_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_vertices];
        for &[a, b] in &self.edges {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        deg
    }

    /// Marks vertices lying on an edge with exactly one incident tile.
    pub fn boundary_vertex_mask(&self) -> Vec<bool> {
        let mut count = vec![0u8; self.edges.len()];
        for tile in &self.tiles {
            for s in &tile.sides {
                count[s.edge as usize] = count[s.edge as usize].saturating_add(1);
            }
        }
        let mut mask = vec![false; self.num_vertices];
        for (e, &c) in count.iter().enumerate() {
            if c == 1 {
                let [a, b] = self.edges[e];
                mask[a as usize] = true;
                mask[b as usize] = true;
            }
        }
        mask
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DanglingVertex(u32),
    DanglingEdge(u32),
    SelfLoop(u32),
    EdgeOverShared { edge: u32, count: usize },
    BadEdgeRef { tile: u32, side: u32 },
    OpenCycle { tile: u32, side: u32 },
    TooFewSides { tile: u32, sides: usize },
    InconsistentOrientation { edge: u32 },
    NonManifoldVertex(u32),
    Disconnected { components: usize },
    BoundaryComponents(usize),
    Euler(i64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingVertex(v) => write!(f, "dangling vertex {v}"),
            Violation::DanglingEdge(e) => write!(f, "dangling edge {e}"),
            Violation::SelfLoop(e) => write!(f, "self-loop edge {e}"),
            Violation::EdgeOverShared { edge, count } => {
                write!(
                    f,
                    "edge over-shared: edge {edge} is used by {count} tile sides"
                )
            }
            Violation::BadEdgeRef { tile, side } => {
                write!(f, "tile {tile} side {side} references a missing edge")
            }
            Violation::OpenCycle { tile, side } => {
                write!(f, "open tile cycle: tile {tile} breaks after side {side}")
            }
            Violation::TooFewSides { tile, sides } => {
                write!(f, "tile {tile} has {sides} sides (at least 3 required)")
            }
            Violation::InconsistentOrientation { edge } => {
                write!(
                    f,
                    "edge {edge} is traversed in the same direction by both tiles"
                )
            }
            Violation::NonManifoldVertex(v) => write!(f, "non-manifold vertex {v}"),
            Violation::Disconnected { components } => {
                write!(f, "complex has {components} connected components")
            }
            Violation::BoundaryComponents(n) => {
                write!(f, "expected one boundary cycle, found {n}")
            }
            Violation::Euler(chi) => write!(f, "Euler characteristic {chi}, disk requires 1"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub euler: i64,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok (chi = {})", self.euler);
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "- {v}")?;
        }
        Ok(())
    }
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra as usize] = rb;
        }
    }
}

/// Checks the closed-disk conditions: well-formed tile cycles with at least
/// three sides, every edge on one or two tiles (traversed in opposite
/// directions when on two), manifold vertex stars, one connected component,
/// one boundary cycle and Euler characteristic 1.
pub fn validate_complex(c: &CellComplex) -> ValidationReport {
    let mut violations = Vec::new();
    let ne = c.edges.len();
    let nv = c.num_vertices;

    for (e, &[a, b]) in c.edges.iter().enumerate() {
        if a == b {
            violations.push(Violation::SelfLoop(e as u32));
        }
        if a as usize >= nv || b as usize >= nv {
            violations.push(Violation::DanglingEdge(e as u32));
        }
    }

    let mut structurally_sound = true;
    for (t, tile) in c.tiles.iter().enumerate() {
        if tile.sides.len() < 3 {
            violations.push(Violation::TooFewSides {
                tile: t as u32,
                sides: tile.sides.len(),
            });
        }
        if let Some(i) = tile.sides.iter().position(|s| s.edge as usize >= ne) {
            violations.push(Violation::BadEdgeRef {
                tile: t as u32,
                side: i as u32,
            });
            structurally_sound = false;
            continue;
        }
        let n = tile.sides.len();
        for i in 0..n {
            if c.head(tile.sides[i]) != c.tail(tile.sides[(i + 1) % n]) {
                violations.push(Violation::OpenCycle {
                    tile: t as u32,
                    side: i as u32,
                });
                structurally_sound = false;
                break;
            }
        }
    }
    if !structurally_sound
        || violations
            .iter()
            .any(|v| matches!(v, Violation::DanglingEdge(_)))
    {
        return ValidationReport {
            violations,
            euler: c.euler_characteristic(),
        };
    }

    let inc = c.edge_incidence();
    for (e, sides) in inc.iter().enumerate() {
        match sides.len() {
            0 => violations.push(Violation::DanglingEdge(e as u32)),
            1 => {}
            2 => {
                let s0 = c.tiles[sides[0].0 as usize].sides[sides[0].1 as usize];
                let s1 = c.tiles[sides[1].0 as usize].sides[sides[1].1 as usize];
                if s0.reversed == s1.reversed {
                    violations.push(Violation::InconsistentOrientation { edge: e as u32 });
                }
            }
            n => violations.push(Violation::EdgeOverShared {
                edge: e as u32,
                count: n,
            }),
        }
    }

    let mut used = vec![false; nv];
    for &[a, b] in &c.edges {
        used[a as usize] = true;
        used[b as usize] = true;
    }
    for (v, &u) in used.iter().enumerate() {
        if !u {
            violations.push(Violation::DanglingVertex(v as u32));
        }
    }

    // Vertex stars: edge-ends at a vertex are linked through tile corners;
    // a manifold vertex has all its edge-ends in one class.
    let end_at = |e: u32, v: u32| -> u32 { 2 * e + u32::from(c.edges[e as usize][1] == v) };
    let mut ends = UnionFind::new(2 * ne);
    for tile in &c.tiles {
        let n = tile.sides.len();
        for i in 0..n {
            let prev = tile.sides[(i + n - 1) % n];
            let cur = tile.sides[i];
            let v = c.tail(cur);
            ends.union(end_at(prev.edge, v), end_at(cur.edge, v));
        }
    }
    let mut star_root: Vec<Option<u32>> = vec![None; nv];
    let mut non_manifold = vec![false; nv];
    for (e, &[a, b]) in c.edges.iter().enumerate() {
        if a == b {
            continue;
        }
        for (k, v) in [(0u32, a), (1u32, b)] {
            let r = ends.find(2 * e as u32 + k);
            match star_root[v as usize] {
                None => star_root[v as usize] = Some(r),
                Some(r0) if r0 != r => non_manifold[v as usize] = true,
                _ => {}
            }
        }
    }
    for (v, &bad) in non_manifold.iter().enumerate() {
        if bad {
            violations.push(Violation::NonManifoldVertex(v as u32));
        }
    }

    let mut comps = UnionFind::new(nv);
    for &[a, b] in &c.edges {
        comps.union(a, b);
    }
    let mut roots: Vec<u32> = (0..nv as u32)
        .filter(|&v| used[v as usize])
        .map(|v| comps.find(v))
        .collect();
    roots.sort_unstable();
    roots.dedup();
    if roots.len() > 1 {
        violations.push(Violation::Disconnected {
            components: roots.len(),
        });
    }

    let cycles = boundary_cycles(c, &inc).map(|cs| cs.len());
    match cycles {
        Some(1) => {}
        Some(n) => violations.push(Violation::BoundaryComponents(n)),
        None => violations.push(Violation::BoundaryComponents(0)),
    }

    let euler = c.euler_characteristic();
    if euler != 1 {
        violations.push(Violation::Euler(euler));
    }
    ValidationReport { violations, euler }
}

/// Splits the boundary sides into cycles. `None` when the boundary branches
/// (a vertex with more than one outgoing boundary side).
fn boundary_cycles(c: &CellComplex, inc: &[Vec<(u32, u32)>]) -> Option<Vec<Vec<Side>>> {
    let mut next: std::collections::HashMap<u32, Side> = std::collections::HashMap::new();
    let mut order = Vec::new();
    for (e, sides) in inc.iter().enumerate() {
        if sides.len() == 1 {
            let (t, i) = sides[0];
            let s = c.tiles[t as usize].sides[i as usize];
            debug_assert_eq!(s.edge as usize, e);
            if next.insert(c.tail(s), s).is_some() {
                return None;
            }
            order.push(s);
        }
    }
    let mut seen = std::collections::HashSet::new();
    let mut cycles = Vec::new();
    for start in order {
        if seen.contains(&start.edge) {
            continue;
        }
        let mut cycle = Vec::new();
        let mut cur = start;
        loop {
            if !seen.insert(cur.edge) {
                return None;
            }
            cycle.push(cur);
            cur = *next.get(&c.head(cur))?;
            if cur == start {
                break;
            }
        }
        cycles.push(cycle);
    }
    Some(cycles)
}

/// The boundary of a disk complex as a closed chain of sides, each oriented
/// the way its unique tile traverses it. The cycle starts at the boundary
/// side with the smallest edge index.
pub fn boundary_cycle(c: &CellComplex) -> Result<Vec<Side>> {
    let inc = c.edge_incidence();
    let mut cycles = boundary_cycles(c, &inc)
        .ok_or_else(|| Error::NotADisk("boundary is not a union of simple cycles".into()))?;
    match cycles.len() {
        1 => {
            let mut cycle = cycles.pop().unwrap();
            let start = (0..cycle.len()).min_by_key(|&i| cycle[i].edge).unwrap();
            cycle.rotate_left(start);
            Ok(cycle)
        }
        0 => Err(Error::NotADisk("no boundary edges".into())),
        n => Err(Error::NotADisk(format!("{n} boundary cycles"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AdjacencyMode {
    /// Tiles meet in at least one point.
    Skinny,
    /// Tiles share at least one edge.
    Fat,
}

impl std::str::FromStr for AdjacencyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "skinny" => Ok(AdjacencyMode::Skinny),
            "fat" => Ok(AdjacencyMode::Fat),
            other => Err(Error::InvalidArgument(format!(
                "unknown norm `{other}` (skinny|fat)"
            ))),
        }
    }
}

impl fmt::Display for AdjacencyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdjacencyMode::Skinny => "skinny",
            AdjacencyMode::Fat => "fat",
        })
    }
}

/// Symmetric tile adjacency lists, sorted and without self-loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileGraph {
    pub neighbors: Vec<Vec<u32>>,
}

impl TileGraph {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn adjacent(&self, a: u32, b: u32) -> bool {
        self.neighbors[a as usize].binary_search(&b).is_ok()
    }

    /// Breadth-first distances from a set of source tiles (`u32::MAX` when
    /// unreachable).
    pub fn bfs(&self, sources: &[u32]) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.neighbors.len()];
        let mut queue = std::collections::VecDeque::new();
        for &s in sources {
            if dist[s as usize] != 0 {
                dist[s as usize] = 0;
                queue.push_back(s);
            }
        }
        while let Some(t) = queue.pop_front() {
            let d = dist[t as usize] + 1;
            for &u in &self.neighbors[t as usize] {
                if dist[u as usize] == u32::MAX {
                    dist[u as usize] = d;
                    queue.push_back(u);
                }
            }
        }
        dist
    }
}

pub fn tile_adjacency(c: &CellComplex, mode: AdjacencyMode) -> TileGraph {
    let mut neighbors = vec![Vec::new(); c.tiles.len()];
    let groups = match mode {
        AdjacencyMode::Fat => c
            .edge_incidence()
            .into_iter()
            .map(|sides| sides.into_iter().map(|(t, _)| t).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        AdjacencyMode::Skinny => c.vertex_tiles(),
    };
    for group in groups {
        for (i, &a) in group.iter().enumerate() {
            for &b in &group[i + 1..] {
                if a != b {
                    neighbors[a as usize].push(b);
                    neighbors[b as usize].push(a);
                }
            }
        }
    }
    for list in &mut neighbors {
        list.sort_unstable();
        list.dedup();
    }
    TileGraph { neighbors }
}
