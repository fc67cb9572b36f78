//! The subdivision operator X -> R(X).
//!
//! Every tile is replaced by a copy of its type's template. Copies are glued
//! without coordinates: each old edge is first cut into the number of
//! sub-edges its tiles ask for, and template boundary vertices are mapped onto
//! those cut points through the tile's side orientation. Shared edges are
//! therefore identified exactly once, by construction.

use crate::complex::{CellComplex, Side, Tile};
use crate::error::{Error, Result};
use crate::rules::{CompiledRule, SubdivisionRule};

pub const DEFAULT_MAX_TILES: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_tiles: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_tiles: DEFAULT_MAX_TILES,
        }
    }
}

/// Where an edge of a subdivided complex came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeOrigin {
    /// Edge of a complex that was not produced by subdivision.
    Root,
    /// Sub-edge `sub` of parent edge `edge`, counted along its direction.
    Parent { edge: u32, sub: u32 },
    /// Interior edge `template_edge` of the template placed on parent `tile`.
    Interior { tile: u32, template_edge: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubdividedComplex {
    pub complex: CellComplex,
    /// Parent tile of each tile.
    pub parent: Vec<u32>,
    /// Index of each tile within its parent's template.
    pub subtile: Vec<u32>,
    /// Children of parent tile `t` are `first_child[t]..first_child[t + 1]`.
    pub first_child: Vec<u32>,
    pub edge_origin: Vec<EdgeOrigin>,
}

impl SubdividedComplex {
    /// Wraps a complex as generation zero of a chain.
    pub fn root(complex: CellComplex) -> Self {
        let n = complex.num_tiles() as u32;
        SubdividedComplex {
            parent: (0..n).collect(),
            subtile: vec![0; n as usize],
            first_child: (0..=n).collect(),
            edge_origin: vec![EdgeOrigin::Root; complex.num_edges()],
            complex,
        }
    }

    pub fn child(&self, parent: u32, subtile: u32) -> u32 {
        self.first_child[parent as usize] + subtile
    }

    pub fn children(&self, parent: u32) -> std::ops::Range<u32> {
        self.first_child[parent as usize]..self.first_child[parent as usize + 1]
    }
}

pub fn subdivide(
    rule: &SubdivisionRule,
    c: &CellComplex,
    limits: &Limits,
) -> Result<SubdividedComplex> {
    let compiled = CompiledRule::new(rule)?;
    subdivide_compiled(rule, &compiled, c, limits, 0)
}

pub(crate) fn subdivide_compiled(
    rule: &SubdivisionRule,
    compiled: &CompiledRule,
    c: &CellComplex,
    limits: &Limits,
    generation: usize,
) -> Result<SubdividedComplex> {
    let mut cut = vec![0usize; c.num_edges()];
    let mut predicted = 0usize;
    for tile in &c.tiles {
        let ty = tile.ty.index();
        let tt = rule
            .types
            .get(ty)
            .ok_or_else(|| Error::UnknownTileType(format!("#{}", tile.ty.0)))?;
        if tt.edge_count != tile.sides.len() {
            return Err(Error::InvalidArgument(format!(
                "tile of type {} has {} sides, type has {}",
                tt.name,
                tile.sides.len(),
                tt.edge_count
            )));
        }
        for (i, s) in tile.sides.iter().enumerate() {
            let want = tt.subdivision[i];
            let slot = &mut cut[s.edge as usize];
            if *slot == 0 {
                *slot = want;
            } else if *slot != want {
                return Err(Error::BoundaryMismatch {
                    edge: s.edge as usize,
                    first: *slot,
                    second: want,
                });
            }
        }
        predicted += compiled.templates[ty].complex.num_tiles();
    }
    if predicted > limits.max_tiles {
        return Err(Error::BudgetExceeded {
            needed: predicted,
            limit: limits.max_tiles,
            stage: generation + 1,
        });
    }
    for slot in &mut cut {
        if *slot == 0 {
            *slot = 1;
        }
    }

    // Vertices: old vertices keep their ids, then cut points edge by edge.
    let mut point_base = Vec::with_capacity(c.num_edges());
    let mut next_vertex = c.num_vertices as u32;
    for &k in &cut {
        point_base.push(next_vertex);
        next_vertex += k as u32 - 1;
    }
    let point = |e: usize, r: usize| -> u32 {
        let [a, b] = c.edges[e];
        if r == 0 {
            a
        } else if r == cut[e] {
            b
        } else {
            point_base[e] + r as u32 - 1
        }
    };

    let mut edges = Vec::new();
    let mut edge_origin = Vec::new();
    let mut sub_base = Vec::with_capacity(c.num_edges());
    for e in 0..c.num_edges() {
        sub_base.push(edges.len() as u32);
        for s in 0..cut[e] {
            edges.push([point(e, s), point(e, s + 1)]);
            edge_origin.push(EdgeOrigin::Parent {
                edge: e as u32,
                sub: s as u32,
            });
        }
    }

    let mut tiles = Vec::with_capacity(predicted);
    let mut parent = Vec::with_capacity(predicted);
    let mut subtile = Vec::with_capacity(predicted);
    let mut first_child = Vec::with_capacity(c.num_tiles() + 1);
    for (t, tile) in c.tiles.iter().enumerate() {
        first_child.push(tiles.len() as u32);
        let tpl = &compiled.templates[tile.ty.index()];
        let tc = &tpl.complex;

        let mut vmap = vec![u32::MAX; tc.num_vertices];
        for (v, slot) in vmap.iter_mut().enumerate() {
            *slot = match tpl.boundary_pos[v] {
                Some(k) => {
                    let i = tpl.offsets.partition_point(|&o| o <= k) - 1;
                    let r = k - tpl.offsets[i];
                    let side = tile.sides[i];
                    let e = side.edge as usize;
                    point(e, if side.reversed { cut[e] - r } else { r })
                }
                None => {
                    next_vertex += 1;
                    next_vertex - 1
                }
            };
        }

        // Template edge -> (new edge, direction flipped).
        let mut emap = vec![(u32::MAX, false); tc.num_edges()];
        for (k, bs) in tpl.boundary_sides.iter().enumerate() {
            let i = tpl.offsets.partition_point(|&o| o <= k) - 1;
            let r = k - tpl.offsets[i];
            let side = tile.sides[i];
            let e = side.edge as usize;
            let sub = if side.reversed { cut[e] - 1 - r } else { r };
            emap[bs.edge as usize] = (sub_base[e] + sub as u32, bs.reversed != side.reversed);
        }
        for (te, slot) in emap.iter_mut().enumerate() {
            if tpl.edge_on_boundary[te] {
                continue;
            }
            let [a, b] = tc.edges[te];
            *slot = (edges.len() as u32, false);
            edges.push([vmap[a as usize], vmap[b as usize]]);
            edge_origin.push(EdgeOrigin::Interior {
                tile: t as u32,
                template_edge: te as u32,
            });
        }

        for (j, st) in tc.tiles.iter().enumerate() {
            let sides = st
                .sides
                .iter()
                .map(|s| {
                    let (e, flip) = emap[s.edge as usize];
                    Side {
                        edge: e,
                        reversed: s.reversed != flip,
                    }
                })
                .collect();
            tiles.push(Tile { ty: st.ty, sides });
            parent.push(t as u32);
            subtile.push(j as u32);
        }
    }
    first_child.push(tiles.len() as u32);

    Ok(SubdividedComplex {
        complex: CellComplex {
            num_vertices: next_vertex as usize,
            edges,
            tiles,
        },
        parent,
        subtile,
        first_child,
        edge_origin,
    })
}

/// The chain `c, R(c), ..., R^n(c)`.
pub fn iterate(
    rule: &SubdivisionRule,
    c: &CellComplex,
    n: usize,
    limits: &Limits,
) -> Result<Vec<SubdividedComplex>> {
    let compiled = CompiledRule::new(rule)?;
    let mut chain = vec![SubdividedComplex::root(c.clone())];
    for g in 0..n {
        let next = subdivide_compiled(rule, &compiled, &chain[g].complex, limits, g)?;
        chain.push(next);
    }
    Ok(chain)
}

/// Genealogy path of a tile in the last element of a chain: one subtile
/// index per generation, from generation 1 down.
pub fn genealogy(chain: &[SubdividedComplex], tile: u32) -> Vec<u32> {
    let mut path = Vec::with_capacity(chain.len().saturating_sub(1));
    let mut t = tile;
    for level in chain.iter().skip(1).rev() {
        path.push(level.subtile[t as usize]);
        t = level.parent[t as usize];
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{boundary_cycle, validate_complex, TypeId};
    use crate::rules::{builtin, make_rpq};

    #[test]
    fn rpq_t1_splits_into_five() {
        let r = make_rpq(2, 3).unwrap();
        let s = subdivide(&r, &r.tile(TypeId(0)), &Limits::default()).unwrap();
        let types: Vec<u32> = s.complex.tiles.iter().map(|t| t.ty.0).collect();
        assert_eq!(types, vec![0, 2, 2, 2, 2]);
        let rep = validate_complex(&s.complex);
        assert!(rep.is_ok(), "{rep}");
        assert_eq!(rep.euler, 1);
        assert_eq!(boundary_cycle(&s.complex).unwrap().len(), 12);
    }

    #[test]
    fn r1_t2_splits_into_two() {
        let r = builtin("R1").unwrap();
        let s = subdivide(&r, &r.tile(TypeId(1)), &Limits::default()).unwrap();
        assert_eq!(s.complex.num_tiles(), 2);
        assert!(s.complex.tiles.iter().all(|t| t.ty == TypeId(1)));
        // t1 is not subdivided along its radial sides, but each of its edges
        // is cut in two
        let s1 = subdivide(&r, &r.tile(TypeId(0)), &Limits::default()).unwrap();
        assert_eq!(boundary_cycle(&s1.complex).unwrap().len(), 8);
    }

    #[test]
    fn one_tile_bookkeeping() {
        for name in ["pentagonal", "R1", "R2"] {
            let r = builtin(name).unwrap();
            for (i, t) in r.types.iter().enumerate() {
                let s = subdivide(&r, &r.tile(TypeId(i as u32)), &Limits::default()).unwrap();
                assert_eq!(s.complex.euler_characteristic(), 1);
                let blen = boundary_cycle(&s.complex).unwrap().len();
                assert_eq!(blen, t.subdivision.iter().sum::<usize>());
            }
        }
    }

    #[test]
    fn zero_iterations_and_empty_input() {
        let r = builtin("pentagonal").unwrap();
        let t = r.tile(TypeId(0));
        let chain = iterate(&r, &t, 0, &Limits::default()).unwrap();
        assert_eq!(chain.len(), 1);
        assert_eq!(chain[0].complex, t);

        let empty = CellComplex::default();
        let s = subdivide(&r, &empty, &Limits::default()).unwrap();
        assert_eq!(s.complex, empty);
    }

    #[test]
    fn rpq_two_levels() {
        let r = make_rpq(2, 3).unwrap();
        let chain = iterate(&r, &r.tile(TypeId(0)), 2, &Limits::default()).unwrap();
        assert_eq!(chain[2].complex.num_tiles(), 29);
        let pent = builtin("pentagonal").unwrap();
        let chain = iterate(&pent, &pent.tile(TypeId(0)), 2, &Limits::default()).unwrap();
        assert_eq!(chain[2].complex.num_tiles(), 36);
    }

    #[test]
    fn mismatched_shared_edge_is_an_error() {
        let r = make_rpq(2, 3).unwrap();
        // a t2 (vertical edges split in 2) glued along its right edge to a
        // t1 (all edges split in 3)
        let c = CellComplex::from_vertex_cycles(
            6,
            &[(TypeId(1), vec![0, 1, 4, 3]), (TypeId(0), vec![1, 2, 5, 4])],
        )
        .unwrap();
        assert!(matches!(
            subdivide(&r, &c, &Limits::default()),
            Err(Error::BoundaryMismatch { .. })
        ));
    }

    #[test]
    fn budget_is_enforced() {
        let r = make_rpq(2, 3).unwrap();
        let lim = Limits { max_tiles: 20 };
        let err = iterate(&r, &r.tile(TypeId(0)), 3, &lim).unwrap_err();
        assert!(matches!(
            err,
            Error::BudgetExceeded {
                needed: 29,
                limit: 20,
                stage: 2
            }
        ));
    }

    #[test]
    fn genealogy_paths() {
        let r = make_rpq(2, 2).unwrap();
        let chain = iterate(&r, &r.tile(TypeId(0)), 3, &Limits::default()).unwrap();
        let last = chain.last().unwrap();
        for t in 0..last.complex.num_tiles() as u32 {
            let path = genealogy(&chain, t);
            assert_eq!(path.len(), 3);
            let mut cur = 0u32;
            for (level, &s) in chain.iter().skip(1).zip(&path) {
                cur = level.child(cur, s);
            }
            assert_eq!(cur, t);
        }
    }
}
