//! Finite subdivision rules stored as one subdivision template per tile type.
//!
//! A template is a disk complex on its own vertex set. Its boundary is given
//! as a vertex cycle running in the same rotational sense as the subtile
//! cycles, and `corners` marks where the parent polygon's corners sit on that
//! cycle: parent edge `i` is covered by the boundary arc from `corners[i]` to
//! `corners[i + 1]`. Each subtile names its tile type and which entry of its
//! vertex cycle is the type's first corner; that typed corner is the
//! combinatorial structure map from the subtile onto its tile type.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::complex::{validate_complex, CellComplex, Side, TypeId, Violation};
use crate::error::{Error, Result};
use crate::subdivision::{iterate, Limits};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileType {
    pub name: String,
    pub edge_count: usize,
    /// Number of sub-edges each edge receives in one subdivision.
    pub subdivision: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subtile {
    pub ty: TypeId,
    /// Position in `cycle` of the subtile's first corner.
    pub corner: usize,
    pub cycle: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubdivisionTemplate {
    pub num_vertices: usize,
    pub boundary: Vec<u32>,
    pub corners: Vec<usize>,
    pub subtiles: Vec<Subtile>,
}

/// Parameters of a generated rule, kept so consumers can attach
/// family-specific closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleFamily {
    Rpq { p: u32, q: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubdivisionRule {
    pub name: String,
    pub types: Vec<TileType>,
    /// `templates[i]` subdivides `types[i]`.
    pub templates: Vec<SubdivisionTemplate>,
    pub family: Option<RuleFamily>,
}

impl SubdivisionRule {
    pub fn type_id(&self, name: &str) -> Result<TypeId> {
        self.types
            .iter()
            .position(|t| t.name == name)
            .map(|i| TypeId(i as u32))
            .ok_or_else(|| Error::UnknownTileType(name.to_string()))
    }

    pub fn type_name(&self, ty: TypeId) -> &str {
        &self.types[ty.index()].name
    }

    /// A single tile of the given type as a complex.
    pub fn tile(&self, ty: TypeId) -> CellComplex {
        CellComplex::polygon(ty, self.types[ty.index()].edge_count)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleViolation {
    NoTypes,
    TemplateCount {
        types: usize,
        templates: usize,
    },
    TooFewEdges {
        ty: String,
        edges: usize,
    },
    SubdivisionLength {
        ty: String,
        expected: usize,
        got: usize,
    },
    ZeroSubdivision {
        ty: String,
        edge: usize,
    },
    UnknownType {
        ty: String,
        subtile: usize,
        index: u32,
    },
    SubtileArity {
        ty: String,
        subtile: usize,
        expected: usize,
        got: usize,
    },
    BadCorner {
        ty: String,
        subtile: usize,
        corner: usize,
    },
    VertexOutOfRange {
        ty: String,
        vertex: u32,
    },
    BoundaryMismatch {
        ty: String,
        expected: usize,
        got: usize,
    },
    CornerMismatch {
        ty: String,
        detail: String,
    },
    Template {
        ty: String,
        violation: Violation,
    },
    BoundaryCycle {
        ty: String,
        detail: String,
    },
    InconsistentEdgeCounts {
        first: (String, usize),
        second: (String, usize),
        counts: (usize, usize),
    },
}

impl fmt::Display for RuleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use RuleViolation::*;
        match self {
            NoTypes => write!(f, "rule has no tile types"),
            TemplateCount { types, templates } => {
                write!(f, "{types} tile types but {templates} templates")
            }
            TooFewEdges { ty, edges } => {
                write!(f, "tile type {ty} has {edges} edges (at least 3 required)")
            }
            SubdivisionLength { ty, expected, got } => {
                write!(f, "tile type {ty}: subdivision vector has {got} entries, expected {expected}")
            }
            ZeroSubdivision { ty, edge } => {
                write!(f, "tile type {ty}: edge {edge} subdivided into 0 sub-edges")
            }
            UnknownType { ty, subtile, index } => {
                write!(f, "template {ty}: subtile {subtile} has unknown type index {index}")
            }
            SubtileArity { ty, subtile, expected, got } => write!(
                f,
                "template {ty}: subtile {subtile} has {got} corners, its type has {expected}"
            ),
            BadCorner { ty, subtile, corner } => {
                write!(f, "template {ty}: subtile {subtile} starting corner {corner} out of range")
            }
            VertexOutOfRange { ty, vertex } => {
                write!(f, "template {ty}: vertex {vertex} out of range")
            }
            BoundaryMismatch { ty, expected, got } => write!(
                f,
                "boundary mismatch: template {ty} has {got} boundary sub-edges, subdivision vector requires {expected}"
            ),
            CornerMismatch { ty, detail } => write!(f, "template {ty}: corner mismatch: {detail}"),
            Template { ty, violation } => write!(f, "template {ty}: {violation}"),
            BoundaryCycle { ty, detail } => write!(f, "template {ty}: boundary cycle: {detail}"),
            InconsistentEdgeCounts { first, second, counts } => write!(
                f,
                "edge {} of {} meets edge {} of {} but they split into {} and {} sub-edges",
                first.1, first.0, second.1, second.0, counts.0, counts.1
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuleReport {
    pub violations: Vec<RuleViolation>,
}

impl RuleReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for RuleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("ok");
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

/// A template resolved against its complex, ready for instantiation.
#[derive(Clone, Debug)]
pub(crate) struct CompiledTemplate {
    pub complex: CellComplex,
    /// Template side for each boundary position, oriented along the boundary.
    pub boundary_sides: Vec<Side>,
    /// Boundary position of each template vertex, if on the boundary.
    pub boundary_pos: Vec<Option<usize>>,
    /// Which subtile side covers each boundary position.
    pub boundary_owner: Vec<(u32, u32)>,
    /// Prefix offsets of parent edges along the boundary (len = edge_count + 1).
    pub offsets: Vec<usize>,
    pub edge_on_boundary: Vec<bool>,
}

#[derive(Clone, Debug)]
pub(crate) struct CompiledRule {
    pub templates: Vec<CompiledTemplate>,
}

impl CompiledRule {
    pub fn new(rule: &SubdivisionRule) -> Result<Self> {
        let report = validate_rule(rule);
        if !report.is_ok() {
            return Err(Error::InvalidRule(report));
        }
        let mut templates = Vec::with_capacity(rule.types.len());
        for (i, tpl) in rule.templates.iter().enumerate() {
            templates.push(compile_template(rule, i, tpl).map_err(|v| {
                Error::InvalidRule(RuleReport {
                    violations: vec![v],
                })
            })?);
        }
        Ok(CompiledRule { templates })
    }
}

fn template_complex(tpl: &SubdivisionTemplate) -> std::result::Result<CellComplex, String> {
    let cycles: Vec<(TypeId, Vec<u32>)> = tpl
        .subtiles
        .iter()
        .map(|s| {
            let mut cycle = s.cycle.clone();
            if !cycle.is_empty() {
                let k = s.corner % cycle.len();
                cycle.rotate_left(k);
            }
            (s.ty, cycle)
        })
        .collect();
    CellComplex::from_vertex_cycles(tpl.num_vertices, &cycles).map_err(|e| e.to_string())
}

fn compile_template(
    rule: &SubdivisionRule,
    index: usize,
    tpl: &SubdivisionTemplate,
) -> std::result::Result<CompiledTemplate, RuleViolation> {
    let ty = rule.types[index].name.clone();
    let complex = template_complex(tpl).map_err(|detail| RuleViolation::BoundaryCycle {
        ty: ty.clone(),
        detail,
    })?;
    let inc = complex.edge_incidence();
    let mut pair_edge = HashMap::new();
    for (e, &[a, b]) in complex.edges.iter().enumerate() {
        pair_edge.insert((a.min(b), a.max(b)), e as u32);
    }
    let l = tpl.boundary.len();
    let mut boundary_sides = Vec::with_capacity(l);
    let mut boundary_owner = Vec::with_capacity(l);
    let mut edge_on_boundary = vec![false; complex.num_edges()];
    for k in 0..l {
        let (a, b) = (tpl.boundary[k], tpl.boundary[(k + 1) % l]);
        let e =
            *pair_edge
                .get(&(a.min(b), a.max(b)))
                .ok_or_else(|| RuleViolation::BoundaryCycle {
                    ty: ty.clone(),
                    detail: format!("no edge between boundary vertices {a} and {b}"),
                })?;
        if inc[e as usize].len() != 1 {
            return Err(RuleViolation::BoundaryCycle {
                ty: ty.clone(),
                detail: format!("edge {a}-{b} is interior to the template"),
            });
        }
        let (t, i) = inc[e as usize][0];
        let side = complex.tiles[t as usize].sides[i as usize];
        if complex.tail(side) != a {
            return Err(RuleViolation::BoundaryCycle {
                ty: ty.clone(),
                detail: format!("boundary runs against the subtile orientation at {a}-{b}"),
            });
        }
        if edge_on_boundary[e as usize] {
            return Err(RuleViolation::BoundaryCycle {
                ty: ty.clone(),
                detail: format!("edge {a}-{b} repeated on the boundary"),
            });
        }
        edge_on_boundary[e as usize] = true;
        boundary_sides.push(side);
        boundary_owner.push((t, i));
    }
    let actual = inc.iter().filter(|s| s.len() == 1).count();
    if actual != l {
        return Err(RuleViolation::BoundaryCycle {
            ty,
            detail: format!("template has {actual} boundary edges, cycle lists {l}"),
        });
    }
    let mut boundary_pos = vec![None; tpl.num_vertices];
    for (k, &v) in tpl.boundary.iter().enumerate() {
        boundary_pos[v as usize] = Some(k);
    }
    let mut offsets = tpl.corners.clone();
    offsets.push(l);
    Ok(CompiledTemplate {
        complex,
        boundary_sides,
        boundary_pos,
        boundary_owner,
        offsets,
        edge_on_boundary,
    })
}

/// Checks tile types, template shapes, boundary correspondences and the
/// mutual consistency of edge subdivision counts.
pub fn validate_rule(rule: &SubdivisionRule) -> RuleReport {
    let mut v = Vec::new();
    if rule.types.is_empty() {
        v.push(RuleViolation::NoTypes);
    }
    if rule.templates.len() != rule.types.len() {
        v.push(RuleViolation::TemplateCount {
            types: rule.types.len(),
            templates: rule.templates.len(),
        });
        return RuleReport { violations: v };
    }
    for t in &rule.types {
        if t.edge_count < 3 {
            v.push(RuleViolation::TooFewEdges {
                ty: t.name.clone(),
                edges: t.edge_count,
            });
        }
        if t.subdivision.len() != t.edge_count {
            v.push(RuleViolation::SubdivisionLength {
                ty: t.name.clone(),
                expected: t.edge_count,
                got: t.subdivision.len(),
            });
        }
        for (i, &c) in t.subdivision.iter().enumerate() {
            if c == 0 {
                v.push(RuleViolation::ZeroSubdivision {
                    ty: t.name.clone(),
                    edge: i,
                });
            }
        }
    }
    if !v.is_empty() {
        return RuleReport { violations: v };
    }

    let mut compiled = Vec::new();
    for (idx, (t, tpl)) in rule.types.iter().zip(&rule.templates).enumerate() {
        let before = v.len();
        let ty = t.name.clone();
        for (s, sub) in tpl.subtiles.iter().enumerate() {
            match rule.types.get(sub.ty.index()) {
                None => v.push(RuleViolation::UnknownType {
                    ty: ty.clone(),
                    subtile: s,
                    index: sub.ty.0,
                }),
                Some(st) if st.edge_count != sub.cycle.len() => {
                    v.push(RuleViolation::SubtileArity {
                        ty: ty.clone(),
                        subtile: s,
                        expected: st.edge_count,
                        got: sub.cycle.len(),
                    })
                }
                _ => {}
            }
            if sub.corner >= sub.cycle.len().max(1) {
                v.push(RuleViolation::BadCorner {
                    ty: ty.clone(),
                    subtile: s,
                    corner: sub.corner,
                });
            }
            for &x in &sub.cycle {
                if x as usize >= tpl.num_vertices {
                    v.push(RuleViolation::VertexOutOfRange {
                        ty: ty.clone(),
                        vertex: x,
                    });
                }
            }
        }
        for &x in &tpl.boundary {
            if x as usize >= tpl.num_vertices {
                v.push(RuleViolation::VertexOutOfRange {
                    ty: ty.clone(),
                    vertex: x,
                });
            }
        }
        let expected: usize = t.subdivision.iter().sum();
        if tpl.boundary.len() != expected {
            v.push(RuleViolation::BoundaryMismatch {
                ty: ty.clone(),
                expected,
                got: tpl.boundary.len(),
            });
        } else {
            let mut want = Vec::with_capacity(t.edge_count);
            let mut acc = 0;
            for &c in &t.subdivision {
                want.push(acc);
                acc += c;
            }
            if tpl.corners != want {
                v.push(RuleViolation::CornerMismatch {
                    ty: ty.clone(),
                    detail: format!(
                        "corners {:?}, subdivision vector implies {:?}",
                        tpl.corners, want
                    ),
                });
            }
        }
        if v.len() > before {
            continue;
        }
        match template_complex(tpl) {
            Err(detail) => v.push(RuleViolation::BoundaryCycle {
                ty: ty.clone(),
                detail,
            }),
            Ok(c) => {
                let report = validate_complex(&c);
                for violation in report.violations {
                    v.push(RuleViolation::Template {
                        ty: ty.clone(),
                        violation,
                    });
                }
            }
        }
        if v.len() > before {
            continue;
        }
        match compile_template(rule, idx, tpl) {
            Ok(ct) => compiled.push((idx, ct)),
            Err(e) => v.push(e),
        }
    }
    if v.is_empty() {
        let by_type: Vec<&CompiledTemplate> = compiled.iter().map(|(_, c)| c).collect();
        v.extend(edge_count_consistency(rule, &by_type));
    }
    RuleReport { violations: v }
}

/// Closes the set of (type, edge) pairs that can meet across an edge,
/// starting from the interior edges of every template, and checks each pair
/// asks for the same number of sub-edges.
fn edge_count_consistency(
    rule: &SubdivisionRule,
    tpls: &[&CompiledTemplate],
) -> Vec<RuleViolation> {
    type Key = (u32, u32);
    let mut seen: BTreeSet<(Key, Key)> = BTreeSet::new();
    let mut stack = Vec::new();
    let push = |a: Key, b: Key, seen: &mut BTreeSet<(Key, Key)>, stack: &mut Vec<(Key, Key)>| {
        let pair = if a <= b { (a, b) } else { (b, a) };
        if seen.insert(pair) {
            stack.push(pair);
        }
    };
    for tpl in tpls {
        for (e, sides) in tpl.complex.edge_incidence().iter().enumerate() {
            if tpl.edge_on_boundary[e] || sides.len() != 2 {
                continue;
            }
            let a = (tpl.complex.tiles[sides[0].0 as usize].ty.0, sides[0].1);
            let b = (tpl.complex.tiles[sides[1].0 as usize].ty.0, sides[1].1);
            push(a, b, &mut seen, &mut stack);
        }
    }
    let mut out = Vec::new();
    while let Some(((ta, ia), (tb, ib))) = stack.pop() {
        let ca = rule.types[ta as usize].subdivision[ia as usize];
        let cb = rule.types[tb as usize].subdivision[ib as usize];
        if ca != cb {
            out.push(RuleViolation::InconsistentEdgeCounts {
                first: (rule.types[ta as usize].name.clone(), ia as usize),
                second: (rule.types[tb as usize].name.clone(), ib as usize),
                counts: (ca, cb),
            });
            continue;
        }
        let (ta_t, tb_t) = (tpls[ta as usize], tpls[tb as usize]);
        for r in 0..ca {
            let (sa, ka) = ta_t.boundary_owner[ta_t.offsets[ia as usize] + r];
            let (sb, kb) = tb_t.boundary_owner[tb_t.offsets[ib as usize] + ca - 1 - r];
            let a = (ta_t.complex.tiles[sa as usize].ty.0, ka);
            let b = (tb_t.complex.tiles[sb as usize].ty.0, kb);
            push(a, b, &mut seen, &mut stack);
        }
    }
    out
}

/// Entry `(i, j)` counts subtiles of type `j` in the template of type `i`.
pub fn counting_matrix(rule: &SubdivisionRule) -> Vec<Vec<u64>> {
    let n = rule.types.len();
    let mut m = vec![vec![0u64; n]; n];
    for (i, tpl) in rule.templates.iter().enumerate() {
        for s in &tpl.subtiles {
            if let Some(slot) = m[i].get_mut(s.ty.index()) {
                *slot += 1;
            }
        }
    }
    m
}

/// Frame rules: a quadrilateral `t1` whose template is a central `t1`
/// ringed by four "outer" tiles; outer tiles are quadrilaterals with their
/// outer edge split into `q` edges, subdivided into `rows` rows of `q`
/// columns, the outermost row outer tiles and the rest plain
/// quadrilaterals (`t2`), which subdivide as `rows` x `q` grids.
///
/// With `rows >= 2` this is R_{p,q} (types t1, t2, t3 with t3 the outer
/// tile). With `rows == 1` the grid type never occurs and is left out; the
/// outer tile is then called t2.
fn frame_rule(rows: usize, q: usize) -> (Vec<TileType>, Vec<SubdivisionTemplate>) {
    let p = rows;
    let with_grid = p >= 2;
    let t1 = TypeId(0);
    let grid = TypeId(1);
    let outer = if with_grid { TypeId(2) } else { TypeId(1) };

    let mut types = vec![TileType {
        name: "t1".into(),
        edge_count: 4,
        subdivision: vec![q; 4],
    }];
    if with_grid {
        types.push(TileType {
            name: "t2".into(),
            edge_count: 4,
            subdivision: vec![q, p, q, p],
        });
    }
    let mut outer_sub = vec![q; q];
    outer_sub.extend([p, q, p]);
    types.push(TileType {
        name: if with_grid { "t3" } else { "t2" }.into(),
        edge_count: q + 3,
        subdivision: outer_sub,
    });

    let mut templates = Vec::new();

    // t1: boundary 0..4q, inner square 4q..4q+4.
    {
        let l = 4 * q;
        let inner = |i: usize| (l + i % 4) as u32;
        let mut subtiles = vec![Subtile {
            ty: t1,
            corner: 0,
            cycle: (0..4).map(inner).collect(),
        }];
        for side in 0..4 {
            let mut cycle: Vec<u32> = (0..=q).map(|j| ((side * q + j) % l) as u32).collect();
            cycle.push(inner(side + 1));
            cycle.push(inner(side));
            subtiles.push(Subtile {
                ty: outer,
                corner: 0,
                cycle,
            });
        }
        templates.push(SubdivisionTemplate {
            num_vertices: l + 4,
            boundary: (0..l as u32).collect(),
            corners: (0..4).map(|i| i * q).collect(),
            subtiles,
        });
    }

    // Both grid-like templates share a layout: points (x, r) with r = 0..=p;
    // row 0 carries `bottom_width + 1` points, rows above carry q + 1
    // points spaced `stride` apart.
    let grid_template =
        |bottom_width: usize, stride: usize, bottom_ty: TypeId, bottom_outer: bool| {
            let width = q * stride;
            debug_assert_eq!(width, bottom_width);
            let mut ids: HashMap<(usize, usize), u32> = HashMap::new();
            let mut boundary = Vec::new();
            let mut next = 0u32;
            let mut add = |pt: (usize, usize), ids: &mut HashMap<(usize, usize), u32>| -> u32 {
                *ids.entry(pt).or_insert_with(|| {
                    next += 1;
                    next - 1
                })
            };
            for x in 0..bottom_width {
                boundary.push(add((x, 0), &mut ids));
            }
            for r in 0..p {
                boundary.push(add((width, r), &mut ids));
            }
            for c in 0..q {
                boundary.push(add((width - c * stride, p), &mut ids));
            }
            for r in 0..p {
                boundary.push(add((0, p - r), &mut ids));
            }
            for r in 1..p {
                for c in 1..q {
                    add((c * stride, r), &mut ids);
                }
            }
            let id = |pt: (usize, usize)| ids[&pt];
            let mut subtiles = Vec::new();
            for c in 0..q {
                let x0 = c * stride;
                let mut cycle: Vec<u32> = if bottom_outer {
                    (0..=stride).map(|j| id((x0 + j, 0))).collect()
                } else {
                    vec![id((x0, 0)), id((x0 + stride, 0))]
                };
                cycle.push(id((x0 + stride, 1)));
                cycle.push(id((x0, 1)));
                subtiles.push(Subtile {
                    ty: bottom_ty,
                    corner: 0,
                    cycle,
                });
            }
            for r in 1..p {
                for c in 0..q {
                    let x0 = c * stride;
                    subtiles.push(Subtile {
                        ty: grid,
                        corner: 0,
                        cycle: vec![
                            id((x0, r)),
                            id((x0 + stride, r)),
                            id((x0 + stride, r + 1)),
                            id((x0, r + 1)),
                        ],
                    });
                }
            }
            (ids.len(), boundary, subtiles)
        };

    if with_grid {
        let (n, boundary, subtiles) = grid_template(q, 1, grid, false);
        templates.push(SubdivisionTemplate {
            num_vertices: n,
            boundary,
            corners: vec![0, q, q + p, 2 * q + p],
            subtiles,
        });
    }
    {
        let (n, boundary, subtiles) = grid_template(q * q, q, outer, true);
        let mut corners: Vec<usize> = (0..=q).map(|j| j * q).collect();
        corners.push(q * q + p);
        corners.push(q * q + p + q);
        templates.push(SubdivisionTemplate {
            num_vertices: n,
            boundary,
            corners,
            subtiles,
        });
    }
    (types, templates)
}

/// The two-parameter family R_{p,q}.
pub fn make_rpq(p: u32, q: u32) -> Result<SubdivisionRule> {
    if p < 2 || q < 2 {
        return Err(Error::InvalidArgument(format!(
            "R_(p,q) needs p, q >= 2 (got p = {p}, q = {q})"
        )));
    }
    let (types, templates) = frame_rule(p as usize, q as usize);
    Ok(SubdivisionRule {
        name: format!("rpq-{p}-{q}"),
        types,
        templates,
        family: Some(RuleFamily::Rpq { p, q }),
    })
}

fn pentagonal() -> SubdivisionRule {
    let t = TypeId(0);
    let v = |i: usize| (10 + i % 5) as u32;
    let mut subtiles = vec![Subtile {
        ty: t,
        corner: 0,
        cycle: (0..5).map(v).collect(),
    }];
    for i in 0..5 {
        subtiles.push(Subtile {
            ty: t,
            corner: 0,
            cycle: vec![
                (2 * i) as u32,
                (2 * i + 1) as u32,
                v(i),
                v(i + 4),
                ((2 * i + 9) % 10) as u32,
            ],
        });
    }
    SubdivisionRule {
        name: "pentagonal".into(),
        types: vec![TileType {
            name: "t".into(),
            edge_count: 5,
            subdivision: vec![2; 5],
        }],
        templates: vec![SubdivisionTemplate {
            num_vertices: 15,
            boundary: (0..10).collect(),
            corners: vec![0, 2, 4, 6, 8],
            subtiles,
        }],
        family: None,
    }
}

pub const BUILTIN_NAMES: [&str; 3] = ["pentagonal", "R1", "R2"];

pub fn builtin(name: &str) -> Result<SubdivisionRule> {
    match name {
        "pentagonal" => Ok(pentagonal()),
        "R1" => {
            let (types, templates) = frame_rule(1, 2);
            Ok(SubdivisionRule {
                name: "R1".into(),
                types,
                templates,
                family: None,
            })
        }
        "R2" => make_rpq(2, 3),
        other => Err(Error::InvalidArgument(format!(
            "unknown builtin rule `{other}` (expected one of {})",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeshReport {
    pub depth: usize,
    /// `(type name, edge index)` of edges still a single sub-edge after
    /// `depth` subdivisions.
    pub unsplit_edges: Vec<(String, usize)>,
    pub max_valence: usize,
    pub mesh_approaches_zero: bool,
}

impl fmt::Display for MeshReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "depth {}: max valence {}", self.depth, self.max_valence)?;
        if self.mesh_approaches_zero {
            write!(f, "; every edge subdivided")
        } else {
            write!(f, "; mesh does not approach 0 (heuristic): unsplit edges")?;
            for (t, e) in &self.unsplit_edges {
                write!(f, " {t}:{e}")?;
            }
            Ok(())
        }
    }
}

/// Heuristic check of the mesh and valence hypotheses: does every tile-type
/// edge split into at least two sub-edges within `depth` subdivisions, and
/// what is the largest vertex valence in the first `depth` subdivisions of
/// each tile type.
pub fn mesh_heuristic(rule: &SubdivisionRule, depth: usize, limits: &Limits) -> Result<MeshReport> {
    let compiled = CompiledRule::new(rule)?;
    let n = rule.types.len();
    // counts[t][i] = sub-edges of edge i of type t after d subdivisions
    let mut counts: Vec<Vec<u64>> = rule.types.iter().map(|t| vec![1; t.edge_count]).collect();
    for _ in 0..depth {
        let mut next = counts.clone();
        for t in 0..n {
            let tpl = &compiled.templates[t];
            for (i, slot) in next[t].iter_mut().enumerate() {
                let mut total = 0u64;
                for k in tpl.offsets[i]..tpl.offsets[i + 1] {
                    let (s, side) = tpl.boundary_owner[k];
                    let ty = tpl.complex.tiles[s as usize].ty.index();
                    total = total.saturating_add(counts[ty][side as usize]);
                }
                *slot = total;
            }
        }
        counts = next;
    }
    let mut unsplit = Vec::new();
    for (t, row) in counts.iter().enumerate() {
        for (i, &c) in row.iter().enumerate() {
            if c < 2 {
                unsplit.push((rule.types[t].name.clone(), i));
            }
        }
    }
    let mut max_valence = 0;
    for t in 0..n {
        let chain = iterate(rule, &rule.tile(TypeId(t as u32)), depth, limits)?;
        for level in &chain {
            max_valence = max_valence.max(
                level
                    .complex
                    .vertex_degrees()
                    .into_iter()
                    .max()
                    .unwrap_or(0),
            );
        }
    }
    Ok(MeshReport {
        depth,
        mesh_approaches_zero: unsplit.is_empty(),
        unsplit_edges: unsplit,
        max_valence,
    })
}
