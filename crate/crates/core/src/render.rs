//! Barycentric (Tutte) drawings of disk complexes as SVG.
//!
//! Boundary vertices go to a regular polygon; every interior vertex sits at
//! the mean of its edge neighbors. The interior system is symmetric positive
//! definite whenever each interior vertex reaches the boundary, and is solved
//! by conjugate gradients.

use std::fmt::Write as _;

use crate::complex::{boundary_cycle, CellComplex};
use crate::error::{Error, Result};
use crate::rules::SubdivisionRule;

pub type Point = [f64; 2];

pub fn tutte_embedding(c: &CellComplex) -> Result<Vec<Point>> {
    let cycle = boundary_cycle(c)?;
    let nv = c.num_vertices;
    let mut pos = vec![[0.0; 2]; nv];
    let mut fixed = vec![false; nv];
    let k = cycle.len();
    for (i, &side) in cycle.iter().enumerate() {
        // clockwise placement so that tile cycles come out counterclockwise
        // in SVG's downward y axis
        let a = std::f64::consts::TAU * i as f64 / k as f64;
        let v = c.tail(side) as usize;
        pos[v] = [a.cos(), a.sin()];
        fixed[v] = true;
    }
    let mut nbrs = vec![Vec::new(); nv];
    for &[a, b] in &c.edges {
        nbrs[a as usize].push(b as usize);
        nbrs[b as usize].push(a as usize);
    }
    let free: Vec<usize> = (0..nv).filter(|&v| !fixed[v]).collect();
    let mut index = vec![usize::MAX; nv];
    for (i, &v) in free.iter().enumerate() {
        index[v] = i;
    }
    for axis in 0..2 {
        let rhs: Vec<f64> = free
            .iter()
            .map(|&v| {
                nbrs[v]
                    .iter()
                    .filter(|&&u| fixed[u])
                    .map(|&u| pos[u][axis])
                    .sum()
            })
            .collect();
        let apply = |x: &[f64]| -> Vec<f64> {
            free.iter()
                .enumerate()
                .map(|(i, &v)| {
                    let off: f64 = nbrs[v]
                        .iter()
                        .filter(|&&u| !fixed[u])
                        .map(|&u| x[index[u]])
                        .sum();
                    nbrs[v].len() as f64 * x[i] - off
                })
                .collect()
        };
        let x = conjugate_gradient(apply, &rhs, 1e-13, 10 * free.len() + 100)?;
        for (i, &v) in free.iter().enumerate() {
            pos[v][axis] = x[i];
        }
    }
    Ok(pos)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn conjugate_gradient(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let mut x = vec![0.0; b.len()];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let stop = tol * tol * dot(b, b).max(1.0);
    for _ in 0..max_iter {
        if rr <= stop {
            return Ok(x);
        }
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap.is_nan() || pap <= 0.0 {
            return Err(Error::SingularEmbedding(
                "interior vertices not anchored to the boundary".into(),
            ));
        }
        let alpha = rr / pap;
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let next = dot(&r, &r);
        for i in 0..p.len() {
            p[i] = r[i] + next / rr * p[i];
        }
        rr = next;
    }
    if rr <= stop * 1e4 {
        return Ok(x);
    }
    Err(Error::SingularEmbedding(format!(
        "conjugate gradients stalled at residual {:.3e}",
        rr.sqrt()
    )))
}

/// Shoelace area, positive for counterclockwise polygons in a y-up frame.
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        / 2.0
}

fn tile_polygon(c: &CellComplex, pos: &[Point], t: usize) -> Vec<Point> {
    c.tile_vertices(t).map(|v| pos[v as usize]).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingCheck {
    pub min_tile_area: f64,
    pub tile_area_sum: f64,
    pub boundary_area: f64,
}

impl EmbeddingCheck {
    /// Every tile has positive area and the tiles exactly fill the boundary
    /// polygon, relative to `tol`.
    pub fn is_ok(&self, tol: f64) -> bool {
        self.min_tile_area > 0.0
            && (self.tile_area_sum - self.boundary_area).abs() <= tol * self.boundary_area.abs()
    }
}

/// Tile areas are oriented by each tile's own cycle, so a consistent
/// orientation shows up as one sign across all tiles.
pub fn check_embedding(c: &CellComplex, pos: &[Point]) -> Result<EmbeddingCheck> {
    let boundary: Vec<Point> = boundary_cycle(c)?
        .iter()
        .map(|&s| pos[c.tail(s) as usize])
        .collect();
    let boundary_area = signed_area(&boundary);
    let sign = boundary_area.signum();
    let areas: Vec<f64> = (0..c.num_tiles())
        .map(|t| sign * signed_area(&tile_polygon(c, pos, t)))
        .collect();
    Ok(EmbeddingCheck {
        min_tile_area: areas.iter().copied().fold(f64::INFINITY, f64::min),
        tile_area_sum: areas.iter().sum(),
        boundary_area: boundary_area.abs(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileStyle {
    pub fill: String,
    pub stroke: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbeddingMethod {
    Tutte,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderSpec {
    /// Width and height of the square canvas in pixels.
    pub size: f64,
    /// Indexed by tile type.
    pub styles: Vec<TileStyle>,
    pub stroke_width: f64,
    pub method: EmbeddingMethod,
    /// Tiles drawn with a heavier outline.
    pub highlight: Vec<u32>,
}

const PALETTE: [&str; 8] = [
    "#e8b04a", "#7fb3d5", "#a9d18e", "#d98cb3", "#c9a0dc", "#f4d35e", "#89c2c0", "#e07a5f",
];

impl RenderSpec {
    pub fn for_rule(rule: &SubdivisionRule) -> Self {
        RenderSpec {
            size: 800.0,
            styles: (0..rule.types.len())
                .map(|i| TileStyle {
                    fill: PALETTE[i % PALETTE.len()].into(),
                    stroke: "#333333".into(),
                })
                .collect(),
            stroke_width: 0.6,
            method: EmbeddingMethod::Tutte,
            highlight: Vec::new(),
        }
    }
}

pub fn render_svg(c: &CellComplex, spec: &RenderSpec) -> Result<String> {
    if let Some(t) = c.tiles.iter().find(|t| t.ty.index() >= spec.styles.len()) {
        return Err(Error::InvalidArgument(format!(
            "no style for tile type #{}",
            t.ty.0
        )));
    }
    let pos = match spec.method {
        EmbeddingMethod::Tutte => tutte_embedding(c)?,
    };
    let half = spec.size / 2.0;
    let scale = half * 0.95;
    let px = |p: Point| (half + scale * p[0], half + scale * p[1]);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="0 0 {s} {s}">"#,
        s = spec.size
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (t, tile) in c.tiles.iter().enumerate() {
        let style = &spec.styles[tile.ty.index()];
        let points: Vec<String> = tile_polygon(c, &pos, t)
            .into_iter()
            .map(|p| {
                let (x, y) = px(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let width = if spec.highlight.contains(&(t as u32)) {
            spec.stroke_width * 4.0
        } else {
            spec.stroke_width
        };
        let _ = writeln!(
            out,
            r#"<polygon class="type-{}" points="{}" fill="{}" stroke="{}" stroke-width="{}" stroke-linejoin="round"/>"#,
            tile.ty.0,
            points.join(" "),
            style.fill,
            style.stroke,
            width
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
