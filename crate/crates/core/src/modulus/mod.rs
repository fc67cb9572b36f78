//! Weight functions on annuli, their height, area and fat-flow modulus.
//!
//! Height is the least total weight of a chain of edge-adjacent annulus
//! tiles running from a tile that meets the seed tile to a tile that meets
//! the outer boundary, both end tiles counted.

mod solver;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::expansion::{Annulus, ExpansionTower};

pub use solver::{optimize_modulus, SolverReport, SolverStep, DEFAULT_TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Layer `k` of `R_n` weighted `base^(n - k)`.
    LayerGeometric {
        base: u32,
    },
    Solver,
    User,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::LayerGeometric { base } => write!(f, "layer-geometric(base {base})"),
            Provenance::Solver => f.write_str("solver"),
            Provenance::User => f.write_str("user"),
        }
    }
}

/// One exact weight per annulus tile, indexed like `Annulus::tiles`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightAssignment {
    pub weights: Vec<BigRational>,
    pub provenance: Provenance,
}

impl WeightAssignment {
    pub fn new(weights: Vec<BigRational>, provenance: Provenance) -> Result<Self> {
        if weights.iter().any(|w| w < &BigRational::zero()) {
            return Err(Error::InvalidArgument("weights must be nonnegative".into()));
        }
        Ok(WeightAssignment {
            weights,
            provenance,
        })
    }

    pub fn from_integers(weights: &[u64]) -> Self {
        WeightAssignment {
            weights: weights
                .iter()
                .map(|&w| BigRational::from_integer(w.into()))
                .collect(),
            provenance: Provenance::User,
        }
    }

    pub fn scaled(&self, factor: &BigRational) -> Result<Self> {
        WeightAssignment::new(
            self.weights.iter().map(|w| w * factor).collect(),
            self.provenance,
        )
    }
}

pub fn layer_weights(a: &Annulus, base: u32) -> Result<WeightAssignment> {
    if base < 2 {
        return Err(Error::InvalidArgument(format!(
            "weight base must be >= 2, got {base}"
        )));
    }
    let n = a.n as u32;
    let weights = a
        .layer
        .iter()
        .map(|&k| BigRational::from_integer(BigInt::from(base).pow(n - k)))
        .collect();
    Ok(WeightAssignment {
        weights,
        provenance: Provenance::LayerGeometric { base },
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModulusReport {
    pub n: usize,
    pub height: BigRational,
    pub area: BigRational,
    /// `height^2 / area`.
    pub modulus: BigRational,
    /// A minimal path realizing the height, as local annulus indices.
    pub witness: Vec<u32>,
    pub provenance: Provenance,
}

#[derive(PartialEq)]
struct Entry<T>(T, u32);

impl<T: PartialOrd> Eq for Entry<T> {}

impl<T: PartialOrd> PartialOrd for Entry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: PartialOrd> Ord for Entry<T> {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .partial_cmp(&self.0)
            .unwrap_or(Ordering::Equal)
            .then(other.1.cmp(&self.1))
    }
}

/// Node-weighted Dijkstra from every inner tile to the nearest outer tile.
/// Returns the least path weight and one path achieving it.
pub(crate) fn shortest_crossing<T>(a: &Annulus, w: &[T]) -> Option<(T, Vec<u32>)>
where
    T: Clone + PartialOrd,
    for<'x> &'x T: Add<&'x T, Output = T>,
{
    let len = a.len();
    let mut dist: Vec<Option<T>> = vec![None; len];
    let mut prev = vec![u32::MAX; len];
    let mut done = vec![false; len];
    let mut heap = BinaryHeap::new();
    for t in 0..len {
        if a.inner[t] {
            dist[t] = Some(w[t].clone());
            heap.push(Entry(w[t].clone(), t as u32));
        }
    }
    while let Some(Entry(d, t)) = heap.pop() {
        let t = t as usize;
        if std::mem::replace(&mut done[t], true) {
            continue;
        }
        if a.outer[t] {
            let mut path = vec![t as u32];
            while prev[*path.last().unwrap() as usize] != u32::MAX {
                path.push(prev[*path.last().unwrap() as usize]);
            }
            path.reverse();
            return Some((d, path));
        }
        for &u in &a.graph.neighbors[t] {
            let u = u as usize;
            if done[u] {
                continue;
            }
            let nd = &d + &w[u];
            if dist[u].as_ref().is_none_or(|old| nd < *old) {
                dist[u] = Some(nd.clone());
                prev[u] = t as u32;
                heap.push(Entry(nd, u as u32));
            }
        }
    }
    None
}

fn check_shape(a: &Annulus, w: &WeightAssignment) -> Result<()> {
    if w.weights.len() != a.len() {
        return Err(Error::InvalidArgument(format!(
            "{} weights for an annulus of {} tiles",
            w.weights.len(),
            a.len()
        )));
    }
    Ok(())
}

/// Least weight of an inner-to-outer fat path, with a witness path.
pub fn height(a: &Annulus, w: &WeightAssignment) -> Result<(BigRational, Vec<u32>)> {
    check_shape(a, w)?;
    shortest_crossing(a, &w.weights).ok_or(Error::Disconnected)
}

pub fn area(a: &Annulus, w: &WeightAssignment) -> Result<BigRational> {
    check_shape(a, w)?;
    Ok(w.weights.iter().map(|x| x * x).sum())
}

pub fn modulus(a: &Annulus, w: &WeightAssignment) -> Result<ModulusReport> {
    let area = area(a, w)?;
    if area.is_zero() {
        return Err(Error::ZeroArea);
    }
    let (height, witness) = height(a, w)?;
    Ok(ModulusReport {
        n: a.n,
        modulus: &height * &height / &area,
        height,
        area,
        witness,
        provenance: w.provenance,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Bounded,
    UnboundedTrend,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Bounded => "bounded (hyperbolic indicator)",
            Verdict::UnboundedTrend => "unbounded trend (no hyperbolicity indication)",
        })
    }
}

/// Difference ratio at or below which the sequence is read as converging.
pub const BOUNDED_RATIO: f64 = 0.9;

#[derive(Clone, Debug, PartialEq)]
pub struct HyperbolicityReport {
    pub base: u32,
    /// `M(R_n, w)` for `n = 1..=N` under layer weights.
    pub sequence: Vec<BigRational>,
    /// Aitken extrapolation of the last three terms; infinite when the
    /// trend is linear or growing.
    pub limit: f64,
    /// Ratio of the last two successive differences.
    pub ratio: f64,
    pub verdict: Verdict,
}

impl fmt::Display for HyperbolicityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.sequence.iter().enumerate() {
            writeln!(
                f,
                "M(R_{}) = {} ~ {:.6}",
                i + 1,
                m,
                m.to_f64().unwrap_or(f64::NAN)
            )?;
        }
        writeln!(
            f,
            "difference ratio {:.6}, extrapolated limit {:.6}",
            self.ratio, self.limit
        )?;
        write!(f, "verdict: {} [indicator only, not a proof]", self.verdict)
    }
}

/// Extrapolated limit and difference ratio of the last three terms.
pub fn aitken(x: &[f64]) -> (f64, f64) {
    let [x0, x1, x2] = x[x.len() - 3..] else {
        unreachable!()
    };
    let (d1, d2) = (x1 - x0, x2 - x1);
    let scale = x2.abs().max(1.0);
    if d1.abs() <= 1e-15 * scale {
        return (
            x2,
            if d2.abs() <= 1e-15 * scale {
                0.0
            } else {
                f64::INFINITY
            },
        );
    }
    let ratio = d2 / d1;
    if ratio >= 1.0 - 1e-12 {
        return (f64::INFINITY, ratio);
    }
    (x2 - d2 * d2 / (d2 - d1), ratio)
}

pub fn hyperbolicity_indicator(
    tower: &mut ExpansionTower,
    n: usize,
    base: u32,
) -> Result<HyperbolicityReport> {
    if n < 3 {
        return Err(Error::InvalidArgument(
            "at least 3 annuli are needed to fit a limit".into(),
        ));
    }
    tower.ensure_stages(n + 1)?;
    let sequence = (1..=n)
        .map(|k| {
            let a = tower.annulus(k)?;
            Ok(modulus(&a, &layer_weights(&a, base)?)?.modulus)
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = sequence
        .iter()
        .map(|m| m.to_f64().unwrap_or(f64::INFINITY))
        .collect();
    let (limit, ratio) = aitken(&xs);
    let verdict = if ratio.abs() <= BOUNDED_RATIO && limit.is_finite() {
        Verdict::Bounded
    } else {
        Verdict::UnboundedTrend
    };
    Ok(HyperbolicityReport {
        base,
        sequence,
        limit,
        ratio,
        verdict,
    })
}
