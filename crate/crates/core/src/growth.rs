//! Sphere and ball counts, their series, and growth-degree diagnostics.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::complex::AdjacencyMode;
use crate::error::{Error, Result};
use crate::expansion::{ExpansionTower, Seed, SeedRegion};
use crate::rules::SubdivisionRule;
use crate::subdivision::Limits;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthTable {
    pub mode: AdjacencyMode,
    /// `s[n]` tiles of norm exactly `n`.
    pub s: Vec<BigUint>,
    /// `b[n]` tiles of norm at most `n`.
    pub b: Vec<BigUint>,
    /// Tower stage the counts were read from.
    pub stage: usize,
}

impl GrowthTable {
    pub fn from_spheres(mode: AdjacencyMode, s: Vec<BigUint>, stage: usize) -> Self {
        let mut acc = BigUint::zero();
        let b = s
            .iter()
            .map(|x| {
                acc += x;
                acc.clone()
            })
            .collect();
        GrowthTable { mode, s, b, stage }
    }

    /// Largest radius in the table.
    pub fn radius(&self) -> usize {
        self.s.len() - 1
    }

    pub fn sphere_series(&self) -> SeriesPoly {
        SeriesPoly::new(self.s.iter().map(|x| BigInt::from(x.clone())).collect())
    }

    pub fn ball_series(&self) -> SeriesPoly {
        SeriesPoly::new(self.b.iter().map(|x| BigInt::from(x.clone())).collect())
    }
}

/// Exact counts for radii `0..=n` about a single seed tile.
pub fn growth_table(
    rule: &SubdivisionRule,
    seed: Seed,
    n: u32,
    mode: AdjacencyMode,
    limits: Limits,
) -> Result<GrowthTable> {
    let mut tower = ExpansionTower::new(rule, seed, limits)?;
    growth_table_in(
        &mut tower,
        &SeedRegion {
            stage: 0,
            tiles: vec![0],
        },
        n,
        mode,
    )
}

/// Counts about an arbitrary seed region of an existing tower.
pub fn growth_table_in(
    tower: &mut ExpansionTower,
    region: &SeedRegion,
    n: u32,
    mode: AdjacencyMode,
) -> Result<GrowthTable> {
    if region.tiles.is_empty() {
        return Err(Error::InvalidArgument("seed set is empty".into()));
    }
    let ball = tower.ball_from(region, n, mode)?;
    let s = ball
        .sphere_counts()
        .into_iter()
        .map(BigUint::from)
        .collect();
    Ok(GrowthTable::from_spheres(mode, s, ball.stage))
}

/// Formal power series truncated at its length, with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SeriesPoly {
    pub coeffs: Vec<BigInt>,
}

impl SeriesPoly {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        SeriesPoly { coeffs }
    }

    pub fn from_u64s(c: &[u64]) -> Self {
        SeriesPoly::new(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    /// Truncation degree; `None` for the empty series.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, n: usize) -> BigInt {
        self.coeffs.get(n).cloned().unwrap_or_default()
    }

    /// Coefficients of `g(z) / (1 - z)`.
    pub fn partial_sums(&self) -> SeriesPoly {
        let mut acc = BigInt::zero();
        SeriesPoly::new(
            self.coeffs
                .iter()
                .map(|c| {
                    acc += c;
                    acc.clone()
                })
                .collect(),
        )
    }
}

impl fmt::Display for SeriesPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for SeriesPoly {
    type Err = Error;

    /// Whitespace- or comma-separated integers, lowest degree first.
    fn from_str(s: &str) -> Result<Self> {
        s.split(|c: char| c.is_whitespace() || c == ',')
            .filter(|w| !w.is_empty())
            .enumerate()
            .map(|(i, w)| {
                w.parse::<BigInt>()
                    .map_err(|e| Error::InvalidArgument(format!("coefficient {i} `{w}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(SeriesPoly::new)
    }
}

fn check_pq(p: u32, q: u32) -> Result<()> {
    if p < 2 || q < 2 {
        return Err(Error::InvalidArgument(format!(
            "p and q must be >= 2, got ({p}, {q})"
        )));
    }
    Ok(())
}

/// `k` with `(p^k - 1)/(p - 1) <= n < (p^{k+1} - 1)/(p - 1)` and the offset
/// `n - (p^k - 1)/(p - 1)`.
fn block_of(p: u64, n: u64) -> (u32, u64) {
    let (mut k, mut start, mut len) = (0u32, 0u64, 1u64);
    while n >= start + len {
        start += len;
        len *= p;
        k += 1;
    }
    (k, n - start)
}

/// Ball count of the `R_{p,q}` expansion complex in closed form.
pub fn closed_form_bn(p: u32, q: u32, n: u64) -> Result<BigUint> {
    check_pq(p, q)?;
    let (k, m) = block_of(p as u64, n);
    let pq = BigUint::from(p) * q;
    let geometric = (pq.pow(k) - 1u32) / (pq - 1u32);
    Ok(BigUint::one() + geometric * 4u32 + BigUint::from(m) * BigUint::from(q).pow(k) * 4u32)
}

/// `g(z)` through degree `n`: after the constant 1, each `4 q^k` repeats
/// `p^k` times.
pub fn sphere_series_rpq(p: u32, q: u32, n: usize) -> Result<SeriesPoly> {
    check_pq(p, q)?;
    let mut coeffs = vec![BigInt::one()];
    let (mut block, mut run) = (BigInt::from(4), 1u64);
    'fill: loop {
        for _ in 0..run {
            if coeffs.len() > n {
                break 'fill;
            }
            coeffs.push(block.clone());
        }
        block *= q;
        run *= p as u64;
    }
    Ok(SeriesPoly::new(coeffs))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionalEquationCheck {
    pub passed: bool,
    pub first_failure: Option<usize>,
    /// Degrees `0..=checked_through` were compared.
    pub checked_through: usize,
}

/// Compares both sides of
/// `q (g(z^p) - 1)(1 + z + ... + z^{p-1}) = z^{p-2} (g(z) - 1 - 4z)`
/// at every degree fixed by the known coefficients of `g`.
pub fn check_functional_equation(
    p: u32,
    q: u32,
    g: &SeriesPoly,
) -> Result<FunctionalEquationCheck> {
    check_pq(p, q)?;
    let p = p as usize;
    let deg = match g.degree() {
        Some(d) if d >= p => d,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "series must have degree >= {p}"
            )))
        }
    };
    let top = deg + p - 2;
    let mut lhs = vec![BigInt::zero(); top + 1];
    let mut g_zp = vec![BigInt::zero(); top + 1];
    for (j, c) in g
        .coeffs
        .iter()
        .enumerate()
        .take_while(|&(j, _)| j * p <= top)
    {
        g_zp[j * p] = c.clone();
    }
    g_zp[0] -= 1;
    for (d, l) in lhs.iter_mut().enumerate() {
        // multiplying by 1 + ... + z^{p-1} sums a window of length p
        for i in d.saturating_sub(p - 1)..=d {
            *l += &g_zp[i];
        }
        *l *= q;
    }
    let mut h = g.coeffs.clone();
    h[0] -= 1;
    h[1] -= 4;
    let rhs = |d: usize| {
        if d + 2 < p {
            BigInt::zero()
        } else {
            h[d + 2 - p].clone()
        }
    };
    let first_failure = (0..=top).find(|&d| lhs[d] != rhs(d));
    Ok(FunctionalEquationCheck {
        passed: first_failure.is_none(),
        first_failure,
        checked_through: top,
    })
}

/// Natural log of a big integer without overflowing `f64`.
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().unwrap_or(f64::INFINITY).ln()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegreeEstimate {
    /// Least-squares slope of `ln b_n` against `ln n` over the window.
    pub estimate: f64,
    /// `max ln(b_n) / ln(n)` over the window.
    pub sup_ratio: f64,
    pub sup_at: usize,
    pub window: (usize, usize),
    /// `b_n` does not increase across the window.
    pub non_increasing: bool,
}

impl fmt::Display for DegreeEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "degree estimate {:.4} (log-log slope over n in [{}, {}]); sup ln(b_n)/ln(n) = {:.4} at n = {}",
            self.estimate, self.window.0, self.window.1, self.sup_ratio, self.sup_at
        )?;
        if self.non_increasing {
            f.write_str("; b_n is non-increasing over the window")?;
        }
        Ok(())
    }
}

pub fn default_window(n: usize) -> (usize, usize) {
    (n.div_ceil(4).max(2), n)
}

pub fn degree_estimate(
    table: &GrowthTable,
    window: Option<(usize, usize)>,
) -> Result<DegreeEstimate> {
    let n = table.radius();
    if n < 8 {
        return Err(Error::InvalidArgument(format!(
            "table radius {n} is below 8"
        )));
    }
    let (lo, hi) = window.unwrap_or_else(|| default_window(n));
    if lo < 2 || hi > n || hi < lo + 2 {
        return Err(Error::InvalidArgument(format!(
            "window [{lo}, {hi}] too small or outside [2, {n}]"
        )));
    }
    let pts: Vec<(f64, f64)> = (lo..=hi)
        .map(|i| ((i as f64).ln(), ln_big(&table.b[i])))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let (mut sup_ratio, mut sup_at) = (f64::NEG_INFINITY, lo);
    for (i, p) in (lo..=hi).zip(&pts) {
        let r = p.1 / p.0;
        if r > sup_ratio {
            sup_ratio = r;
            sup_at = i;
        }
    }
    Ok(DegreeEstimate {
        estimate: sxy / sxx,
        sup_ratio,
        sup_at,
        window: (lo, hi),
        non_increasing: table.b[lo..=hi].windows(2).all(|w| w[1] <= w[0]),
    })
}

/// Growth degree `1 + ln q / ln p` of the `R_{p,q}` complex.
pub fn rpq_degree(p: u32, q: u32) -> f64 {
    1.0 + (q as f64).ln() / (p as f64).ln()
}

/// `(p, q)` whose complex has growth degree within `eps` of `d`, with
/// `q > p` whenever `d > 2`.
pub fn approximate_degree(d: f64, eps: f64) -> Result<(u32, u32)> {
    if !(d.is_finite() && d >= 2.0) || !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need d >= 2 and eps > 0, got d = {d}, eps = {eps}"
        )));
    }
    for p in 2u32.. {
        let target = (p as f64).powf(d - 1.0);
        if target > u32::MAX as f64 {
            break;
        }
        let mut q = (target.round() as u32).max(2);
        if d > 2.0 && q <= p {
            q = p + 1;
        }
        if (rpq_degree(p, q) - d).abs() < eps {
            return Ok((p, q));
        }
    }
    Err(Error::InvalidArgument(format!(
        "no (p, q) with q < 2^32 approximates {d} within {eps}"
    )))
}
