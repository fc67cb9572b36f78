//! Prints one PASS/FAIL line per acceptance criterion and fails if any
//! criterion fails.

use std::time::Instant;

use fsgrowth::complex::{tile_adjacency, validate_complex};
use fsgrowth::expansion::{build_tower, default_seed, ExpansionTower, SeedRegion};
use fsgrowth::growth::{
    approximate_degree, check_functional_equation, closed_form_bn, degree_estimate,
    growth_table_in, ln_big, rpq_degree, sphere_series_rpq, GrowthTable,
};
use fsgrowth::modulus::{
    hyperbolicity_indicator, layer_weights, modulus, optimize_modulus, Verdict, WeightAssignment,
};
use fsgrowth::rules::{builtin, counting_matrix, make_rpq};
use fsgrowth::subdivision::iterate;
use fsgrowth::{AdjacencyMode, Limits, SubdivisionRule, TypeId};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn tower(rule: &SubdivisionRule) -> ExpansionTower {
    let seed = default_seed(rule, 1, &Limits::default()).unwrap().unwrap();
    build_tower(rule, seed, 0, Limits::default()).unwrap()
}

fn table(rule: &SubdivisionRule, n: u32, mode: AdjacencyMode) -> Result<GrowthTable, String> {
    let mut t = tower(rule);
    growth_table_in(
        &mut t,
        &SeedRegion {
            stage: 0,
            tiles: vec![0],
        },
        n,
        mode,
    )
    .map_err(|e| e.to_string())
}

fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

fn q(n: BigUint, d: BigUint) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn grid() -> Vec<(u32, u32)> {
    [2, 3]
        .iter()
        .flat_map(|&p| [2, 3, 4].map(move |q| (p, q)))
        .collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn r1_growth() -> Outcome {
    let t = table(&builtin("R1").unwrap(), 12, AdjacencyMode::Fat)?;
    for n in 0..=12u32 {
        let s = if n == 0 { big(1) } else { big(1) << (n + 1) };
        let b = (big(1) << (n + 2)) - 3u32;
        ensure(t.s[n as usize] == s && t.b[n as usize] == b, || {
            format!(
                "n = {n}: s = {}, b = {} (want {s}, {b})",
                t.s[n as usize], t.b[n as usize]
            )
        })?;
    }
    Ok("s_n = 2^(n+1), b_n = 2^(n+2) - 3 for n <= 12".into())
}

fn r23_spheres() -> Outcome {
    let t = table(&make_rpq(2, 3).unwrap(), 16, AdjacencyMode::Fat)?;
    let mut want = vec![1u64];
    for (k, run) in [(4u64, 1), (12, 2), (36, 4), (108, 8), (324, 1)] {
        want.extend(std::iter::repeat_n(k, run));
    }
    let got: Vec<u64> = t.s.iter().map(|x| x.to_u64().unwrap()).collect();
    ensure(got == want, || format!("s = {got:?}"))?;
    Ok(format!("s_0..s_16 = {got:?}"))
}

fn closed_form_grid() -> Outcome {
    for (p, qq) in grid() {
        let t = table(&make_rpq(p, qq).unwrap(), 12, AdjacencyMode::Fat)?;
        for n in 0..=12 {
            let c = closed_form_bn(p, qq, n as u64).unwrap();
            ensure(t.b[n] == c, || {
                format!("({p},{qq}) n = {n}: BFS {} vs closed form {c}", t.b[n])
            })?;
        }
    }
    Ok("BFS b_n = closed form for (p,q) in {2,3}x{2,3,4}, n <= 12".into())
}

fn norm_coincidence() -> Outcome {
    let mut rules = vec![builtin("R1").unwrap(), builtin("R2").unwrap()];
    rules.extend(grid().into_iter().map(|(p, qq)| make_rpq(p, qq).unwrap()));
    let mut tiles = 0;
    for rule in &rules {
        let mut t = tower(rule);
        let fat = t.ball(8, AdjacencyMode::Fat).map_err(|e| e.to_string())?;
        let skinny = t
            .ball(8, AdjacencyMode::Skinny)
            .map_err(|e| e.to_string())?;
        let m = fat.stage.max(skinny.stage);
        let lift = |b: &fsgrowth::Ball| {
            let mut v: Vec<_> = b
                .norms
                .iter()
                .map(|&(x, d)| (t.include(x, b.stage, m), d))
                .collect();
            v.sort();
            v
        };
        ensure(lift(&fat) == lift(&skinny), || {
            format!("{} differs", rule.name)
        })?;
        tiles += fat.len();
    }
    Ok(format!(
        "{} rules, {tiles} tiles compared through radius 8",
        rules.len()
    ))
}

fn functional_equation() -> Outcome {
    for (p, qq) in grid() {
        let g = sphere_series_rpq(p, qq, 300).unwrap();
        let chk = check_functional_equation(p, qq, &g).unwrap();
        ensure(chk.passed && chk.checked_through >= 300, || {
            format!("({p},{qq}): {chk:?}")
        })?;
        for bad in [5usize, 77, 300] {
            let mut h = g.clone();
            h.coeffs[bad] += 1;
            let f = check_functional_equation(p, qq, &h).unwrap().first_failure;
            ensure(f == Some(bad + p as usize - 2), || {
                format!("({p},{qq}) corrupted c_{bad}: {f:?}")
            })?;
        }
    }
    Ok("grid passes through degree 300; corrupted coefficients are caught at their degree".into())
}

fn modulus_closed_forms() -> Outcome {
    let layer = |rule: &SubdivisionRule, base: u32, n: usize| -> Vec<BigRational> {
        let mut t = tower(rule);
        t.ensure_stages(n + 1).unwrap();
        (1..=n)
            .map(|k| {
                let a = t.annulus(k).unwrap();
                modulus(&a, &layer_weights(&a, base).unwrap())
                    .unwrap()
                    .modulus
            })
            .collect()
    };
    let pow = |b: u64, e: usize| big(b).pow(e as u32);
    let check = |name: &str,
                 got: Vec<BigRational>,
                 want: &dyn Fn(usize) -> BigRational|
     -> Result<(), String> {
        for (i, m) in got.iter().enumerate() {
            let w = want(i + 1);
            ensure(*m == w, || format!("{name} n = {}: {m} vs {w}", i + 1))?;
        }
        Ok(())
    };
    check("R1", layer(&builtin("R1").unwrap(), 2, 8), &|n| {
        q(pow(2, n) - 1u32, pow(2, n + 1))
    })?;
    check("R_(2,3)", layer(&make_rpq(2, 3).unwrap(), 3, 6), &|n| {
        q(pow(3, n) - pow(2, n), pow(3, n - 1) * 4u32)
    })?;
    for p in [2, 3] {
        check(
            &format!("R_({p},{p})"),
            layer(&make_rpq(p, p).unwrap(), p, 5),
            &|n| q(big(n as u64), big(4)),
        )?;
    }
    // (1 - (p/q)^n) / (4 (1 - p/q)) = (q^n - p^n) / (4 q^(n-1) (q - p))
    check("R_(2,5)", layer(&make_rpq(2, 5).unwrap(), 5, 4), &|n| {
        q(pow(5, n) - pow(2, n), pow(5, n - 1) * 12u32)
    })?;
    Ok("exact: R1 n <= 8, R_(2,3) n <= 6, R_(p,p) p in {2,3} n <= 5, R_(2,5) n <= 4".into())
}

fn solver_agreement() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut slowest = 0.0f64;
    for (rule, base) in [(builtin("R1").unwrap(), 2), (make_rpq(2, 3).unwrap(), 3)] {
        let mut t = tower(&rule);
        t.ensure_stages(4).unwrap();
        for n in 1..=3 {
            let a = t.annulus(n).unwrap();
            let exact = modulus(&a, &layer_weights(&a, base).unwrap())
                .unwrap()
                .modulus
                .to_f64()
                .unwrap();
            let start = Instant::now();
            let s = optimize_modulus(&a, 1e-6).map_err(|e| e.to_string())?;
            let secs = start.elapsed().as_secs_f64();
            let err = (s.estimate() - exact).abs();
            ensure(err <= 1e-6 && secs <= 60.0, || {
                format!("{} n = {n}: error {err:.2e}, {secs:.2} s", rule.name)
            })?;
            worst = worst.max(err);
            slowest = slowest.max(secs);
        }
    }
    Ok(format!(
        "max |solver - closed form| = {worst:.2e}, slowest annulus {slowest:.3} s"
    ))
}

fn hyperbolicity() -> Outcome {
    let mut notes = Vec::new();
    for (rule, base, n, limit) in [
        (builtin("R1").unwrap(), 2, 8, 0.5),
        (make_rpq(2, 3).unwrap(), 3, 6, 0.75),
        (make_rpq(2, 5).unwrap(), 5, 5, 5.0 / 12.0),
    ] {
        let r = hyperbolicity_indicator(&mut tower(&rule), n, base).map_err(|e| e.to_string())?;
        let rel = (r.limit - limit).abs() / limit;
        ensure(r.verdict == Verdict::Bounded && rel <= 0.05, || {
            format!(
                "{}: limit {} ({}), verdict {}",
                rule.name, r.limit, limit, r.verdict
            )
        })?;
        notes.push(format!("{} -> {:.4}", rule.name, r.limit));
    }
    for (p, n) in [(2, 8), (3, 5)] {
        let r = hyperbolicity_indicator(&mut tower(&make_rpq(p, p).unwrap()), n, p)
            .map_err(|e| e.to_string())?;
        ensure(r.verdict == Verdict::UnboundedTrend, || {
            format!("R_({p},{p}) verdict {}", r.verdict)
        })?;
        notes.push(format!("R_({p},{p}) unbounded"));
    }
    Ok(notes.join(", "))
}

fn degrees() -> Outcome {
    let mut notes = Vec::new();
    for (p, qq) in [(2, 3), (2, 2), (3, 2)] {
        let t = table(&make_rpq(p, qq).unwrap(), 40, AdjacencyMode::Fat)?;
        let e = degree_estimate(&t, None).map_err(|e| e.to_string())?;
        let d = rpq_degree(p, qq);
        ensure((e.estimate - d).abs() <= 0.15, || {
            format!("({p},{qq}): {} vs {d:.4}", e.estimate)
        })?;
        notes.push(format!("({p},{qq}) {:.3}/{d:.3}", e.estimate));
    }
    for d in [2.1, 2.585, 3.5, 5.0] {
        let (p, qq) = approximate_degree(d, 0.01).map_err(|e| e.to_string())?;
        let got = rpq_degree(p, qq);
        ensure((got - d).abs() < 0.01 && p >= 2 && qq > p, || {
            format!("{d} -> ({p},{qq}) = {got}")
        })?;
        notes.push(format!("{d}->({p},{qq})"));
    }
    Ok(notes.join(", "))
}

fn polynomial_growth() -> Outcome {
    let mut notes = Vec::new();
    for rule in [builtin("pentagonal").unwrap(), make_rpq(2, 3).unwrap()] {
        let tab = table(&rule, 128, AdjacencyMode::Fat)?;
        let nmax = tab.radius();
        let ratio = |i: usize| ln_big(&tab.b[i]) / (i as f64).ln();
        let head = (4..=nmax / 2).map(ratio).fold(f64::MIN, f64::max);
        let tail = (nmax / 2..=nmax).map(ratio).fold(f64::MIN, f64::max);
        ensure(tail <= head, || {
            format!(
                "{}: sup over tail {tail:.3} exceeds head {head:.3}",
                rule.name
            )
        })?;
        notes.push(format!(
            "{} sup ratio {head:.3} on [4,{}], {tail:.3} on [{},{nmax}]",
            rule.name,
            nmax / 2,
            nmax / 2
        ));
    }
    let t = table(&builtin("R1").unwrap(), 16, AdjacencyMode::Fat)?;
    let x: Vec<f64> = (1..=16).map(|n| ln_big(&t.b[n]) / n as f64).collect();
    let diffs: Vec<f64> = x.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let settling = diffs[8..].windows(2).all(|w| w[1] < w[0]);
    let last = x[15];
    ensure(settling && last > 0.5 && diffs[14] < 0.01, || {
        format!("R1 ln(b_n)/n = {x:?}")
    })?;
    notes.push(format!(
        "R1 ln(b_n)/n = {last:.4} at n = 16 (ln 2 = {:.4})",
        std::f64::consts::LN_2
    ));
    Ok(notes.join("; "))
}

fn engine_invariants() -> Outcome {
    let rules: Vec<SubdivisionRule> = ["pentagonal", "R1", "R2"]
        .iter()
        .map(|n| builtin(n).unwrap())
        .collect();
    for rule in &rules {
        let m = counting_matrix(rule);
        for start in 0..rule.types.len() {
            let chain = iterate(
                rule,
                &rule.tile(TypeId(start as u32)),
                4,
                &Limits::default(),
            )
            .unwrap();
            let mut v = vec![0u64; m.len()];
            v[start] = 1;
            for level in &chain {
                ensure(
                    level.complex.num_tiles() as u64 == v.iter().sum::<u64>(),
                    || format!("{} counts", rule.name),
                )?;
                ensure(
                    validate_complex(&level.complex).is_ok()
                        && level.complex.euler_characteristic() == 1,
                    || format!("{} not a disk", rule.name),
                )?;
                v = (0..m.len())
                    .map(|j| (0..m.len()).map(|i| v[i] * m[i][j]).sum())
                    .collect();
            }
        }
        let mut t = tower(rule);
        let region = SeedRegion {
            stage: 0,
            tiles: vec![0],
        };
        for mode in [AdjacencyMode::Fat, AdjacencyMode::Skinny] {
            let b = t.ball(5, mode).unwrap();
            t.ensure_stages(b.stage + 2).unwrap();
            let next = t
                .ball_at_stage(b.stage + 1, &region, 5, mode)
                .ok_or("not certified at next stage")?;
            let mut lifted: Vec<_> = b
                .norms
                .iter()
                .map(|&(x, d)| (t.include(x, b.stage, b.stage + 1), d))
                .collect();
            lifted.sort();
            ensure(lifted == next.norms, || {
                format!("{} ball moved between stages", rule.name)
            })?;
            let g = tile_adjacency(t.stage(b.stage), mode);
            let norm: std::collections::HashMap<u32, u32> = b.norms.iter().copied().collect();
            for (&x, &d) in &norm {
                for y in &g.neighbors[x as usize] {
                    let ok = norm.get(y).map_or(d == 5, |&e| d.abs_diff(e) <= 1);
                    ensure(ok, || format!("{} norm jumps at tile {x}", rule.name))?;
                }
            }
        }
        t.ensure_stages(4).unwrap();
        let a = t.annulus(3).unwrap();
        let w = layer_weights(&a, 3).unwrap();
        let scaled = w.scaled(&BigRational::new(7.into(), 3.into())).unwrap();
        let plain = WeightAssignment::from_integers(&vec![1; a.len()]);
        for (x, y) in [
            (&w, &scaled),
            (
                &plain,
                &plain.scaled(&BigRational::from_integer(5.into())).unwrap(),
            ),
        ] {
            ensure(
                modulus(&a, x).unwrap().modulus == modulus(&a, y).unwrap().modulus,
                || format!("{} modulus not scale invariant", rule.name),
            )?;
        }
    }
    Ok("tile counts, chi = 1, ball stabilization, 1-Lipschitz norms, scale invariance".into())
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("R1 growth exactness", r1_growth),
        ("R_(2,3) sphere series", r23_spheres),
        ("closed-form ball counts", closed_form_grid),
        ("skinny/fat norm coincidence", norm_coincidence),
        ("functional equation", functional_equation),
        ("modulus closed forms", modulus_closed_forms),
        ("solver agreement", solver_agreement),
        ("hyperbolicity indicator limits", hyperbolicity),
        ("degree estimation", degrees),
        ("polynomial vs exponential growth", polynomial_growth),
        ("engine invariants", engine_invariants),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1} s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
