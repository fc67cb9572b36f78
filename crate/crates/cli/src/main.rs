//! Command-line front end. Rule arguments are files or `builtin:NAME`.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error. Failures print one
//! JSON object on the last line of stderr.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use fsgrowth::expansion::{default_seed, find_seed, ExpansionTower};
use fsgrowth::growth::{
    approximate_degree, check_functional_equation, degree_estimate, growth_table_in, rpq_degree,
};
use fsgrowth::io::{growth_csv, modulus_csv, parse_rule, serialize_rule, ModulusRow};
use fsgrowth::modulus::{
    hyperbolicity_indicator, layer_weights, modulus, optimize_modulus, DEFAULT_TOLERANCE,
};
use fsgrowth::render::{check_embedding, render_svg, tutte_embedding, RenderSpec};
use fsgrowth::rules::{
    builtin, counting_matrix, make_rpq, mesh_heuristic, validate_rule, RuleFamily,
};
use fsgrowth::subdivision::{iterate, DEFAULT_MAX_TILES};
use fsgrowth::{AdjacencyMode, Error, Limits, Seed, SeedRegion, SubdivisionRule};

#[derive(Parser)]
#[command(
    name = "fsgrowth",
    version,
    about = "Finite subdivision rules: expansion complexes, growth series, moduli"
)]
struct Cli {
    /// Largest complex any step may build.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_TILES)]
    max_tiles: usize,
    /// Write the main result here instead of stdout.
    #[arg(long, short = 'o', global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SeedArgs {
    /// Deepest subdivision level searched for a seed.
    #[arg(long, default_value_t = 1)]
    seed_level: usize,
    /// Use this entry of the `seed` listing instead of the first interior seed.
    #[arg(long)]
    seed: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Norm {
    Skinny,
    Fat,
}

impl From<Norm> for AdjacencyMode {
    fn from(n: Norm) -> Self {
        match n {
            Norm::Skinny => AdjacencyMode::Skinny,
            Norm::Fat => AdjacencyMode::Fat,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Summary,
    Csv,
    Svg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Check a rule document and print its counting matrix.
    Validate { rule: String },
    /// Subdivide one tile of a given type repeatedly.
    Subdivide {
        rule: String,
        #[arg(long)]
        tile: String,
        #[arg(long, default_value_t = 1)]
        levels: usize,
        #[arg(long = "out", value_enum, default_value_t = Format::Summary)]
        format: Format,
    },
    /// Ball counts about the seed tile up to a radius.
    Grow {
        rule: String,
        #[arg(long)]
        radius: u32,
        #[arg(long, value_enum, default_value_t = Norm::Fat)]
        norm: Norm,
        #[command(flatten)]
        seed: SeedArgs,
    },
    /// Sphere/ball table, plus the functional-equation check for R_(p,q) rules.
    Series {
        rule: String,
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value_t = Norm::Fat)]
        norm: Norm,
        #[command(flatten)]
        seed: SeedArgs,
    },
    /// Growth-degree estimate from the ball counts.
    Degree {
        rule: String,
        #[arg(long, default_value_t = 40)]
        n: u32,
        /// Regression window; defaults to [ceil(n/4), n].
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        window: Option<Vec<usize>>,
        #[arg(long, value_enum, default_value_t = Norm::Fat)]
        norm: Norm,
        #[command(flatten)]
        seed: SeedArgs,
    },
    /// Layer-weight moduli of the annuli R_1..R_N, optionally cross-checked.
    Modulus {
        rule: String,
        #[arg(long)]
        annuli: usize,
        /// Defaults to q for R_(p,q) rules and 2 otherwise.
        #[arg(long)]
        base: Option<u32>,
        #[arg(long, value_enum, default_value_t = Switch::On)]
        solver: Switch,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        #[command(flatten)]
        seed: SeedArgs,
    },
    /// Boundedness indicator for the modulus sequence.
    Hyperbolicity {
        rule: String,
        #[arg(long)]
        annuli: usize,
        #[arg(long)]
        base: Option<u32>,
        #[command(flatten)]
        seed: SeedArgs,
    },
    /// List seeds up to a subdivision level.
    Seed {
        rule: String,
        #[arg(long, default_value_t = 1)]
        max_level: usize,
    },
    /// Draw a subdivided tile or a tower stage as SVG.
    Render {
        rule: String,
        /// Subdivide a single tile of this type (with --levels).
        #[arg(long, conflicts_with = "stage")]
        tile: Option<String>,
        #[arg(long, default_value_t = 2)]
        levels: usize,
        /// Draw this stage of the seed tower, seed tile outlined.
        #[arg(long)]
        stage: Option<usize>,
        #[arg(long, default_value_t = 800.0)]
        size: f64,
        #[command(flatten)]
        seed: SeedArgs,
    },
    /// Emit the rule document of R_(p,q).
    Rpq {
        #[arg(long, required_unless_present = "degree")]
        p: Option<u32>,
        #[arg(long, required_unless_present = "degree")]
        q: Option<u32>,
        /// Pick (p, q) whose growth degree approximates this value.
        #[arg(long, conflicts_with_all = ["p", "q"])]
        degree: Option<f64>,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        /// Same as --output.
        #[arg(long = "out")]
        out: Option<PathBuf>,
    },
}

fn load_rule(arg: &str) -> anyhow::Result<SubdivisionRule> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        return Ok(builtin(name)?);
    }
    let text = fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?;
    parse_rule(&text).with_context(|| format!("in {arg}"))
}

fn pick_seed(rule: &SubdivisionRule, args: &SeedArgs, limits: &Limits) -> anyhow::Result<Seed> {
    match args.seed {
        Some(i) => {
            let seeds = find_seed(rule, args.seed_level, limits)?;
            let n = seeds.len();
            seeds
                .into_iter()
                .nth(i)
                .ok_or_else(|| anyhow!("seed index {i} out of range ({n} seeds)"))
        }
        None => default_seed(rule, args.seed_level, limits)?.ok_or_else(|| {
            anyhow!(
                "rule `{}` has no seed up to level {}",
                rule.name,
                args.seed_level
            )
        }),
    }
}

fn tower(
    rule: &SubdivisionRule,
    args: &SeedArgs,
    limits: Limits,
) -> anyhow::Result<ExpansionTower> {
    let seed = pick_seed(rule, args, &limits)?;
    let t = ExpansionTower::new(rule, seed, limits)?;
    for w in t.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(t)
}

fn default_base(rule: &SubdivisionRule, base: Option<u32>) -> u32 {
    base.unwrap_or(match rule.family {
        Some(RuleFamily::Rpq { q, .. }) => q,
        None => 2,
    })
}

fn run(cli: Cli) -> anyhow::Result<String> {
    let limits = Limits {
        max_tiles: cli.max_tiles,
    };
    let mut out = String::new();
    match cli.command {
        Command::Validate { rule } => {
            let r = load_rule(&rule)?;
            let report = validate_rule(&r);
            if !report.is_ok() {
                return Err(Error::InvalidRule(report).into());
            }
            writeln!(out, "ok: rule {} with {} tile types", r.name, r.types.len())?;
            for (t, row) in r.types.iter().zip(counting_matrix(&r)) {
                writeln!(out, "  {} ({} edges) -> {:?}", t.name, t.edge_count, row)?;
            }
            let mesh = mesh_heuristic(&r, 4, &limits)?;
            writeln!(out, "{mesh}")?;
        }
        Command::Subdivide {
            rule,
            tile,
            levels,
            format,
        } => {
            let r = load_rule(&rule)?;
            let ty = r.type_id(&tile)?;
            let chain = iterate(&r, &r.tile(ty), levels, &limits)?;
            let last = &chain.last().unwrap().complex;
            match format {
                Format::Summary => {
                    writeln!(out, "level,tiles,edges,vertices,euler")?;
                    for (i, s) in chain.iter().enumerate() {
                        let c = &s.complex;
                        let (t, e, v) = (c.num_tiles(), c.num_edges(), c.num_vertices);
                        writeln!(out, "{i},{t},{e},{v},{}", c.euler_characteristic())?;
                    }
                }
                Format::Csv => {
                    writeln!(out, "tile,type,parent,subtile,vertices")?;
                    let s = chain.last().unwrap();
                    for (t, tile) in last.tiles.iter().enumerate() {
                        let vs: Vec<String> =
                            last.tile_vertices(t).map(|v| v.to_string()).collect();
                        let name = r.type_name(tile.ty);
                        writeln!(
                            out,
                            "{t},{name},{},{},{}",
                            s.parent[t],
                            s.subtile[t],
                            vs.join(" ")
                        )?;
                    }
                }
                Format::Svg => out = render_svg(last, &RenderSpec::for_rule(&r))?,
            }
        }
        Command::Grow {
            rule,
            radius,
            norm,
            seed,
        }
        | Command::Series {
            rule,
            n: radius,
            norm,
            seed,
        } => {
            let r = load_rule(&rule)?;
            let mut t = tower(&r, &seed, limits)?;
            let region = SeedRegion {
                stage: 0,
                tiles: vec![0],
            };
            let table = growth_table_in(&mut t, &region, radius, norm.into())?;
            out = growth_csv(&table);
            if let Some(RuleFamily::Rpq { p, q }) = r.family {
                if table.radius() >= p as usize {
                    let chk = check_functional_equation(p, q, &table.sphere_series())?;
                    let verdict = if chk.passed {
                        "pass".to_string()
                    } else {
                        format!("FAIL at degree {}", chk.first_failure.unwrap())
                    };
                    eprintln!(
                        "functional equation (p = {p}, q = {q}) through degree {}: {verdict}",
                        chk.checked_through
                    );
                }
            }
        }
        Command::Degree {
            rule,
            n,
            window,
            norm,
            seed,
        } => {
            let r = load_rule(&rule)?;
            let mut t = tower(&r, &seed, limits)?;
            let table = growth_table_in(
                &mut t,
                &SeedRegion {
                    stage: 0,
                    tiles: vec![0],
                },
                n,
                norm.into(),
            )?;
            let e = degree_estimate(&table, window.map(|w| (w[0], w[1])))?;
            writeln!(out, "{e}")?;
            if let Some(RuleFamily::Rpq { p, q }) = r.family {
                writeln!(
                    out,
                    "closed-form degree 1 + ln q / ln p = {:.4}",
                    rpq_degree(p, q)
                )?;
            }
        }
        Command::Modulus {
            rule,
            annuli,
            base,
            solver,
            tol,
            seed,
        } => {
            let r = load_rule(&rule)?;
            let base = default_base(&r, base);
            let mut t = tower(&r, &seed, limits)?;
            t.ensure_stages(annuli + 1)?;
            let mut rows = Vec::new();
            for n in 1..=annuli {
                let a = t.annulus(n)?;
                let m = modulus(&a, &layer_weights(&a, base)?)?;
                let solved = match solver {
                    Switch::On => {
                        let s = optimize_modulus(&a, tol)?;
                        Some((s.estimate(), s.gap))
                    }
                    Switch::Off => None,
                };
                rows.push(ModulusRow {
                    n,
                    height: m.height,
                    area: m.area,
                    modulus: m.modulus,
                    solver: solved,
                });
            }
            out = modulus_csv(&rows);
        }
        Command::Hyperbolicity {
            rule,
            annuli,
            base,
            seed,
        } => {
            let r = load_rule(&rule)?;
            let base = default_base(&r, base);
            let mut t = tower(&r, &seed, limits)?;
            writeln!(out, "{}", hyperbolicity_indicator(&mut t, annuli, base)?)?;
        }
        Command::Seed { rule, max_level } => {
            let r = load_rule(&rule)?;
            writeln!(out, "index,type,level,path,interior")?;
            for (i, s) in find_seed(&r, max_level, &limits)?.iter().enumerate() {
                let path: Vec<String> = s.path.iter().map(u32::to_string).collect();
                writeln!(
                    out,
                    "{i},{},{},{},{}",
                    r.type_name(s.ty),
                    s.level,
                    path.join(" "),
                    s.interior
                )?;
            }
        }
        Command::Render {
            rule,
            tile,
            levels,
            stage,
            size,
            seed,
        } => {
            let r = load_rule(&rule)?;
            let mut spec = RenderSpec::for_rule(&r);
            spec.size = size;
            let c = match (tile, stage) {
                (Some(name), _) => {
                    let ty = r.type_id(&name)?;
                    iterate(&r, &r.tile(ty), levels, &limits)?
                        .pop()
                        .unwrap()
                        .complex
                }
                (None, stage) => {
                    let m = stage.unwrap_or(2);
                    let mut t = tower(&r, &seed, limits)?;
                    t.ensure_stages(m + 1)?;
                    spec.highlight = vec![t.seed_tile(m)];
                    t.stage(m).clone()
                }
            };
            let check = check_embedding(&c, &tutte_embedding(&c)?)?;
            if !check.is_ok(1e-6) {
                eprintln!("warning: embedding check failed: {check:?}");
            }
            out = render_svg(&c, &spec)?;
        }
        Command::Rpq {
            p,
            q,
            degree,
            eps,
            out: file,
        } => {
            let (p, q) = match degree {
                Some(d) => {
                    let (p, q) = approximate_degree(d, eps)?;
                    eprintln!("R_({p},{q}) has growth degree {:.6}", rpq_degree(p, q));
                    (p, q)
                }
                None => (p.unwrap(), q.unwrap()),
            };
            let text = serialize_rule(&make_rpq(p, q)?);
            match file {
                Some(path) => {
                    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?
                }
                None => out = text,
            }
        }
    }
    Ok(out)
}

fn kind(e: &anyhow::Error) -> &'static str {
    match e.downcast_ref::<Error>() {
        Some(Error::NotADisk(_)) => "not_a_disk",
        Some(Error::BoundaryMismatch { .. }) => "boundary_mismatch",
        Some(Error::UnknownTileType(_)) => "unknown_tile_type",
        Some(Error::InvalidRule(_)) => "invalid_rule",
        Some(Error::BudgetExceeded { .. }) => "budget_exceeded",
        Some(Error::Parse { .. }) => "parse",
        Some(Error::InvalidArgument(_)) => "invalid_argument",
        Some(Error::Disconnected) => "disconnected",
        Some(Error::ZeroArea) => "zero_area",
        Some(Error::IterationCap { .. }) => "iteration_cap",
        Some(Error::InsufficientStages { .. }) => "insufficient_stages",
        Some(Error::SingularEmbedding(_)) => "singular_embedding",
        None if e.downcast_ref::<std::io::Error>().is_some() => "io",
        None => "error",
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::from("\"");
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let target = cli.output.clone();
    let result = run(cli).and_then(|text| {
        match target {
            Some(path) => {
                fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?
            }
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            eprintln!(
                r#"{{"error":{},"message":{}}}"#,
                json_string(kind(&e)),
                json_string(&format!("{e:#}"))
            );
            ExitCode::from(1)
        }
    }
}
