//! Plain-text rule documents and CSV export.
//!
//! A rule document is line based; `#` starts a comment.
//!
//! ```text
//! rule NAME
//! family rpq P Q                 # optional
//! type NAME EDGES sub S_0 ... S_{EDGES-1}
//! template TYPE
//!   vertices N
//!   boundary V_0 V_1 ...
//!   corners I_0 I_1 ...
//!   tile TYPE corner K : V_0 V_1 ...
//! end
//! ```
//!
//! Types may be declared in any order relative to the templates; there is
//! exactly one template per type.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_rational::BigRational;

use crate::complex::TypeId;
use crate::error::{Error, Result};
use crate::growth::{ln_big, GrowthTable};
use crate::rules::{
    make_rpq, validate_rule, RuleFamily, SubdivisionRule, SubdivisionTemplate, Subtile, TileType,
};

struct Token<'a> {
    col: usize,
    text: &'a str,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
    /// Column just past the last token, for "missing value" errors.
    end: usize,
}

fn tokenize(text: &str) -> Vec<Line<'_>> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start = None;
        for (j, ch) in content
            .char_indices()
            .chain(std::iter::once((content.len(), ' ')))
        {
            if ch.is_whitespace() {
                if let Some(s) = start.take() {
                    tokens.push(Token {
                        col: s + 1,
                        text: &content[s..j],
                    });
                }
            } else if ch == ':' {
                if let Some(s) = start.take() {
                    tokens.push(Token {
                        col: s + 1,
                        text: &content[s..j],
                    });
                }
                tokens.push(Token {
                    col: j + 1,
                    text: ":",
                });
            } else if start.is_none() {
                start = Some(j);
            }
        }
        if !tokens.is_empty() {
            lines.push(Line {
                number: i + 1,
                tokens,
                end: content.trim_end().len() + 1,
            });
        }
    }
    lines
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

impl<'a> Line<'a> {
    fn tok(&self, i: usize, what: &str) -> Result<&Token<'a>> {
        self.tokens
            .get(i)
            .ok_or_else(|| err(self.number, self.end, format!("missing {what}")))
    }

    fn num<T: std::str::FromStr>(&self, i: usize, what: &str) -> Result<T> {
        let t = self.tok(i, what)?;
        t.text.parse().map_err(|_| {
            err(
                self.number,
                t.col,
                format!("expected {what}, found `{}`", t.text),
            )
        })
    }

    fn nums<T: std::str::FromStr>(&self, from: usize, what: &str) -> Result<Vec<T>> {
        (from..self.tokens.len())
            .map(|i| self.num(i, what))
            .collect()
    }

    fn expect(&self, i: usize, word: &str) -> Result<()> {
        let t = self.tok(i, &format!("`{word}`"))?;
        if t.text != word {
            return Err(err(
                self.number,
                t.col,
                format!("expected `{word}`, found `{}`", t.text),
            ));
        }
        Ok(())
    }

    fn arity(&self, n: usize) -> Result<()> {
        match self.tokens.get(n) {
            Some(t) => Err(err(self.number, t.col, format!("unexpected `{}`", t.text))),
            None => Ok(()),
        }
    }
}

#[derive(Default)]
struct TemplateDraft {
    line: usize,
    vertices: Option<usize>,
    boundary: Option<Vec<u32>>,
    corners: Option<Vec<usize>>,
    subtiles: Vec<Subtile>,
}

/// Parses and validates a rule document.
pub fn parse_rule(text: &str) -> Result<SubdivisionRule> {
    let lines = tokenize(text);
    let mut name = None;
    let mut family = None;
    let mut types: Vec<TileType> = Vec::new();
    let mut ids: HashMap<&str, TypeId> = HashMap::new();
    for l in &lines {
        if l.tokens[0].text == "type" {
            let t = l.tok(1, "type name")?;
            if ids.contains_key(t.text) {
                return Err(err(
                    l.number,
                    t.col,
                    format!("tile type `{}` declared twice", t.text),
                ));
            }
            let edges: usize = l.num(2, "edge count")?;
            if edges < 3 {
                return Err(err(
                    l.number,
                    l.tokens[2].col,
                    "a tile type needs at least 3 edges",
                ));
            }
            l.expect(3, "sub")?;
            let subdivision: Vec<usize> = l.nums(4, "sub-edge count")?;
            if subdivision.len() != edges {
                return Err(err(
                    l.number,
                    l.tokens.get(4).map_or(l.end, |t| t.col),
                    format!("{} sub-edge counts for {edges} edges", subdivision.len()),
                ));
            }
            ids.insert(t.text, TypeId(types.len() as u32));
            types.push(TileType {
                name: t.text.to_string(),
                edge_count: edges,
                subdivision,
            });
        }
    }
    let lookup = |l: &Line, i: usize| -> Result<TypeId> {
        let t = l.tok(i, "tile type")?;
        ids.get(t.text)
            .copied()
            .ok_or_else(|| err(l.number, t.col, format!("unknown tile type `{}`", t.text)))
    };
    let mut drafts: Vec<Option<TemplateDraft>> = (0..types.len()).map(|_| None).collect();
    let mut open: Option<(TypeId, TemplateDraft)> = None;
    for l in &lines {
        let head = &l.tokens[0];
        match (head.text, open.as_mut()) {
            ("type", None) => {}
            ("rule", None) => {
                if name.is_some() {
                    return Err(err(l.number, head.col, "second `rule` line"));
                }
                name = Some(l.tok(1, "rule name")?.text.to_string());
                l.arity(2)?;
            }
            ("family", None) => {
                l.expect(1, "rpq")?;
                let (p, q) = (l.num(2, "p")?, l.num(3, "q")?);
                l.arity(4)?;
                family = Some((l.number, RuleFamily::Rpq { p, q }));
            }
            ("template", None) => {
                let ty = lookup(l, 1)?;
                l.arity(2)?;
                if drafts[ty.index()].is_some() {
                    return Err(err(
                        l.number,
                        l.tokens[1].col,
                        format!("second template for `{}`", l.tokens[1].text),
                    ));
                }
                open = Some((
                    ty,
                    TemplateDraft {
                        line: l.number,
                        ..Default::default()
                    },
                ));
            }
            ("vertices", Some((_, d))) => {
                d.vertices = Some(l.num(1, "vertex count")?);
                l.arity(2)?;
            }
            ("boundary", Some((_, d))) => d.boundary = Some(l.nums(1, "vertex id")?),
            ("corners", Some((_, d))) => d.corners = Some(l.nums(1, "boundary position")?),
            ("tile", Some((_, d))) => {
                let ty = lookup(l, 1)?;
                l.expect(2, "corner")?;
                let corner = l.num(3, "corner index")?;
                l.expect(4, ":")?;
                let cycle: Vec<u32> = l.nums(5, "vertex id")?;
                if cycle.is_empty() {
                    return Err(err(l.number, l.end, "missing vertex cycle"));
                }
                d.subtiles.push(Subtile { ty, corner, cycle });
            }
            ("end", Some(_)) => {
                l.arity(1)?;
                let (ty, d) = open.take().unwrap();
                drafts[ty.index()] = Some(d);
            }
            ("type" | "rule" | "family" | "template", Some(_)) => {
                return Err(err(
                    l.number,
                    head.col,
                    format!("`{}` inside a template block", head.text),
                ));
            }
            ("vertices" | "boundary" | "corners" | "tile" | "end", None) => {
                return Err(err(
                    l.number,
                    head.col,
                    format!("`{}` outside a template block", head.text),
                ));
            }
            (other, _) => {
                return Err(err(
                    l.number,
                    head.col,
                    format!("unknown keyword `{other}`"),
                ))
            }
        }
    }
    if let Some((_, d)) = open {
        return Err(err(d.line, 1, "template block is not closed by `end`"));
    }
    let last = lines.last().map_or(1, |l| l.number);
    let name = name.ok_or_else(|| err(1, 1, "missing `rule NAME` line"))?;
    if types.is_empty() {
        return Err(err(last, 1, "no tile types declared"));
    }
    let mut templates = Vec::with_capacity(types.len());
    for (ty, d) in types.iter().zip(drafts) {
        let d =
            d.ok_or_else(|| err(last, 1, format!("no template for tile type `{}`", ty.name)))?;
        let missing = |what: &str| {
            err(
                d.line,
                1,
                format!("template for `{}` lacks `{what}`", ty.name),
            )
        };
        templates.push(SubdivisionTemplate {
            num_vertices: d.vertices.ok_or_else(|| missing("vertices"))?,
            boundary: d.boundary.clone().ok_or_else(|| missing("boundary"))?,
            corners: d.corners.clone().ok_or_else(|| missing("corners"))?,
            subtiles: d.subtiles,
        });
    }
    let mut rule = SubdivisionRule {
        name,
        types,
        templates,
        family: None,
    };
    let report = validate_rule(&rule);
    if !report.is_ok() {
        return Err(Error::InvalidRule(report));
    }
    if let Some((line, f @ RuleFamily::Rpq { p, q })) = family {
        let reference = make_rpq(p, q).map_err(|e| err(line, 1, e.to_string()))?;
        if reference.types != rule.types || reference.templates != rule.templates {
            return Err(err(
                line,
                1,
                format!("rule body is not the R_({p},{q}) rule its family line claims"),
            ));
        }
        rule.family = Some(f);
    }
    Ok(rule)
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

/// Normal form of a rule document; `parse_rule` inverts it.
pub fn serialize_rule(rule: &SubdivisionRule) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "rule {}", rule.name);
    if let Some(RuleFamily::Rpq { p, q }) = rule.family {
        let _ = writeln!(out, "family rpq {p} {q}");
    }
    for t in &rule.types {
        let _ = writeln!(
            out,
            "type {} {} sub {}",
            t.name,
            t.edge_count,
            join(&t.subdivision)
        );
    }
    for (t, tpl) in rule.types.iter().zip(&rule.templates) {
        let _ = writeln!(out, "\ntemplate {}", t.name);
        let _ = writeln!(out, "  vertices {}", tpl.num_vertices);
        let _ = writeln!(out, "  boundary {}", join(&tpl.boundary));
        let _ = writeln!(out, "  corners {}", join(&tpl.corners));
        for s in &tpl.subtiles {
            let _ = writeln!(
                out,
                "  tile {} corner {} : {}",
                rule.type_name(s.ty),
                s.corner,
                join(&s.cycle)
            );
        }
        let _ = writeln!(out, "end");
    }
    out
}

pub const GROWTH_CSV_HEADER: &str = "n,s_n,b_n,ln_ratio";

/// One row per radius; `ln_ratio` is `ln(b_n)/ln(n)`, left empty for `n < 2`.
pub fn growth_csv(table: &GrowthTable) -> String {
    let mut out = format!("{GROWTH_CSV_HEADER}\n");
    for (n, (s, b)) in table.s.iter().zip(&table.b).enumerate() {
        let ratio = if n < 2 {
            String::new()
        } else {
            format!("{:.6}", ln_big(b) / (n as f64).ln())
        };
        let _ = writeln!(out, "{n},{s},{b},{ratio}");
    }
    out
}

pub const MODULUS_CSV_HEADER: &str = "n,H,A,M_closed,M_solver,gap";

#[derive(Clone, Debug, PartialEq)]
pub struct ModulusRow {
    pub n: usize,
    pub height: BigRational,
    pub area: BigRational,
    pub modulus: BigRational,
    /// Solver estimate and bound gap, when the solver ran.
    pub solver: Option<(f64, f64)>,
}

/// Exact columns are written as reduced fractions (`p/q`, or `p` when whole).
pub fn modulus_csv(rows: &[ModulusRow]) -> String {
    let mut out = format!("{MODULUS_CSV_HEADER}\n");
    for r in rows {
        let (m, gap) = r.solver.map_or((String::new(), String::new()), |(m, g)| {
            (format!("{m:.9}"), format!("{g:.3e}"))
        });
        let _ = writeln!(
            out,
            "{},{},{},{},{m},{gap}",
            r.n, r.height, r.area, r.modulus
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::AdjacencyMode;
    use crate::rules::builtin;
    use num_bigint::BigUint;

    #[test]
    fn roundtrip_builtins_and_family() {
        for name in crate::rules::BUILTIN_NAMES {
            let r = builtin(name).unwrap();
            let text = serialize_rule(&r);
            let back = parse_rule(&text).unwrap();
            assert_eq!(back, r, "{name}");
            assert_eq!(serialize_rule(&back), text);
        }
        let r = make_rpq(3, 4).unwrap();
        assert_eq!(parse_rule(&serialize_rule(&r)).unwrap(), r);
    }

    #[test]
    fn undeclared_type_is_named() {
        let text = serialize_rule(&builtin("R1").unwrap()).replacen("tile t2", "tile t4", 1);
        let e = parse_rule(&text).unwrap_err();
        assert!(e.to_string().contains("t4"), "{e}");
        assert!(matches!(e, Error::Parse { column: 8, .. }), "{e:?}");
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let bad = "rule x\ntype t 4 sub 1 1 1 1\ntemplate t\n  vertices four\nend\n";
        match parse_rule(bad).unwrap_err() {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (4, 12)),
            e => panic!("{e:?}"),
        }
        let cases = [
            "type t 4 sub 1 1 1 1\n",
            "rule x\ntype t 4 sub 1 1 1\n",
            "rule x\ntype t 4 sub 1 1 1 1\ntemplate t\n  vertices 4\n",
            "rule x\nvertices 4\n",
            "rule x\nbogus\n",
            "rule x\ntype t 4 sub 1 1 1 1\ntype t 4 sub 1 1 1 1\n",
        ];
        for c in cases {
            assert!(matches!(parse_rule(c), Err(Error::Parse { .. })), "{c}");
        }
    }

    #[test]
    fn semantic_errors_delegate_to_validation() {
        let text = serialize_rule(&builtin("pentagonal").unwrap())
            .replace("corners 0 2 4 6 8", "corners 0 2 4 6 7");
        assert!(matches!(parse_rule(&text), Err(Error::InvalidRule(_))));
        let lie =
            serialize_rule(&make_rpq(2, 3).unwrap()).replace("family rpq 2 3", "family rpq 2 4");
        assert!(parse_rule(&lie).is_err());
    }

    #[test]
    fn comments_and_ordering() {
        let r = builtin("R1").unwrap();
        let text = serialize_rule(&r);
        // move type lines after the templates and sprinkle comments
        let (types, rest): (Vec<&str>, Vec<&str>) =
            text.lines().partition(|l| l.starts_with("type"));
        let shuffled = format!(
            "# R1 again\n{}\n{}  # trailing\n",
            rest.join("\n"),
            types.join("\n")
        );
        assert_eq!(parse_rule(&shuffled).unwrap(), r);
    }

    #[test]
    fn csv_shapes() {
        let t = GrowthTable::from_spheres(
            AdjacencyMode::Fat,
            [1u32, 4, 12].map(BigUint::from).to_vec(),
            2,
        );
        assert_eq!(
            growth_csv(&t),
            "n,s_n,b_n,ln_ratio\n0,1,1,\n1,4,5,\n2,12,17,4.087463\n"
        );
        let row = ModulusRow {
            n: 2,
            height: BigRational::from_integer(3.into()),
            area: BigRational::from_integer(24.into()),
            modulus: BigRational::new(3.into(), 8.into()),
            solver: Some((0.375, 0.0)),
        };
        let csv = modulus_csv(&[
            ModulusRow {
                solver: None,
                ..row.clone()
            },
            row,
        ]);
        assert_eq!(
            csv,
            "n,H,A,M_closed,M_solver,gap\n2,3,24,3/8,,\n2,3,24,3/8,0.375000000,0.000e0\n"
        );
    }
}
