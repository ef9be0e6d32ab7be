//! Plain-text instance format.
//!
//! ```text
//! BMRF 1
//! nodes 3
//! 2 2 2
//! edges 2
//! 0 1
//! 1 2
//! theta_unary
//! 0 0  0 0  0 0
//! theta_pairwise
//! 0 inf inf 0
//! 0 inf inf 0
//! phi_unary
//! 0 0  0 0  0 0
//! phi_pairwise
//! 1 0 0 1.5
//! 1.5 0 0 1
//! zeta linear 1
//! ```
//!
//! Tokens are whitespace separated and `#` starts a comment that runs to the
//! end of the line, so line breaks inside a block are free. Indices are
//! 0-based. Pairwise blocks are row-major in the first declared endpoint.

use std::fmt::Write as _;
use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::model::{BottleneckCost, BottleneckInstance, FactorCosts, Graph, ModelError};

pub const MAGIC: &str = "BMRF";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unexpected end of input: {0}")]
    Eof(String),
    #[error("invalid instance: {0}")]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

struct Tokens<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(src: &'a str) -> Self {
        let mut tokens = Vec::new();
        for (line_no, line) in src.lines().enumerate() {
            let content = match line.find('#') {
                Some(cut) => &line[..cut],
                None => line,
            };
            let mut start = None;
            for (idx, ch) in content
                .char_indices()
                .chain(std::iter::once((content.len(), ' ')))
            {
                match (ch.is_whitespace(), start) {
                    (false, None) => start = Some(idx),
                    (true, Some(s)) => {
                        tokens.push(Token {
                            text: &content[s..idx],
                            line: line_no + 1,
                            column: content[..s].chars().count() + 1,
                        });
                        start = None;
                    }
                    _ => {}
                }
            }
        }
        Self { tokens, pos: 0 }
    }

    fn next(&mut self, what: &str) -> Result<&Token<'a>, FormatError> {
        let tok = self
            .tokens
            .get(self.pos)
            .ok_or_else(|| FormatError::Eof(format!("expected {what}")))?;
        self.pos += 1;
        Ok(tok)
    }

    fn error(tok: &Token<'_>, message: String) -> FormatError {
        FormatError::Parse {
            line: tok.line,
            column: tok.column,
            message,
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), FormatError> {
        let tok = self.next(word)?;
        if tok.text != word {
            return Err(Self::error(
                tok,
                format!("expected `{word}`, found `{}`", tok.text),
            ));
        }
        Ok(())
    }

    fn count(&mut self, what: &str) -> Result<usize, FormatError> {
        let tok = self.next(what)?;
        if tok.text.starts_with('-') {
            return Err(Self::error(
                tok,
                format!("{what} must be non-negative, found `{}`", tok.text),
            ));
        }
        tok.text
            .parse()
            .map_err(|_| Self::error(tok, format!("expected {what}, found `{}`", tok.text)))
    }

    fn real(&mut self, what: &str, allow_inf: bool) -> Result<f64, FormatError> {
        let tok = self.next(what)?;
        let v: f64 = tok
            .text
            .parse()
            .map_err(|_| Self::error(tok, format!("expected {what}, found `{}`", tok.text)))?;
        if v.is_nan() {
            return Err(Self::error(tok, format!("{what} must not be NaN")));
        }
        if v == f64::NEG_INFINITY {
            return Err(Self::error(tok, format!("{what} must not be -inf")));
        }
        if v.is_infinite() && !allow_inf {
            return Err(Self::error(tok, format!("{what} must be finite")));
        }
        Ok(v)
    }

    fn reals(&mut self, n: usize, what: &str, allow_inf: bool) -> Result<Vec<f64>, FormatError> {
        (0..n).map(|_| self.real(what, allow_inf)).collect()
    }
}

/// Parses an instance from its text form.
pub fn parse_instance(src: &str) -> Result<BottleneckInstance, FormatError> {
    let mut t = Tokens::new(src);
    t.keyword(MAGIC)?;
    let tok = t.next("format version")?;
    if tok.text != VERSION.to_string() {
        return Err(Tokens::error(
            tok,
            format!("unsupported version `{}`", tok.text),
        ));
    }

    t.keyword("nodes")?;
    let n = t.count("node count")?;
    let label_counts = (0..n)
        .map(|_| t.count("label count"))
        .collect::<Result<Vec<_>, _>>()?;

    t.keyword("edges")?;
    let m = t.count("edge count")?;
    let mut declared = Vec::with_capacity(m);
    for _ in 0..m {
        let a = t.count("edge endpoint")?;
        let b = t.count("edge endpoint")?;
        declared.push((a, b));
    }
    let graph = Graph::new(n, &declared)?;

    let theta = read_costs(&mut t, "theta", &label_counts, &declared, true)?;
    let phi = read_costs(&mut t, "phi", &label_counts, &declared, false)?;

    t.keyword("zeta")?;
    let kind = t.next("zeta kind")?;
    let zeta = match kind.text {
        "linear" => BottleneckCost::Linear(t.real("zeta weight", false)?),
        "zero" => BottleneckCost::Zero,
        "table" => {
            let k = t.count("zeta table size")?;
            let mut entries = Vec::with_capacity(k);
            for _ in 0..k {
                let b = t.real("zeta table key", false)?;
                let c = t.real("zeta table cost", false)?;
                entries.push((b, c));
            }
            BottleneckCost::Table(entries)
        }
        other => {
            return Err(Tokens::error(
                kind,
                format!("expected `linear`, `zero` or `table`, found `{other}`"),
            ))
        }
    };
    if let Some(extra) = t.tokens.get(t.pos) {
        return Err(Tokens::error(
            extra,
            format!("trailing token `{}`", extra.text),
        ));
    }

    Ok(BottleneckInstance::new(
        graph,
        label_counts,
        theta,
        phi,
        zeta,
    )?)
}

fn read_costs(
    t: &mut Tokens<'_>,
    name: &str,
    label_counts: &[usize],
    declared: &[(usize, usize)],
    allow_inf: bool,
) -> Result<FactorCosts, FormatError> {
    t.keyword(&format!("{name}_unary"))?;
    let unary = label_counts
        .iter()
        .map(|&k| t.reals(k, name, allow_inf))
        .collect::<Result<Vec<_>, _>>()?;
    t.keyword(&format!("{name}_pairwise"))?;
    let mut pairwise = Vec::with_capacity(declared.len());
    for &(a, b) in declared {
        let (ka, kb) = (label_counts[a], label_counts[b]);
        let block = t.reals(ka * kb, name, allow_inf)?;
        if a < b {
            pairwise.push(block);
        } else {
            // stored canonically as rows over min(a, b)
            let mut transposed = vec![0.0; ka * kb];
            for xa in 0..ka {
                for xb in 0..kb {
                    transposed[xb * ka + xa] = block[xa * kb + xb];
                }
            }
            pairwise.push(transposed);
        }
    }
    Ok(FactorCosts { unary, pairwise })
}

/// Renders an instance in the text format. Values are written with the
/// shortest representation that parses back to the same bits.
pub fn format_instance(inst: &BottleneckInstance) -> String {
    let mut out = String::new();
    let g = inst.graph();
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let _ = writeln!(out, "nodes {}", g.node_count());
    let _ = writeln!(out, "{}", join(inst.label_counts().iter()));
    let _ = writeln!(out, "edges {}", g.edge_count());
    for &(i, j) in g.edges() {
        let _ = writeln!(out, "{i} {j}");
    }
    for (name, costs) in [("theta", inst.theta()), ("phi", inst.phi())] {
        let _ = writeln!(out, "{name}_unary");
        for u in &costs.unary {
            let _ = writeln!(out, "{}", join_reals(u));
        }
        let _ = writeln!(out, "{name}_pairwise");
        for p in &costs.pairwise {
            let _ = writeln!(out, "{}", join_reals(p));
        }
    }
    match inst.zeta() {
        BottleneckCost::Linear(w) => {
            let _ = writeln!(out, "zeta linear {w:?}");
        }
        BottleneckCost::Zero => {
            let _ = writeln!(out, "zeta zero");
        }
        BottleneckCost::Table(entries) => {
            let _ = writeln!(out, "zeta table {}", entries.len());
            for (b, c) in entries {
                let _ = writeln!(out, "{b:?} {c:?}");
            }
        }
    }
    out
}

fn join<T: ToString>(items: impl Iterator<Item = T>) -> String {
    items.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn join_reals(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn read_instance<R: Read>(mut reader: R) -> Result<BottleneckInstance, FormatError> {
    let mut src = String::new();
    reader.read_to_string(&mut src)?;
    parse_instance(&src)
}

pub fn write_instance<W: Write>(
    inst: &BottleneckInstance,
    mut writer: W,
) -> Result<(), FormatError> {
    writer.write_all(format_instance(inst).as_bytes())?;
    Ok(())
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<BottleneckInstance, FormatError> {
    parse_instance(&std::fs::read_to_string(path)?)
}

pub fn save_instance(inst: &BottleneckInstance, path: impl AsRef<Path>) -> Result<(), FormatError> {
    std::fs::write(path, format_instance(inst))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "BMRF 1\nnodes 1\n1\nedges 0\ntheta_unary\n0\ntheta_pairwise\nphi_unary\n0\nphi_pairwise\nzeta zero\n";

    #[test]
    fn minimal_file() {
        let inst = parse_instance(MINIMAL).unwrap();
        assert_eq!(inst.node_count(), 1);
        assert_eq!(inst.label_counts(), &[1]);
        assert_eq!(inst.zeta(), &BottleneckCost::Zero);
    }

    #[test]
    fn comments_and_free_layout() {
        let src = "# header\nBMRF 1 nodes 2 2 1 # counts\nedges 1 1 0\ntheta_unary 1 inf 0\ntheta_pairwise 5 6\nphi_unary 0 0 0 phi_pairwise 1 2\nzeta table 2 1 0.5 2 1\n";
        let inst = parse_instance(src).unwrap();
        // declared (1, 0) with node 1 having one label: the 1x2 block transposes to 2x1
        assert_eq!(inst.graph().edges(), &[(0, 1)]);
        assert_eq!(inst.theta().pairwise[0], vec![5.0, 6.0]);
        assert_eq!(inst.theta().unary[0], vec![1.0, f64::INFINITY]);
    }

    #[test]
    fn transposes_reversed_edges() {
        let src = "BMRF 1\nnodes 2\n2 3\nedges 1\n1 0\ntheta_unary 0 0 0 0 0\ntheta_pairwise 1 2 3 4 5 6\nphi_unary 0 0 0 0 0\nphi_pairwise 0 0 0 0 0 0\nzeta zero\n";
        let inst = parse_instance(src).unwrap();
        // rows over node 1 (3 labels) in the file, rows over node 0 after loading
        assert_eq!(inst.theta().pairwise[0], vec![1.0, 3.0, 5.0, 2.0, 4.0, 6.0]);
        let again = parse_instance(&format_instance(&inst)).unwrap();
        assert_eq!(again, inst);
    }

    #[test]
    fn errors_carry_positions() {
        let bad = MINIMAL.replace("theta_unary\n0", "theta_unary\n-inf");
        match parse_instance(&bad) {
            Err(FormatError::Parse { line, column, .. }) => assert_eq!((line, column), (6, 1)),
            other => panic!("unexpected {other:?}"),
        }
        let neg = MINIMAL.replace("nodes 1\n1", "nodes 1\n-1");
        assert!(matches!(
            parse_instance(&neg),
            Err(FormatError::Parse { line: 3, .. })
        ));
        let inf_phi = MINIMAL.replace("phi_unary\n0", "phi_unary\ninf");
        assert!(matches!(
            parse_instance(&inf_phi),
            Err(FormatError::Parse { .. })
        ));
        let short = MINIMAL.replace("nodes 1\n1", "nodes 1\n2");
        assert!(matches!(
            parse_instance(&short),
            Err(FormatError::Parse { .. })
        ));
        assert!(matches!(
            parse_instance("BMRF 1\nnodes"),
            Err(FormatError::Eof(_))
        ));
        assert!(matches!(
            parse_instance("BMRF 2"),
            Err(FormatError::Parse { .. })
        ));
        let trailing = format!("{MINIMAL} 7");
        assert!(matches!(
            parse_instance(&trailing),
            Err(FormatError::Parse { .. })
        ));
    }
}
