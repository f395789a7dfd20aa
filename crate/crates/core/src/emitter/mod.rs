//! Render oblique trees as small if-then-else programs and read them back.
//!
//! ```text
//! E ::= C | if B then E else E
//! B ::= L <= 0
//! C ::= L | [C, ..., C] | tanh(C) | K * P + K * I + K * D | label n | pruned
//! L ::= c + c*x_1 + ... + c*x_d
//! ```
//!
//! `K * P + K * I + K * D` is a PID controller with coefficient vectors `K`.
//! Linear expressions print the bias first and drop terms whose coefficient
//! magnitude is not above the drop threshold (by default only exact zeros).
//! A unit coefficient prints as the bare name. Numbers use `precision`
//! significant digits; they print in plain decimal when `1e-6 <= |c| < 1e6`
//! and in exponent notation otherwise.

mod parse;
mod simplify;

pub use parse::{parse_program, Program, ProgramValue};
pub use simplify::{dominance_report, zero_out, DominanceReport, NodeDominance, NodeRole, TermContribution, ZeroOutReport};

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::tree::{ObliqueTree, TreeNode};
use crate::netio::LeafActivation;

pub const DEFAULT_PRECISION: usize = 10;
const INDENT: &str = "    ";
pub(crate) const KEYWORDS: [&str; 6] = ["if", "then", "else", "label", "tanh", "pruned"];

/// Shape of a θ vector to render as PID controllers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PidRender {
    pub action_dim: usize,
    pub state_dim: usize,
}

#[derive(Debug, Clone)]
pub struct EmitOptions {
    /// One name per input; `x1..xd` when absent.
    pub names: Option<Vec<String>>,
    pub precision: usize,
    pub drop_threshold: f64,
    pub pid: Option<PidRender>,
}

impl Default for EmitOptions {
    fn default() -> Self {
        EmitOptions {
            names: None,
            precision: DEFAULT_PRECISION,
            drop_threshold: 0.0,
            pid: None,
        }
    }
}

impl EmitOptions {
    pub fn with_names<S: AsRef<str>>(mut self, names: &[S]) -> Self {
        self.names = Some(names.iter().map(|s| s.as_ref().to_string()).collect());
        self
    }

    pub fn with_precision(mut self, precision: usize) -> Self {
        self.precision = precision;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramText {
    pub source: String,
    pub names: Vec<String>,
}

pub fn default_names(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("x{i}")).collect()
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&s)
}

pub(crate) fn check_names(names: &[String], dim: usize) -> Result<()> {
    if names.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "{} variable names given for {} inputs",
            names.len(),
            dim
        )));
    }
    for (i, n) in names.iter().enumerate() {
        if !is_identifier(n) {
            return Err(Error::InvalidArgument(format!("{n:?} is not a usable variable name")));
        }
        if names[..i].contains(n) {
            return Err(Error::InvalidArgument(format!("variable name {n:?} used twice")));
        }
    }
    Ok(())
}

/// `x` to `precision` significant digits, trailing zeros removed.
pub fn format_number(x: f64, precision: usize) -> String {
    let precision = precision.max(1);
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", precision - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let rounded: f64 = sci.parse().expect("round trip");
    if !(1e-6..1e6).contains(&rounded.abs()) {
        return format!("{}e{}", trim_zeros(mantissa), exp);
    }
    let decimals = (precision as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, rounded)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

struct Renderer<'a> {
    names: &'a [String],
    precision: usize,
    drop: f64,
    pid: Option<PidRender>,
}

impl Renderer<'_> {
    fn num(&self, x: f64) -> String {
        format_number(x, self.precision)
    }

    fn linear(&self, p: &[f64], v: f64) -> String {
        let mut parts: Vec<(bool, String)> = Vec::new();
        if v != 0.0 {
            parts.push((v < 0.0, self.num(v.abs())));
        }
        for (c, name) in p.iter().zip(self.names) {
            if c.abs() <= self.drop || *c == 0.0 {
                continue;
            }
            let mag = self.num(c.abs());
            let term = if mag == "1" { name.clone() } else { format!("{mag}*{name}") };
            parts.push((*c < 0.0, term));
        }
        if parts.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (neg, t)) in parts.iter().enumerate() {
            match (i, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            out.push_str(t);
        }
        out
    }

    fn vector(&self, items: Vec<String>) -> String {
        format!("[{}]", items.join(", "))
    }

    fn outputs(&self, p_out: &[Vec<f64>], v_out: &[f64]) -> Result<String> {
        let rows: Vec<String> = p_out.iter().zip(v_out).map(|(p, v)| self.linear(p, *v)).collect();
        if let Some(pid) = self.pid {
            let s = pid.state_dim;
            if rows.len() != 3 * pid.action_dim * s {
                return Err(Error::ThetaShape(format!(
                    "leaf has {} outputs; a PID rendering needs {}",
                    rows.len(),
                    3 * pid.action_dim * s
                )));
            }
            let blocks: Vec<String> = rows
                .chunks(3 * s)
                .map(|blk| {
                    format!(
                        "{} * P + {} * I + {} * D",
                        self.vector(blk[..s].to_vec()),
                        self.vector(blk[s..2 * s].to_vec()),
                        self.vector(blk[2 * s..].to_vec())
                    )
                })
                .collect();
            return Ok(if blocks.len() == 1 {
                blocks.into_iter().next().unwrap()
            } else {
                self.vector(blocks)
            });
        }
        Ok(if rows.len() == 1 {
            rows.into_iter().next().unwrap()
        } else {
            self.vector(rows)
        })
    }

    fn node(&self, node: &TreeNode, depth: usize, out: &mut String) -> Result<()> {
        let pad = INDENT.repeat(depth);
        match node {
            TreeNode::Decision { p, v, left, right } => {
                writeln!(out, "{pad}if {} <= 0 then", self.linear(p, *v)).unwrap();
                self.node(left, depth + 1, out)?;
                writeln!(out, "{pad}else").unwrap();
                self.node(right, depth + 1, out)?;
            }
            TreeNode::Regression {
                p_out,
                v_out,
                activation,
            } => {
                let body = self.outputs(p_out, v_out)?;
                match activation {
                    LeafActivation::Identity => writeln!(out, "{pad}{body}").unwrap(),
                    LeafActivation::Tanh => writeln!(out, "{pad}tanh({body})").unwrap(),
                }
            }
            TreeNode::Label { label } => writeln!(out, "{pad}label {label}").unwrap(),
            TreeNode::Pruned { .. } => writeln!(out, "{pad}pruned").unwrap(),
        }
        Ok(())
    }
}

/// Render `tree` in the program syntax above.
pub fn emit_program(tree: &ObliqueTree, opts: &EmitOptions) -> Result<ProgramText> {
    let names = opts.names.clone().unwrap_or_else(|| default_names(tree.input_dim));
    check_names(&names, tree.input_dim)?;
    if opts.drop_threshold.is_nan() || opts.drop_threshold < 0.0 {
        return Err(Error::InvalidArgument("drop threshold must be >= 0".into()));
    }
    let r = Renderer {
        names: &names,
        precision: opts.precision,
        drop: opts.drop_threshold,
        pid: opts.pid,
    };
    let mut source = String::new();
    r.node(&tree.root, 0, &mut source)?;
    Ok(ProgramText { source, names })
}
