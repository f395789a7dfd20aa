//! Tokenizer and recursive-descent parser for emitted programs.

use crate::error::{Error, Result};

use super::{check_names, KEYWORDS};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Kw(&'static str),
    LBrack,
    RBrack,
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    Le,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let push = |out: &mut Vec<Token>, tok| {
            out.push(Token {
                tok,
                line: start_line,
                col: start_col,
            })
        };
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let single = match c {
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            _ => None,
        };
        if let Some(t) = single {
            push(&mut out, t);
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        if c == '<' {
            if chars.get(i + 1) != Some(&'=') {
                return Err(Error::Program {
                    line,
                    col,
                    msg: "expected '<='".into(),
                });
            }
            push(&mut out, Tok::Le);
            i += 2;
        } else if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text.parse().map_err(|_| Error::Program {
                line,
                col,
                msg: format!("bad number {text:?}"),
            })?;
            push(&mut out, Tok::Num(v));
        } else if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let tok = match KEYWORDS.iter().find(|k| **k == text) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(text),
            };
            push(&mut out, tok);
        } else {
            return Err(Error::Program {
                line,
                col,
                msg: format!("unexpected character {c:?}"),
            });
        }
        col += i - start;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
struct Linear {
    coeffs: Vec<f64>,
    bias: f64,
}

impl Linear {
    fn eval(&self, x: &[f64]) -> f64 {
        self.bias + self.coeffs.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Out {
    Lin(Linear),
    Vector(Vec<Out>),
    /// Coefficient vectors for P, I and D.
    Pid(Box<[Out; 3]>),
    Tanh(Box<Out>),
}

impl Out {
    fn eval(&self, x: &[f64], into: &mut Vec<f64>) {
        match self {
            Out::Lin(l) => into.push(l.eval(x)),
            Out::Vector(items) => items.iter().for_each(|o| o.eval(x, into)),
            Out::Pid(parts) => parts.iter().for_each(|o| o.eval(x, into)),
            Out::Tanh(inner) => {
                let start = into.len();
                inner.eval(x, into);
                into[start..].iter_mut().for_each(|v| *v = v.tanh());
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Expr {
    If {
        cond: Linear,
        then: Box<Expr>,
        otherwise: Box<Expr>,
    },
    Out(Out),
    Label(usize),
    Pruned,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProgramValue {
    /// Leaf outputs, flattened. PID leaves give their coefficients in
    /// `[θ_P | θ_I | θ_D]` order per action.
    Values(Vec<f64>),
    Label(usize),
    Pruned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    names: Vec<String>,
    root: Expr,
}

impl Program {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<ProgramValue> {
        if x.len() != self.names.len() {
            return Err(Error::Dimension {
                expected: self.names.len(),
                got: x.len(),
            });
        }
        let mut e = &self.root;
        loop {
            match e {
                Expr::If { cond, then, otherwise } => {
                    e = if cond.eval(x) <= 0.0 { then } else { otherwise };
                }
                Expr::Out(o) => {
                    let mut v = Vec::new();
                    o.eval(x, &mut v);
                    return Ok(ProgramValue::Values(v));
                }
                Expr::Label(l) => return Ok(ProgramValue::Label(*l)),
                Expr::Pruned => return Ok(ProgramValue::Pruned),
            }
        }
    }

    pub fn decision_count(&self) -> usize {
        fn count(e: &Expr) -> usize {
            match e {
                Expr::If { then, otherwise, .. } => 1 + count(then) + count(otherwise),
                _ => 0,
            }
        }
        count(&self.root)
    }
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    names: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (line, col) = match self.toks.get(self.pos).or(self.toks.last()) {
            Some(t) => (t.line, t.col),
            None => (1, 1),
        };
        Err(Error::Program {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<()> {
        if self.peek() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Tok::Kw("if")) => {
                self.pos += 1;
                let cond = self.linear()?;
                self.expect(&Tok::Le, "'<='")?;
                match self.bump() {
                    Some(Tok::Num(z)) if z == 0.0 => {}
                    _ => {
                        self.pos -= 1;
                        return self.err("conditions must compare with 0");
                    }
                }
                self.expect(&Tok::Kw("then"), "'then'")?;
                let then = self.expr()?;
                self.expect(&Tok::Kw("else"), "'else'")?;
                let otherwise = self.expr()?;
                Ok(Expr::If {
                    cond,
                    then: Box::new(then),
                    otherwise: Box::new(otherwise),
                })
            }
            Some(Tok::Kw("label")) => {
                self.pos += 1;
                match self.bump() {
                    Some(Tok::Num(n)) if n >= 0.0 && n.fract() == 0.0 => Ok(Expr::Label(n as usize)),
                    _ => {
                        self.pos -= 1;
                        self.err("expected a class index after 'label'")
                    }
                }
            }
            Some(Tok::Kw("pruned")) => {
                self.pos += 1;
                Ok(Expr::Pruned)
            }
            _ => Ok(Expr::Out(self.out()?)),
        }
    }

    fn out(&mut self) -> Result<Out> {
        match self.peek() {
            Some(Tok::Kw("tanh")) => {
                self.pos += 1;
                self.expect(&Tok::LParen, "'('")?;
                let inner = self.out()?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(Out::Tanh(Box::new(inner)))
            }
            Some(Tok::LBrack) => {
                let first = self.vector()?;
                if self.peek() != Some(&Tok::Star) {
                    return Ok(first);
                }
                let mut parts = vec![first];
                for (i, var) in ["P", "I", "D"].iter().enumerate() {
                    if i > 0 {
                        self.expect(&Tok::Plus, "'+'")?;
                        parts.push(self.vector()?);
                    }
                    self.expect(&Tok::Star, "'*'")?;
                    match self.bump() {
                        Some(Tok::Ident(s)) if s == *var => {}
                        _ => {
                            self.pos -= 1;
                            return self.err(format!("expected '{var}'"));
                        }
                    }
                }
                let parts: [Out; 3] = parts.try_into().expect("three parts");
                let lens: Vec<usize> = parts
                    .iter()
                    .map(|p| match p {
                        Out::Vector(v) => v.len(),
                        _ => 0,
                    })
                    .collect();
                if lens[0] != lens[1] || lens[1] != lens[2] {
                    return self.err("P, I and D coefficient vectors differ in length");
                }
                Ok(Out::Pid(Box::new(parts)))
            }
            _ => Ok(Out::Lin(self.linear()?)),
        }
    }

    fn vector(&mut self) -> Result<Out> {
        self.expect(&Tok::LBrack, "'['")?;
        let mut items = vec![self.out()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            items.push(self.out()?);
        }
        self.expect(&Tok::RBrack, "']'")?;
        Ok(Out::Vector(items))
    }

    fn linear(&mut self) -> Result<Linear> {
        let mut lin = Linear {
            coeffs: vec![0.0; self.names.len()],
            bias: 0.0,
        };
        let mut sign = 1.0;
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            sign = -1.0;
        }
        loop {
            self.term(sign, &mut lin)?;
            sign = match self.peek() {
                Some(Tok::Plus) => 1.0,
                Some(Tok::Minus) => -1.0,
                _ => return Ok(lin),
            };
            self.pos += 1;
        }
    }

    fn term(&mut self, sign: f64, lin: &mut Linear) -> Result<()> {
        match self.bump() {
            Some(Tok::Num(c)) => {
                if self.peek() == Some(&Tok::Star) && matches!(self.toks.get(self.pos + 1).map(|t| &t.tok), Some(Tok::Ident(_))) {
                    self.pos += 1;
                    let idx = self.variable()?;
                    lin.coeffs[idx] += sign * c;
                } else {
                    lin.bias += sign * c;
                }
                Ok(())
            }
            Some(Tok::Ident(_)) => {
                self.pos -= 1;
                let idx = self.variable()?;
                lin.coeffs[idx] += sign;
                Ok(())
            }
            _ => {
                self.pos -= 1;
                self.err("expected a number or a variable")
            }
        }
    }

    fn variable(&mut self) -> Result<usize> {
        match self.bump() {
            Some(Tok::Ident(name)) => match self.names.iter().position(|n| *n == name) {
                Some(i) => Ok(i),
                None => {
                    self.pos -= 1;
                    self.err(format!("unknown variable {name:?}"))
                }
            },
            _ => {
                self.pos -= 1;
                self.err("expected a variable")
            }
        }
    }
}

/// Parse a program over the given input variable names.
pub fn parse_program(source: &str, names: &[String]) -> Result<Program> {
    check_names(names, names.len())?;
    let toks = tokenize(source)?;
    let mut p = Parser { toks, pos: 0, names };
    let root = p.expr()?;
    if p.pos < p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(Program {
        names: names.to_vec(),
        root,
    })
}
