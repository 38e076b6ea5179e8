//! Text formats for circuits and vector configurations.
//!
//! ```text
//! # comment
//! field rational            (or: field prime 7)
//! nvars 2
//! term 1: [1,0]^2 [0,1]
//! term -1/2: [1,1]
//! ```
//!
//! A bracket with `nvars + 1` entries carries a constant in its last slot;
//! such files are read as affine circuits and homogenized. Configurations
//! use `vec [..]` lines instead of `term` lines.

use crate::circuit::{AffineCircuit, AffineForm, AffineTerm, Circuit, MultTerm};
use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::linalg::FormVec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParsedCircuit {
    Linear(Circuit),
    Affine(AffineCircuit),
}

impl ParsedCircuit {
    /// The homogeneous circuit to work with.
    pub fn into_circuit(self) -> Result<Circuit> {
        match self {
            ParsedCircuit::Linear(c) => Ok(c),
            ParsedCircuit::Affine(a) => a.homogenize(),
        }
    }
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

struct Line<'a> {
    no: usize,
    text: &'a str,
}

fn content_lines(src: &str) -> impl Iterator<Item = Line<'_>> {
    src.lines().enumerate().filter_map(|(i, raw)| {
        let text = raw.split('#').next().unwrap_or("").trim_end();
        (!text.trim().is_empty()).then_some(Line { no: i + 1, text })
    })
}

fn col(line: &Line, part: &str) -> usize {
    part.as_ptr() as usize - line.text.as_ptr() as usize + 1
}

fn header<'a>(lines: &mut impl Iterator<Item = Line<'a>>) -> Result<(FieldSpec, usize)> {
    let l = lines.next().ok_or_else(|| err(1, 1, "missing `field` line"))?;
    let rest = l
        .text
        .trim_start()
        .strip_prefix("field")
        .ok_or_else(|| err(l.no, 1, "expected `field rational` or `field prime <p>`"))?;
    let field: FieldSpec = rest
        .trim()
        .parse()
        .map_err(|e: Error| err(l.no, col(&l, rest.trim()), e.to_string()))?;
    let l = lines.next().ok_or_else(|| err(l.no + 1, 1, "missing `nvars` line"))?;
    let rest = l
        .text
        .trim_start()
        .strip_prefix("nvars")
        .ok_or_else(|| err(l.no, 1, "expected `nvars <n>`"))?;
    let n: usize = rest
        .trim()
        .parse()
        .map_err(|_| err(l.no, col(&l, rest.trim()), "nvars must be a nonnegative integer"))?;
    if n == 0 {
        return Err(err(l.no, col(&l, rest.trim()), "nvars must be positive"));
    }
    Ok((field, n))
}

fn parse_scalar(field: FieldSpec, s: &str, line: &Line) -> Result<Scalar> {
    field
        .parse_scalar(s)
        .map_err(|e| err(line.no, col(line, s), e.to_string()))
}

/// Parses `[a,b,...]` (no spaces inside) with an optional `^e` suffix.
fn parse_bracket(field: FieldSpec, item: &str, line: &Line) -> Result<(Vec<Scalar>, usize)> {
    let c0 = col(line, item);
    let (body, mult) = match item.rfind("]^") {
        Some(p) => {
            let e: usize = item[p + 2..]
                .parse()
                .map_err(|_| err(line.no, c0 + p + 2, "multiplicity must be a positive integer"))?;
            if e == 0 {
                return Err(err(line.no, c0 + p + 2, "multiplicity must be positive"));
            }
            (&item[..p + 1], e)
        }
        None => (item, 1),
    };
    let inner = body
        .strip_prefix('[')
        .and_then(|b| b.strip_suffix(']'))
        .ok_or_else(|| err(line.no, c0, format!("expected `[..]`, found `{item}`")))?;
    let entries = inner
        .split(',')
        .map(|s| parse_scalar(field, s, line))
        .collect::<Result<Vec<_>>>()?;
    Ok((entries, mult))
}

pub fn parse_circuit(src: &str) -> Result<ParsedCircuit> {
    let mut lines = content_lines(src);
    let (field, n) = header(&mut lines)?;
    // (coefficient, [(entries, line, column)])
    let mut raw: Vec<(Scalar, Vec<Vec<Scalar>>)> = Vec::new();
    let mut affine = false;
    for l in lines {
        let t = l.text.trim_start();
        let rest = t
            .strip_prefix("term")
            .filter(|r| r.starts_with(char::is_whitespace))
            .ok_or_else(|| err(l.no, col(&l, t), "expected `term <coeff>: <forms>`"))?;
        let (coeff_s, forms_s) = rest
            .split_once(':')
            .ok_or_else(|| err(l.no, col(&l, rest), "missing `:` after the coefficient"))?;
        let coeff = parse_scalar(field, coeff_s.trim(), &l)?;
        if coeff.is_zero() {
            return Err(err(l.no, col(&l, coeff_s.trim()), "term coefficient is zero"));
        }
        let mut forms = Vec::new();
        for item in forms_s.split_whitespace() {
            let (entries, mult) = parse_bracket(field, item, &l)?;
            if entries.len() == n + 1 {
                affine = true;
            } else if entries.len() != n {
                return Err(err(
                    l.no,
                    col(&l, item),
                    format!("form has {} entries, expected {n}", entries.len()),
                ));
            }
            if entries.iter().all(Scalar::is_zero) {
                return Err(err(l.no, col(&l, item), "zero form"));
            }
            for _ in 0..mult {
                forms.push(entries.clone());
            }
        }
        raw.push((coeff, forms));
    }
    if affine {
        let terms = raw
            .into_iter()
            .map(|(coeff, forms)| AffineTerm {
                coeff,
                forms: forms
                    .into_iter()
                    .map(|mut e| {
                        let constant = if e.len() == n + 1 {
                            e.pop().unwrap()
                        } else {
                            field.zero()
                        };
                        AffineForm {
                            linear: FormVec(e),
                            constant,
                        }
                    })
                    .collect(),
            })
            .collect();
        return Ok(ParsedCircuit::Affine(AffineCircuit { field, nvars: n, terms }));
    }
    let terms = raw
        .into_iter()
        .map(|(coeff, forms)| MultTerm::new(coeff, forms.into_iter().map(FormVec).collect()))
        .collect::<Result<_>>()?;
    Ok(ParsedCircuit::Linear(Circuit::new(field, n, terms)?))
}

/// Canonical text: reduced fractions, runs of equal forms folded into `^e`.
pub fn write_circuit(c: &Circuit) -> String {
    let mut out = format!("field {}\nnvars {}\n", c.field, c.nvars);
    for t in &c.terms {
        out.push_str(&format!("term {}:", t.coeff));
        let mut i = 0;
        while i < t.forms.len() {
            let mut j = i + 1;
            while j < t.forms.len() && t.forms[j] == t.forms[i] {
                j += 1;
            }
            out.push_str(&format!(" {}", t.forms[i]));
            if j - i > 1 {
                out.push_str(&format!("^{}", j - i));
            }
            i = j;
        }
        out.push('\n');
    }
    out
}

pub fn parse_config(src: &str) -> Result<(FieldSpec, usize, Vec<FormVec>)> {
    let mut lines = content_lines(src);
    let (field, n) = header(&mut lines)?;
    let mut vecs = Vec::new();
    for l in lines {
        let t = l.text.trim_start();
        let rest = t
            .strip_prefix("vec")
            .filter(|r| r.starts_with(char::is_whitespace))
            .ok_or_else(|| err(l.no, col(&l, t), "expected `vec [..]`"))?;
        let item = rest.trim();
        let (entries, mult) = parse_bracket(field, item, &l)?;
        if mult != 1 || entries.len() != n {
            return Err(err(l.no, col(&l, item), format!("expected a vector with {n} entries")));
        }
        vecs.push(FormVec(entries));
    }
    Ok((field, n, vecs))
}

pub fn write_config(field: FieldSpec, n: usize, vecs: &[FormVec]) -> String {
    let mut out = format!("field {field}\nnvars {n}\n");
    for v in vecs {
        out.push_str(&format!("vec {v}\n"));
    }
    out
}
