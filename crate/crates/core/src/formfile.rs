//! Text format for systems of cubic forms.
//!
//! ```text
//! # x1^3 + x2^3 + x3^3 and x1^2 x2 - x3^3 / 2
//! n 3
//! R 2
//! backend exact
//! form 1
//! 1 1 1 : 1
//! 2 2 2 : 1
//! 3 3 3 : 1
//! form 2
//! 1 1 2 : 1
//! 3 3 3 : -1/2
//! ```
//!
//! Indices are 1-based and give the monomial `x_i x_j x_k` in any order.
//! Values are integers, `p/q` or decimals (`-0.25`, `1.5e-3`), all read
//! exactly. With `R 1` the `form` line may be omitted. `#` starts a comment.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::forms::CubicForm;
use crate::scalar::{Backend, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct FormFile {
    pub n: usize,
    pub backend: Backend,
    pub forms: Vec<CubicForm<Rational>>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Integer, `p/q` or decimal with optional exponent, read exactly.
pub fn parse_value(s: &str) -> std::result::Result<Rational, String> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|e| format!("bad numerator {p:?}: {e}"))?;
        let q = BigInt::from_str(q.trim()).map_err(|e| format!("bad denominator {q:?}: {e}"))?;
        if q.is_zero() {
            return Err("zero denominator".into());
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (
            &s[..pos],
            s[pos + 1..].parse::<i32>().map_err(|e| format!("bad exponent in {s:?}: {e}"))?,
        ),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() || !(whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())) {
        return Err(format!("not a number: {s:?}"));
    }
    let mut num = BigInt::from_str(&format!("0{whole}{frac}")).map_err(|e| e.to_string())?;
    if negative {
        num = -num;
    }
    let shift = exponent - frac.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    let scale = if shift >= 0 {
        num_traits::pow(ten, shift as usize)
    } else {
        Rational::one() / num_traits::pow(ten, (-shift) as usize)
    };
    Ok(Rational::from_integer(num) * scale)
}

pub fn parse(text: &str) -> Result<FormFile> {
    let mut n: Option<usize> = None;
    let mut r: Option<usize> = None;
    let mut backend = Backend::Exact;
    let mut terms: Vec<Vec<([usize; 3], Rational)>> = Vec::new();
    let mut current: Option<usize> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some((idx, value)) = line.split_once(':') {
            let n = n.ok_or_else(|| parse_err(line_no, "coefficient before `n`"))?;
            let r = r.unwrap_or(1);
            if terms.is_empty() {
                terms = vec![Vec::new(); r];
            }
            let form = match current {
                Some(f) => f,
                None if r == 1 => 0,
                None => return Err(parse_err(line_no, "coefficient before `form` with R > 1")),
            };
            let parts: Vec<&str> = idx.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(parse_err(line_no, "expected three indices `i j k`"));
            }
            let mut key = [0usize; 3];
            for (slot, p) in key.iter_mut().zip(&parts) {
                let i: usize = p.parse().map_err(|_| parse_err(line_no, format!("bad index {p:?}")))?;
                if i == 0 || i > n {
                    return Err(parse_err(line_no, format!("index {i} outside 1..={n}")));
                }
                *slot = i - 1;
            }
            key.sort_unstable();
            if terms[form].iter().any(|(k, _)| *k == key) {
                return Err(parse_err(line_no, "monomial listed twice"));
            }
            let v = parse_value(value).map_err(|m| parse_err(line_no, m))?;
            terms[form].push((key, v));
            continue;
        }
        let mut words = line.split_whitespace();
        let key = words.next().unwrap_or("");
        let arg = words.next().ok_or_else(|| parse_err(line_no, format!("`{key}` needs a value")))?;
        if words.next().is_some() {
            return Err(parse_err(line_no, "trailing text"));
        }
        match key {
            "n" | "R" if !terms.is_empty() => {
                return Err(parse_err(line_no, format!("`{key}` after coefficients")));
            }
            "n" => {
                let v: usize = arg.parse().map_err(|_| parse_err(line_no, format!("bad n {arg:?}")))?;
                if v == 0 {
                    return Err(parse_err(line_no, "n must be positive"));
                }
                n = Some(v);
            }
            "R" => {
                let v: usize = arg.parse().map_err(|_| parse_err(line_no, format!("bad R {arg:?}")))?;
                if v == 0 {
                    return Err(parse_err(line_no, "R must be positive"));
                }
                r = Some(v);
            }
            "backend" => {
                backend = match arg {
                    "exact" => Backend::Exact,
                    "float" => Backend::Float,
                    _ => return Err(parse_err(line_no, format!("unknown backend {arg:?}"))),
                }
            }
            "form" => {
                let count = r.unwrap_or(1);
                if n.is_none() {
                    return Err(parse_err(line_no, "`form` before `n`"));
                }
                let f: usize = arg.parse().map_err(|_| parse_err(line_no, format!("bad form index {arg:?}")))?;
                if f == 0 || f > count {
                    return Err(parse_err(line_no, format!("form {f} outside 1..={count}")));
                }
                if terms.is_empty() {
                    terms = vec![Vec::new(); count];
                }
                current = Some(f - 1);
            }
            _ => return Err(parse_err(line_no, format!("unknown key {key:?}"))),
        }
    }
    let n = n.ok_or_else(|| parse_err(0, "missing `n`"))?;
    if terms.is_empty() {
        terms = vec![Vec::new(); r.unwrap_or(1)];
    }
    let forms = terms
        .into_iter()
        .map(|t| CubicForm::new(n, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(FormFile { n, backend, forms })
}

/// Writes a file that [`parse`] reads back to the same forms.
pub fn write(file: &FormFile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n {}", file.n);
    let _ = writeln!(out, "R {}", file.forms.len());
    let _ = writeln!(out, "backend {}", file.backend);
    for (f, form) in file.forms.iter().enumerate() {
        let _ = writeln!(out, "form {}", f + 1);
        for (&[i, j, k], v) in form.coefficients() {
            let _ = writeln!(out, "{} {} {} : {}", i + 1, j + 1, k + 1, v);
        }
    }
    out
}

impl FormFile {
    pub fn single(form: CubicForm<Rational>) -> Self {
        FormFile {
            n: form.n(),
            backend: Backend::Exact,
            forms: vec![form],
        }
    }
}
